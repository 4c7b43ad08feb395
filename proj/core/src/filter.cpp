#include <liekf/filter.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace liekf {

StepError::StepError(std::size_t step, const std::string& what)
    : NumericalError("step " + std::to_string(step) + ": " + what), step_(step) {}

void FilterParams::validate() const {
  if (!Q.allFinite() || !R.allFinite()) {
    throw std::invalid_argument("filter parameters must be finite");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("Q must be symmetric");
  }
  if ((R - R.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, R.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("R must be symmetric");
  }
  if (Eigen::SelfAdjointEigenSolver<Mat3>(Q, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < 0.0) {
    throw std::invalid_argument("Q must be positive semidefinite");
  }
  if (Eigen::SelfAdjointEigenSolver<Mat6>(R, Eigen::EigenvaluesOnly).eigenvalues().minCoeff() < 1e-15) {
    throw std::invalid_argument("R eigenvalues must be >= 1e-15");
  }
}

Prediction predict(const FilterState& state, const Vec3& omega, double dt, const FilterParams& params) {
  const Mat3 F = transition_F(omega, dt);
  return {propagate_quaternion(state.q_hat, omega, dt), symmetrize(F * state.P * F.transpose() + params.Q), F};
}

Correction kalman_correct(const Mat3& P_prior, const Mat6x3& H, const Mat6& R, const Vec6& innovation) {
  const Mat6 S = symmetrize(H * P_prior * H.transpose() + R);
  const auto llt = spd_factor<6>(S, "innovation covariance");
  // K = P Hᵀ S⁻¹  <=>  S Kᵀ = H P
  const Mat3x6 K = llt.solve(H * P_prior).transpose();
  return {K, K * innovation, symmetrize((Mat3::Identity() - K * H) * P_prior)};
}

UpdateResult update(const UnitQuaternion& q_prior, const Mat3& P_prior, const Measurement& z,
                    const ReferenceFields& refs, const FilterParams& params) {
  StepRecord rec;
  rec.q_prior = q_prior;
  rec.P_prior = P_prior;
  rec.z = z;
  rec.H = jacobian_H(q_prior, refs);
  rec.innovation = z - measure_h(q_prior, refs);

  const Correction c = kalman_correct(P_prior, rec.H, params.R, rec.innovation);
  rec.K = c.K;
  rec.x_post = c.dx;
  rec.x_injected = c.dx;
  rec.P_post = c.P_post;
  rec.q_post = q_prior * exp_map(0.5 * c.dx);

  return {FilterState{rec.q_post, rec.P_post}, rec};
}

UpdateResult step(const FilterState& state, const ImuSample& sample, const ReferenceFields& refs,
                  const FilterParams& params) {
  const Prediction pred = predict(state, sample.omega, sample.dt, params);
  UpdateResult out = update(pred.q_prior, pred.P_prior, sample.z(), refs, params);
  out.record.F = pred.F;
  return out;
}

WindowRun run_window(const FilterState& init, std::span<const ImuSample> samples, const ReferenceFields& refs,
                     const FilterParams& params) {
  if (samples.empty()) {
    throw std::invalid_argument("run_window: empty sample window");
  }
  WindowRun run{init, WindowBuffer{init, {}}};
  run.buffer.records.reserve(samples.size());
  FilterState state = init;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    try {
      UpdateResult r = step(state, samples[k], refs, params);
      state = r.state;
      run.buffer.records.push_back(std::move(r.record));
    } catch (const NumericalError& e) {
      throw StepError(k, e.what());
    }
  }
  run.final_state = state;
  return run;
}

}  // namespace liekf
