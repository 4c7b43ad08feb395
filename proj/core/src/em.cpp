#include <liekf/em.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace liekf {

EmIterationError::EmIterationError(int iteration, const std::string& what)
    : NumericalError("EM iteration " + std::to_string(iteration) + ": " + what), iteration_(iteration) {}

void EmConfig::validate() const {
  if (window_length < 2) throw std::invalid_argument("em.window_length must be >= 2");
  if (max_iterations < 1) throw std::invalid_argument("em.max_iterations must be >= 1");
  if (!(rel_tolerance > 0.0)) throw std::invalid_argument("em.rel_tolerance must be > 0");
  if (!(q_floor > 0.0) || !(r_floor > 0.0)) throw std::invalid_argument("em floors must be > 0");
}

WindowBuffer AttitudeWindow::filter(const FilterParams& params) const {
  return run_window(init_, samples_, refs_, params).buffer;
}

Vec6 AttitudeWindow::residual(const StepRecord& rec, const Vec3& x_smooth) const {
  return rec.z - measure_h(rec.q_prior * exp_map(0.5 * x_smooth), refs_);
}

WindowBuffer LinearWindow::filter(const FilterParams& params) const { return run_linear_filter(P0_, steps_, params); }

Vec6 LinearWindow::residual(const StepRecord& rec, const Vec3& x_smooth) const { return rec.z - rec.H * x_smooth; }

SufficientStats compute_s_matrices(const SmoothedWindow& smoothed, const WindowBuffer& buffer) {
  const std::size_t n = buffer.size();
  if (smoothed.x_smooth.size() != n + 1 || smoothed.P_smooth.size() != n + 1 || smoothed.P_lag.size() != n) {
    throw std::invalid_argument("compute_s_matrices: smoothed window does not match the buffer");
  }
  SufficientStats s;
  for (std::size_t i = 1; i <= n; ++i) {
    const StepRecord& rec = buffer.records[i - 1];
    const Vec3& x = smoothed.x_smooth[i];
    const Vec3 x_lag = i == 1 ? smoothed.x_smooth[0] : Vec3(smoothed.x_smooth[i - 1] - buffer.records[i - 2].x_injected);
    s.S11 += x * x.transpose() + smoothed.P_smooth[i];
    s.S10 += (x * x_lag.transpose() + smoothed.P_lag[i - 1]) * rec.F.transpose();
    s.S00 += rec.F * (x_lag * x_lag.transpose() + smoothed.P_smooth[i - 1]) * rec.F.transpose();
  }
  return s;
}

Mat3 update_Q(const SufficientStats& stats, std::size_t n, double floor) {
  if (n == 0) throw std::invalid_argument("update_Q: n must be positive");
  Eigen::LLT<Mat3> llt;
  try {
    llt = spd_factor<3>(symmetrize(stats.S00), "S00");
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("degenerate window: ") + e.what());
  }
  const Mat3 Q = (stats.S11 - stats.S10 * llt.solve(stats.S10.transpose())) / static_cast<double>(n);
  return floor_eigenvalues<3>(Q, floor);
}

Mat6 residual_terms(const SmoothedWindow& smoothed, const WindowBuffer& buffer, const WindowProblem& problem) {
  Mat6 sum = Mat6::Zero();
  for (std::size_t i = 1; i <= buffer.size(); ++i) {
    const StepRecord& rec = buffer.records[i - 1];
    const Vec6 r = problem.residual(rec, smoothed.x_smooth[i]);
    sum += r * r.transpose() + rec.H * smoothed.P_smooth[i] * rec.H.transpose();
  }
  return sum;
}

Mat6 update_R(const Mat6& residual_sum, std::size_t n, double floor) {
  if (n == 0) throw std::invalid_argument("update_R: n must be positive");
  return floor_eigenvalues<6>(Mat6(residual_sum / static_cast<double>(n)), floor);
}

Mat6 update_R(const SmoothedWindow& smoothed, const WindowBuffer& buffer, const ReferenceFields& refs,
              std::size_t n, double floor) {
  const AttitudeWindow view(buffer.initial_state, {}, refs);
  return update_R(residual_terms(smoothed, buffer, view), n, floor);
}

namespace {

template <int N>
Eigen::LLT<Eigen::Matrix<double, N, N>> pd_or_domain_error(const Eigen::Matrix<double, N, N>& m, const char* what) {
  Eigen::LLT<Eigen::Matrix<double, N, N>> llt(symmetrize(m));
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0)) {
    throw std::domain_error(std::string("log_likelihood: ") + what + " is not positive definite");
  }
  return llt;
}

template <int N>
double log_det(const Eigen::LLT<Eigen::Matrix<double, N, N>>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

double rel_change(const auto& next, const auto& prev) {
  const double denom = prev.norm();
  return denom > 0.0 ? (next - prev).norm() / denom : (next - prev).norm();
}

}  // namespace

double log_likelihood(const Mat3& Q, const Mat6& R, const SufficientStats& stats, const Mat6& residual_sum,
                      std::size_t n) {
  const auto q_llt = pd_or_domain_error<3>(Q, "Q");
  const auto r_llt = pd_or_domain_error<6>(R, "R");
  const double dn = static_cast<double>(n);
  const Mat3 q_inner = stats.S11 - stats.S10 - stats.S10.transpose() + stats.S00;
  return dn * log_det<3>(q_llt) + dn * log_det<6>(r_llt) + q_llt.solve(q_inner).trace() +
         r_llt.solve(residual_sum).trace();
}

double window_loglik(const WindowProblem& problem, const FilterParams& params) {
  const WindowBuffer buffer = problem.filter(params);
  const SmoothedWindow sm = smooth_window(buffer);
  const std::size_t n = buffer.size();
  return log_likelihood(params.Q, params.R, compute_s_matrices(sm, buffer), residual_terms(sm, buffer, problem), n) /
         static_cast<double>(n);
}

EmResult run_em(const WindowProblem& problem, const FilterParams& theta0, const EmConfig& cfg) {
  cfg.validate();
  theta0.validate();
  const std::size_t n = problem.size();
  if (n != cfg.window_length) {
    throw std::invalid_argument("run_em: window has " + std::to_string(n) + " samples, expected " +
                                std::to_string(cfg.window_length));
  }

  EmResult result;
  FilterParams theta = theta0;
  for (int j = 1; j <= cfg.max_iterations; ++j) {
    try {
      const WindowBuffer buffer = problem.filter(theta);
      const SmoothedWindow sm = smooth_window(buffer);
      const SufficientStats stats = compute_s_matrices(sm, buffer);
      const Mat6 resid = residual_terms(sm, buffer, problem);

      const FilterParams next{update_Q(stats, n, cfg.q_floor), update_R(resid, n, cfg.r_floor)};
      result.loglik_trace.push_back(log_likelihood(next.Q, next.R, stats, resid, n) / static_cast<double>(n));

      const double change = std::max(rel_change(next.Q, theta.Q), rel_change(next.R, theta.R));
      theta = next;
      result.iterations = j;
      if (change < cfg.rel_tolerance) {
        result.converged = true;
        break;
      }
    } catch (const NumericalError& e) {
      throw EmIterationError(j, e.what());
    }
  }
  result.Q_est = theta.Q;
  result.R_est = theta.R;
  return result;
}

EmResult run_em(std::span<const ImuSample> samples, const FilterState& init, const FilterParams& theta0,
                const ReferenceFields& refs, const EmConfig& cfg) {
  return run_em(AttitudeWindow(init, samples, refs), theta0, cfg);
}

}  // namespace liekf
