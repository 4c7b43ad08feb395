#include <liekf/smoother.hpp>

#include <stdexcept>

namespace liekf {

namespace {

// Step-indexed views of the buffer: step 0 is the initial state.
const Vec3& x_post(const WindowBuffer& b, std::size_t i) {
  static const Vec3 zero = Vec3::Zero();
  return i == 0 ? zero : b.records[i - 1].x_post;
}

const Mat3& P_post(const WindowBuffer& b, std::size_t i) {
  return i == 0 ? b.initial_state.P : b.records[i - 1].P_post;
}

}  // namespace

SmoothedWindow rts_smooth(const WindowBuffer& buffer) {
  const std::size_t n = buffer.size();
  if (n == 0) {
    throw std::invalid_argument("rts_smooth: empty window");
  }
  SmoothedWindow out;
  out.x_smooth.resize(n + 1);
  out.P_smooth.resize(n + 1);
  out.J.resize(n);

  out.x_smooth[n] = x_post(buffer, n);
  out.P_smooth[n] = P_post(buffer, n);

  for (std::size_t i = n; i-- > 0;) {
    const StepRecord& next = buffer.records[i];  // step i + 1
    const Mat3& Pp = P_post(buffer, i);
    try {
      const auto llt = spd_factor<3>(next.P_prior, "prior covariance");
      // J = P⁺ Fᵀ (P⁻)⁻¹, computed as the transpose of (P⁻)⁻¹ F P⁺.
      out.J[i] = llt.solve(next.F * Pp).transpose();
    } catch (const NumericalError& e) {
      throw StepError(i + 1, e.what());
    }
    const Mat3& J = out.J[i];
    out.P_smooth[i] = symmetrize(Pp + J * (out.P_smooth[i + 1] - next.P_prior) * J.transpose());
    out.x_smooth[i] = x_post(buffer, i) + J * (out.x_smooth[i + 1] - next.x_prior);
  }
  return out;
}

std::vector<Mat3> lag_one_smooth(const WindowBuffer& buffer, const std::vector<Mat3>& J,
                                 const std::vector<Mat3>& P_smooth) {
  const std::size_t n = buffer.size();
  if (J.size() != n || P_smooth.size() != n + 1) {
    throw std::invalid_argument("lag_one_smooth: smoother output does not match the buffer");
  }
  std::vector<Mat3> lag(n);
  const StepRecord& last = buffer.records[n - 1];
  lag[n - 1] = (Mat3::Identity() - last.K * last.H) * last.F * P_post(buffer, n - 1);

  // lag[i-1] = P_{i,i-1}; F_i = records[i].F is the transition i -> i+1.
  for (std::size_t i = n - 1; i >= 1; --i) {
    const Mat3& Pp = P_post(buffer, i);
    const Mat3& F = buffer.records[i].F;
    lag[i - 1] = Pp * J[i - 1].transpose() + J[i] * (lag[i] - F * Pp) * J[i - 1].transpose();
  }
  return lag;
}

SmoothedWindow smooth_window(const WindowBuffer& buffer) {
  SmoothedWindow out = rts_smooth(buffer);
  out.P_lag = lag_one_smooth(buffer, out.J, out.P_smooth);
  return out;
}

}  // namespace liekf
