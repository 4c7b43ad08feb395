#pragma once

#include <vector>

#include <liekf/filter.hpp>

namespace liekf {

/// Fixed-interval smoother output over a window of n steps. Index 0 is the
/// window's initial state; index n equals the last filtered posterior.
struct SmoothedWindow {
  std::vector<Vec3> x_smooth;  // n + 1
  std::vector<Mat3> P_smooth;  // n + 1
  std::vector<Mat3> J;         // n, J[i] maps step i+1 back to step i
  std::vector<Mat3> P_lag;     // n, P_lag[i-1] = Cov(x_i, x_{i-1}) for i = 1..n

  std::size_t size() const { return J.size(); }
};

/// Rauch–Tung–Striebel backward pass. Fills x_smooth, P_smooth and J.
/// Throws StepError if a prior covariance cannot be inverted.
SmoothedWindow rts_smooth(const WindowBuffer& buffer);

/// Lag-one cross covariances P_{i,i-1}, i = 1..n, from an RTS pass over the same buffer.
std::vector<Mat3> lag_one_smooth(const WindowBuffer& buffer, const std::vector<Mat3>& J,
                                 const std::vector<Mat3>& P_smooth);

/// rts_smooth followed by lag_one_smooth.
SmoothedWindow smooth_window(const WindowBuffer& buffer);

}  // namespace liekf
