#pragma once

#include <span>

#include <liekf/filter.hpp>

namespace liekf {

/// One step of a linear-Gaussian surrogate x_k = F x_{k-1} + w, z_k = H x_k + v.
/// Used to check the smoother and EM against closed-form references.
struct LinearStep {
  Mat3 F = Mat3::Identity();  // transition into this step
  Mat6x3 H = Mat6x3::Zero();
  Measurement z = Measurement::Zero();
};

/// Plain (non-resetting) Kalman filter from a zero-mean prior with covariance P0.
/// Produces the same WindowBuffer layout as run_window; quaternion fields stay identity.
WindowBuffer run_linear_filter(const Mat3& P0, std::span<const LinearStep> steps, const FilterParams& params);

}  // namespace liekf
