#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <liekf/filter.hpp>
#include <liekf/linear_model.hpp>
#include <liekf/smoother.hpp>

namespace liekf {

struct EmConfig {
  std::size_t window_length = 100;
  int max_iterations = 50;
  /// Stop once max(|ΔQ|_F/|Q|_F, |ΔR|_F/|R|_F) drops below this.
  double rel_tolerance = 1e-3;
  double q_floor = 1e-12;
  double r_floor = 1e-12;

  void validate() const;  // throws std::invalid_argument
};

struct SufficientStats {
  Mat3 S11 = Mat3::Zero();
  Mat3 S10 = Mat3::Zero();
  Mat3 S00 = Mat3::Zero();
};

struct EmResult {
  Mat3 Q_est = Mat3::Zero();
  Mat6 R_est = Mat6::Zero();
  std::vector<double> loglik_trace;  // G / n after each M-step
  int iterations = 0;
  bool converged = false;

  FilterParams params() const { return {Q_est, R_est}; }
};

/// NumericalError raised inside the EM loop, tagged with the 1-based iteration.
class EmIterationError : public NumericalError {
 public:
  EmIterationError(int iteration, const std::string& what);
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// A window of data the EM loop can re-filter under new parameters.
class WindowProblem {
 public:
  virtual ~WindowProblem() = default;

  virtual std::size_t size() const = 0;
  /// Filters the whole window from its fixed initial state.
  virtual WindowBuffer filter(const FilterParams& params) const = 0;
  /// z_i − h(x̂_i) for a step record and its smoothed error state.
  virtual Vec6 residual(const StepRecord& rec, const Vec3& x_smooth) const = 0;
};

/// The attitude filter over a window of IMU samples.
class AttitudeWindow final : public WindowProblem {
 public:
  AttitudeWindow(FilterState init, std::span<const ImuSample> samples, ReferenceFields refs)
      : init_(init), samples_(samples), refs_(refs) {}

  std::size_t size() const override { return samples_.size(); }
  WindowBuffer filter(const FilterParams& params) const override;
  /// z − measure_h(q̂⁻ ⊗ exp_map(x̂/2)), using the step's stored prior attitude.
  Vec6 residual(const StepRecord& rec, const Vec3& x_smooth) const override;

 private:
  FilterState init_;
  std::span<const ImuSample> samples_;
  ReferenceFields refs_;
};

/// The linear-Gaussian surrogate: residual is z − H x̂.
class LinearWindow final : public WindowProblem {
 public:
  LinearWindow(Mat3 P0, std::span<const LinearStep> steps) : P0_(P0), steps_(steps) {}

  std::size_t size() const override { return steps_.size(); }
  WindowBuffer filter(const FilterParams& params) const override;
  Vec6 residual(const StepRecord& rec, const Vec3& x_smooth) const override;

 private:
  Mat3 P0_;
  std::span<const LinearStep> steps_;
};

/// S11 = Σ x̂ᵢx̂ᵢᵀ + Pᵢ,  S10 = Σ (x̂ᵢ x̃ᵢ₋₁ᵀ + P_{i,i−1}) Fᵢ₋₁ᵀ,  S00 = Σ Fᵢ₋₁(x̃ᵢ₋₁x̃ᵢ₋₁ᵀ + Pᵢ₋₁)Fᵢ₋₁ᵀ
/// over i = 1..n, where x̃ᵢ₋₁ = x̂ᵢ₋₁ − (error injected at step i−1). For the
/// resetting attitude filter this expresses the lagged state relative to the
/// post-injection attitude that Fᵢ₋₁ propagates; for a plain linear filter x̃ = x̂.
SufficientStats compute_s_matrices(const SmoothedWindow& smoothed, const WindowBuffer& buffer);

/// Q = (S11 − S10 S00⁻¹ S10ᵀ) / n, symmetrized and eigenvalue-floored.
/// Throws NumericalError if S00 is singular.
Mat3 update_Q(const SufficientStats& stats, std::size_t n, double floor = 1e-12);

/// Σᵢ (zᵢ − h(x̂ᵢ))(zᵢ − h(x̂ᵢ))ᵀ + Hᵢ Pᵢ Hᵢᵀ over i = 1..n.
Mat6 residual_terms(const SmoothedWindow& smoothed, const WindowBuffer& buffer, const WindowProblem& problem);

/// R = residual_terms / n, symmetrized and eigenvalue-floored.
Mat6 update_R(const Mat6& residual_sum, std::size_t n, double floor = 1e-12);

/// Attitude form: residuals evaluated at q̂ᵢ⁻ ⊗ exp_map(x̂ᵢ/2).
Mat6 update_R(const SmoothedWindow& smoothed, const WindowBuffer& buffer, const ReferenceFields& refs,
              std::size_t n, double floor = 1e-12);

/// G = n ln|Q| + n ln|R| + tr{Q⁻¹[S11 − S10 − S10ᵀ + S00]} + tr{R⁻¹ residual_sum}.
/// Throws std::domain_error unless Q and R are positive definite.
double log_likelihood(const Mat3& Q, const Mat6& R, const SufficientStats& stats, const Mat6& residual_sum,
                      std::size_t n);

/// Filter + smoother + G/n at fixed parameters (no M-step). Used as the
/// reference level for EM traces.
double window_loglik(const WindowProblem& problem, const FilterParams& params);

/// Filter–smoother–EM iterated over the same window until the parameters settle.
/// Filter and smoother failures surface as EmIterationError.
EmResult run_em(const WindowProblem& problem, const FilterParams& theta0, const EmConfig& cfg);

/// Attitude convenience overload; the window is `samples`, whose length must
/// equal cfg.window_length.
EmResult run_em(std::span<const ImuSample> samples, const FilterState& init, const FilterParams& theta0,
                const ReferenceFields& refs, const EmConfig& cfg);

}  // namespace liekf
