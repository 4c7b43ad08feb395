#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <liekf/attitude_model.hpp>
#include <liekf/linalg.hpp>
#include <liekf/quaternion.hpp>

namespace liekf {

/// Noise parameters Θ = {Q, R} of the error-state model.
struct FilterParams {
  Mat3 Q = Mat3::Zero();
  Mat6 R = Mat6::Identity();

  /// Throws std::invalid_argument unless Q is symmetric PSD and R symmetric with
  /// eigenvalues >= 1e-15.
  void validate() const;
};

struct FilterState {
  UnitQuaternion q_hat;
  Mat3 P = Mat3::Identity();
};

/// Everything a single predict/update step produced, as consumed by the smoother
/// and the EM pass.
///
/// The attitude filter injects x_post into q_hat and resets the error mean, so
/// x_prior is zero and x_injected == x_post. The linear surrogate keeps its state
/// and leaves x_injected zero. In both cases the next prior is
/// F_next * (x_post - x_injected).
struct StepRecord {
  Vec3 x_prior = Vec3::Zero();
  Vec3 x_post = Vec3::Zero();
  Vec3 x_injected = Vec3::Zero();
  Mat3 P_prior = Mat3::Zero();
  Mat3 P_post = Mat3::Zero();
  Mat3 F = Mat3::Identity();  // transition from the previous step into this one
  Mat6x3 H = Mat6x3::Zero();
  Mat3x6 K = Mat3x6::Zero();
  Vec6 innovation = Vec6::Zero();
  UnitQuaternion q_prior;
  UnitQuaternion q_post;
  Measurement z = Measurement::Zero();
};

/// Filter output over one window: records[k] belongs to step k + 1; step 0 is
/// `initial_state` with zero error mean.
struct WindowBuffer {
  FilterState initial_state;
  std::vector<StepRecord> records;

  std::size_t size() const { return records.size(); }
};

/// NumericalError tagged with the zero-based step (or window index) where it happened.
class StepError : public NumericalError {
 public:
  StepError(std::size_t step, const std::string& what);
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct Prediction {
  UnitQuaternion q_prior;
  Mat3 P_prior;
  Mat3 F;
};

/// Time update: q̂⁻ from the gyro, P⁻ = F P Fᵀ + Q (symmetrized).
Prediction predict(const FilterState& state, const Vec3& omega, double dt, const FilterParams& params);

/// Kalman gain and posterior for a 3-state, 6-measurement linear correction.
struct Correction {
  Mat3x6 K;
  Vec3 dx;
  Mat3 P_post;
};

/// K = P⁻Hᵀ(HP⁻Hᵀ + R)⁻¹, dx = K·innovation, P⁺ = (I − KH)P⁻ symmetrized.
/// Throws NumericalError when the innovation covariance is not SPD or its
/// condition number exceeds 1e12.
Correction kalman_correct(const Mat3& P_prior, const Mat6x3& H, const Mat6& R, const Vec6& innovation);

struct UpdateResult {
  FilterState state;
  StepRecord record;  // F is left as identity; run_window/step fill it in
};

/// Measurement update with injection q̂⁺ = q̂⁻ ⊗ exp_map(x̂⁺/2) and error reset.
UpdateResult update(const UnitQuaternion& q_prior, const Mat3& P_prior, const Measurement& z,
                    const ReferenceFields& refs, const FilterParams& params);

/// One full predict + update.
UpdateResult step(const FilterState& state, const ImuSample& sample, const ReferenceFields& refs,
                  const FilterParams& params);

struct WindowRun {
  FilterState final_state;
  WindowBuffer buffer;
};

/// Runs the filter over `samples`, keeping a StepRecord per step.
/// Throws std::invalid_argument on an empty window and StepError on failure.
WindowRun run_window(const FilterState& init, std::span<const ImuSample> samples, const ReferenceFields& refs,
                     const FilterParams& params);

}  // namespace liekf
