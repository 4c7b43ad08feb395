#pragma once

#include <liekf/quaternion.hpp>
#include <liekf/types.hpp>

namespace liekf {

/// World-frame reference directions observed by the accelerometer and magnetometer.
struct ReferenceFields {
  Vec3 g{0.0, 0.0, 1.0};
  Vec3 m0{0.5, 0.0, -0.8660254037844386};  // 60° dip

  /// Normalizes both fields. Throws std::invalid_argument on zero-length or
  /// (near-)parallel inputs, |g·m0| >= 1 - 1e-6.
  static ReferenceFields make(const Vec3& gravity, const Vec3& magnetic);
};

/// One IMU epoch. `omega` is the gyro reading held constant over the `dt` seconds
/// leading up to the accelerometer/magnetometer readings.
struct ImuSample {
  Vec3 omega = Vec3::Zero();  // rad/s
  Vec3 accel = Vec3::Zero();  // normalized
  Vec3 mag = Vec3::Zero();    // normalized
  double dt = 0.01;           // s

  Measurement z() const {
    Measurement out;
    out << accel, mag;
    return out;
  }
};

/// Sensor noise covariances: gyro Σ_η in (rad/s)², accelerometer and magnetometer blocks.
struct NoiseSpec {
  Mat3 sigma_eta = Mat3::Zero();
  Mat3 sigma_a = Mat3::Zero();
  Mat3 sigma_m = Mat3::Zero();
};

/// First-order quaternion integration (I + dt/2 Ω[ω]) q, renormalized.
UnitQuaternion propagate_quaternion(const UnitQuaternion& q, const Vec3& omega, double dt);

/// [q⁻¹ ⊗ g ⊗ q; q⁻¹ ⊗ m0 ⊗ q].
Measurement measure_h(const UnitQuaternion& q, const ReferenceFields& refs);

/// Sensitivity of measure_h to the left-invariant error x, where the true
/// attitude is q ⊗ exp_map(x/2).
Mat6x3 jacobian_H(const UnitQuaternion& q, const ReferenceFields& refs);

/// Error-state transition I - dt [ω]×.
Mat3 transition_F(const Vec3& omega, double dt);

/// dt² Σ_η.
Mat3 process_noise_Q(const Mat3& sigma_eta, double dt);

/// blockdiag(Σ_a, Σ_m).
Mat6 assemble_R(const Mat3& sigma_a, const Mat3& sigma_m);

}  // namespace liekf
