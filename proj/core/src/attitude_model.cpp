#include <liekf/attitude_model.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace liekf {

namespace {
// Idempotent: a vector that is already unit to rounding keeps its bits.
Vec3 unit(const Vec3& v) {
  const double n2 = v.squaredNorm();
  return std::abs(n2 - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() ? v : Vec3(v / std::sqrt(n2));
}
}  // namespace

ReferenceFields ReferenceFields::make(const Vec3& gravity, const Vec3& magnetic) {
  const double gn = gravity.norm();
  const double mn = magnetic.norm();
  if (!(gn > 0.0) || !(mn > 0.0) || !gravity.allFinite() || !magnetic.allFinite()) {
    throw std::invalid_argument("reference fields must be finite and non-zero");
  }
  ReferenceFields refs;
  refs.g = unit(gravity);
  refs.m0 = unit(magnetic);
  if (std::abs(refs.g.dot(refs.m0)) >= 1.0 - 1e-6) {
    throw std::invalid_argument("gravity and magnetic reference fields are parallel");
  }
  return refs;
}

UnitQuaternion propagate_quaternion(const UnitQuaternion& q, const Vec3& omega, double dt) {
  const Vec4 next = (Mat4::Identity() + 0.5 * dt * omega_matrix(Quaternion::pure(omega))) * q.coeffs();
  return UnitQuaternion(Quaternion::from_coeffs(next));
}

Measurement measure_h(const UnitQuaternion& q, const ReferenceFields& refs) {
  Measurement z;
  z << rotate_world_to_body(q, refs.g), rotate_world_to_body(q, refs.m0);
  return z;
}

Mat6x3 jacobian_H(const UnitQuaternion& q, const ReferenceFields& refs) {
  Mat6x3 H;
  H << skew(rotate_world_to_body(q, refs.g)), skew(rotate_world_to_body(q, refs.m0));
  return H;
}

Mat3 transition_F(const Vec3& omega, double dt) { return Mat3::Identity() - dt * skew(omega); }

Mat3 process_noise_Q(const Mat3& sigma_eta, double dt) { return dt * dt * sigma_eta; }

Mat6 assemble_R(const Mat3& sigma_a, const Mat3& sigma_m) {
  Mat6 R = Mat6::Zero();
  R.topLeftCorner<3, 3>() = sigma_a;
  R.bottomRightCorner<3, 3>() = sigma_m;
  return R;
}

}  // namespace liekf
