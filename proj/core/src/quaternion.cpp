#include <liekf/quaternion.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace liekf {

namespace {
constexpr double kMinNorm = 1e-12;
constexpr double kSmallAngle = 1e-6;
}  // namespace

UnitQuaternion::UnitQuaternion(const Quaternion& q) {
  const double n2 = q.w * q.w + q.v.squaredNorm();
  // Already unit to rounding: keep the bits so that normalization is idempotent.
  if (std::abs(n2 - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) {
    q_ = q;
    return;
  }
  const double n = std::sqrt(n2);
  if (!(n > kMinNorm)) {
    throw std::domain_error("UnitQuaternion: cannot normalize a quaternion with near-zero norm");
  }
  q_ = Quaternion(q.w / n, q.v / n);
}

UnitQuaternion UnitQuaternion::conjugate() const { return UnitQuaternion(liekf::conjugate(q_)); }

UnitQuaternion UnitQuaternion::canonical() const {
  return q_.w < 0.0 ? UnitQuaternion(Quaternion(-q_.w, -q_.v)) : *this;
}

Quaternion hamilton(const Quaternion& p, const Quaternion& q) {
  return {p.w * q.w - p.v.dot(q.v), p.w * q.v + q.w * p.v + p.v.cross(q.v)};
}

Quaternion conjugate(const Quaternion& q) { return {q.w, -q.v}; }

Quaternion inverse(const Quaternion& q) {
  const double n2 = q.w * q.w + q.v.squaredNorm();
  if (!(std::sqrt(n2) > kMinNorm)) {
    throw std::domain_error("inverse: quaternion norm is too close to zero");
  }
  return {q.w / n2, -q.v / n2};
}

Mat4 xi_matrix(const Quaternion& p) {
  Mat4 m;
  m(0, 0) = p.w;
  m.block<1, 3>(0, 1) = -p.v.transpose();
  m.block<3, 1>(1, 0) = p.v;
  m.block<3, 3>(1, 1) = p.w * Mat3::Identity() + skew(p.v);
  return m;
}

Mat4 omega_matrix(const Quaternion& q) {
  Mat4 m;
  m(0, 0) = q.w;
  m.block<1, 3>(0, 1) = -q.v.transpose();
  m.block<3, 1>(1, 0) = q.v;
  m.block<3, 3>(1, 1) = q.w * Mat3::Identity() - skew(q.v);
  return m;
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  // clang-format off
  m <<  0.0,   -v.z(),  v.y(),
        v.z(),  0.0,   -v.x(),
       -v.y(),  v.x(),  0.0;
  // clang-format on
  return m;
}

UnitQuaternion exp_map(const Vec3& xi) {
  const double angle = xi.norm();
  const double sinc = angle < kSmallAngle ? 1.0 - angle * angle / 6.0 : std::sin(angle) / angle;
  return UnitQuaternion(Quaternion(std::cos(angle), sinc * xi));
}

Vec3 log_map(const UnitQuaternion& q) {
  const double vn = q.v().norm();
  const double w = std::clamp(q.w(), -1.0, 1.0);
  // atan2 is better conditioned than acos near w = ±1.
  const double angle = std::atan2(vn, w);
  if (vn == 0.0) {
    // At w = -1 every axis is valid; pick x.
    return w >= 0.0 ? Vec3::Zero() : Vec3(angle, 0.0, 0.0);
  }
  return q.v() * (angle / vn);
}

Vec3 rotate_world_to_body(const UnitQuaternion& q, const Vec3& u) {
  return hamilton(hamilton(liekf::conjugate(q.quat()), Quaternion::pure(u)), q.quat()).v;
}

Mat3 rotation_matrix(const UnitQuaternion& q) {
  const double w = q.w();
  const Vec3& v = q.v();
  return (w * w - v.squaredNorm()) * Mat3::Identity() + 2.0 * v * v.transpose() + 2.0 * w * skew(v);
}

UnitQuaternion operator*(const UnitQuaternion& p, const UnitQuaternion& q) {
  return UnitQuaternion(hamilton(p.quat(), q.quat()));
}

}  // namespace liekf
