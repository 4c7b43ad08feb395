#pragma once

#include <liekf/types.hpp>

namespace liekf {

/// General (not necessarily unit) quaternion with scalar part `w` and vector part `v`.
/// Memory and file order is always [w, x, y, z].
struct Quaternion {
  double w = 1.0;
  Vec3 v = Vec3::Zero();

  Quaternion() = default;
  Quaternion(double w_, const Vec3& v_) : w(w_), v(v_) {}
  Quaternion(double w_, double x, double y, double z) : w(w_), v(x, y, z) {}

  static Quaternion identity() { return {}; }
  static Quaternion pure(const Vec3& u) { return {0.0, u}; }
  static Quaternion from_coeffs(const Vec4& wxyz) { return {wxyz[0], wxyz.tail<3>()}; }

  Vec4 coeffs() const { return {w, v.x(), v.y(), v.z()}; }
  double norm() const { return std::sqrt(w * w + v.squaredNorm()); }
};

/// Quaternion on S^3. Every constructor renormalizes, so |norm - 1| stays below 1e-9.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;

  /// Normalizes `q`; throws std::domain_error if its norm is below 1e-12.
  explicit UnitQuaternion(const Quaternion& q);
  UnitQuaternion(double w, double x, double y, double z) : UnitQuaternion(Quaternion(w, x, y, z)) {}

  static UnitQuaternion identity() { return {}; }

  const Quaternion& quat() const { return q_; }
  operator const Quaternion&() const { return q_; }  // NOLINT(google-explicit-constructor)

  double w() const { return q_.w; }
  const Vec3& v() const { return q_.v; }
  Vec4 coeffs() const { return q_.coeffs(); }

  UnitQuaternion conjugate() const;
  /// Returns the representative with w >= 0 (q and -q encode the same rotation).
  UnitQuaternion canonical() const;

 private:
  Quaternion q_{};
};

/// Hamilton product p ⊗ q.
Quaternion hamilton(const Quaternion& p, const Quaternion& q);
Quaternion conjugate(const Quaternion& q);
/// q̄ / |q|^2. Throws std::domain_error if |q| <= 1e-12.
Quaternion inverse(const Quaternion& q);

/// Left-multiplication matrix: xi_matrix(p) * q == p ⊗ q.
Mat4 xi_matrix(const Quaternion& p);
/// Right-multiplication matrix: omega_matrix(q) * p == p ⊗ q.
Mat4 omega_matrix(const Quaternion& q);

/// Cross-product matrix, skew(v) * w == v × w.
Mat3 skew(const Vec3& v);

/// [cos|xi|; xi sin|xi| / |xi|]. Note there is no half-angle: the rotation angle is 2|xi|.
UnitQuaternion exp_map(const Vec3& xi);

/// Principal inverse of exp_map: returns xi with |xi| <= pi such that exp_map(xi) == q.
/// For |xi| < pi, log_map(exp_map(xi)) == xi. Callers that want the shortest rotation
/// should pass q.canonical().
Vec3 log_map(const UnitQuaternion& q);

/// Vector part of q^{-1} ⊗ u ⊗ q: world-frame vector expressed in the body frame.
Vec3 rotate_world_to_body(const UnitQuaternion& q, const Vec3& u);

/// Body-to-world direction cosine matrix of q (rotate_world_to_body == R^T u).
Mat3 rotation_matrix(const UnitQuaternion& q);

/// Hamilton product of two unit quaternions, renormalized.
UnitQuaternion operator*(const UnitQuaternion& p, const UnitQuaternion& q);

}  // namespace liekf
