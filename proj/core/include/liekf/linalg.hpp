#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <liekf/types.hpp>

namespace liekf {

/// Raised when a factorization or inversion cannot be trusted. Never swallowed
/// inside the library: the filter step, smoother pass or EM iteration aborts.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Largest condition number accepted for matrices we factor.
inline constexpr double kMaxConditionNumber = 1e12;

template <typename Derived>
auto symmetrize(const Eigen::MatrixBase<Derived>& m) {
  return (0.5 * (m + m.transpose())).eval();
}

/// Cholesky factorization that rejects non-SPD or ill-conditioned input.
template <int N>
Eigen::LLT<Eigen::Matrix<double, N, N>> spd_factor(const Eigen::Matrix<double, N, N>& m, const char* what) {
  Eigen::LLT<Eigen::Matrix<double, N, N>> llt(m);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + " is not positive definite");
  }
  const double rcond = llt.rcond();
  if (!(rcond * kMaxConditionNumber >= 1.0)) {
    throw NumericalError(std::string(what) + " is ill-conditioned (condition number > 1e12)");
  }
  return llt;
}

/// Symmetrizes `m` and raises every eigenvalue to at least `floor`.
template <int N>
Eigen::Matrix<double, N, N> floor_eigenvalues(const Eigen::Matrix<double, N, N>& m, double floor) {
  const Eigen::Matrix<double, N, N> sym = symmetrize(m);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(sym);
  if (eig.eigenvalues().minCoeff() >= floor) {
    return sym;
  }
  const Eigen::Matrix<double, N, 1> clamped = eig.eigenvalues().cwiseMax(floor);
  return symmetrize(eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose());
}

}  // namespace liekf
