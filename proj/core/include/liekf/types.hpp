#pragma once

#include <Eigen/Dense>

namespace liekf {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Mat6x3 = Eigen::Matrix<double, 6, 3>;
using Mat3x6 = Eigen::Matrix<double, 3, 6>;

/// Stacked accelerometer and magnetometer reading, [accel; mag].
using Measurement = Vec6;

}  // namespace liekf
