#pragma once

#include <Eigen/Dense>

namespace phlab {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Tangent vectors are chart components at an implicit base point. Both
/// models use metrics that are Euclidean in their chart tangent coordinates.
using TangentVector = Vec3;

inline Mat3 block_fiber(const Mat2& fiber, double flow_entry = 1.0) {
    Mat3 m = Mat3::Zero();
    m.topLeftCorner<2, 2>() = fiber;
    m(2, 2) = flow_entry;
    return m;
}

inline double max_abs_entry(const Mat3& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace phlab
