#include "phlab/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "phlab/errors.hpp"

namespace phlab {

namespace {

constexpr double kZeroNorm = 1e-14;

Vec3 unit(const Vec3& v, const char* what) {
    const double n = v.norm();
    if (!(n >= kZeroNorm)) fail(ErrorCode::ZeroVector, what);
    return v / n;
}

}  // namespace

Plane::Plane(const Vec3& normal) : normal_(unit(normal, "plane normal vanishes")) {}

Plane Plane::spanned_by(const Vec3& a, const Vec3& b) {
    const Vec3 n = a.cross(b);
    if (n.norm() < kZeroNorm * std::max(1.0, a.norm() * b.norm())) {
        fail(ErrorCode::ZeroVector, "spanning vectors are parallel");
    }
    return Plane(n);
}

bool Plane::contains(const Vec3& v, double tol) const { return angle_line_plane(v, *this) <= tol; }

double angle_line_plane(const Vec3& v, const Plane& p) {
    const double nv = v.norm();
    if (!(nv >= kZeroNorm)) fail(ErrorCode::ZeroVector, "angle of a zero vector");
    const double along = std::abs(p.normal().dot(v));
    const double in_plane = (v - p.normal().dot(v) * p.normal()).norm();
    // atan2 keeps full precision near 0 and near pi/2, unlike asin.
    return std::atan2(along, in_plane);
}

double angle_between_lines(const Vec3& a, const Vec3& b) {
    if (!(a.norm() >= kZeroNorm) || !(b.norm() >= kZeroNorm)) {
        fail(ErrorCode::ZeroVector, "angle of a zero vector");
    }
    return std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
}

double angle_between_planes(const Plane& a, const Plane& b) {
    return angle_between_lines(a.normal(), b.normal());
}

Plane transport_plane(const Mat3& l, const Plane& p) {
    const double det = l.determinant();
    if (!(std::abs(det) >= 1e-12)) fail(ErrorCode::SingularMap, "transport by a singular map");
    return Plane(l.inverse().transpose() * p.normal());
}

SplittingFrame::SplittingFrame(const Vec3& e_s, const Vec3& e_c, const Vec3& e_u)
    : e_s_(unit(e_s, "stable direction")),
      e_c_(unit(e_c, "center direction")),
      e_u_(unit(e_u, "unstable direction")),
      cs_(Plane::spanned_by(e_s_, e_c_)),
      cu_(Plane::spanned_by(e_c_, e_u_)) {
    validate();
}

SplittingFrame::SplittingFrame(const Vec3& e_s, const Vec3& e_c, const Vec3& e_u, const Plane& cs,
                               const Plane& cu)
    : e_s_(unit(e_s, "stable direction")),
      e_c_(unit(e_c, "center direction")),
      e_u_(unit(e_u, "unstable direction")),
      cs_(cs),
      cu_(cu) {
    validate();
}

void SplittingFrame::validate() const {
    Mat3 m;
    m << e_s_, e_c_, e_u_;
    if (std::abs(m.determinant()) < 1e-8) {
        fail(ErrorCode::DomainError, "splitting directions are not linearly independent");
    }
    if (!cs_.contains(e_s_) || !cs_.contains(e_c_) || !cu_.contains(e_c_) || !cu_.contains(e_u_)) {
        fail(ErrorCode::DomainError, "splitting planes do not contain their directions");
    }
}

double SplittingFrame::max_angle_to(const SplittingFrame& other) const {
    return std::max({angle_between_lines(e_s_, other.e_s_), angle_between_lines(e_c_, other.e_c_),
                     angle_between_lines(e_u_, other.e_u_)});
}

}  // namespace phlab
