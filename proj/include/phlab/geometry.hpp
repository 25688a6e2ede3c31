#pragma once

#include "phlab/linalg.hpp"

namespace phlab {

/// A 2-plane in a tangent space, stored by its unit normal.
class Plane {
public:
    Plane() : normal_(Vec3::UnitZ()) {}
    /// Throws ZeroVector if `normal` vanishes.
    explicit Plane(const Vec3& normal);

    static Plane spanned_by(const Vec3& a, const Vec3& b);

    const Vec3& normal() const { return normal_; }
    /// Angle between `v` and the plane is at most `tol`.
    bool contains(const Vec3& v, double tol = 1e-10) const;
    Vec3 project(const Vec3& v) const { return v - normal_.dot(v) * normal_; }

private:
    Vec3 normal_;
};

/// Angle in [0, pi/2] between the line through `v` and the plane `p`; 0 iff v lies in p.
double angle_line_plane(const Vec3& v, const Plane& p);

/// Unoriented angle in [0, pi/2] between two lines.
double angle_between_lines(const Vec3& a, const Vec3& b);

/// Angle in [0, pi/2] between two planes (angle between their normals as lines).
double angle_between_planes(const Plane& a, const Plane& b);

/// Image of `p` under the invertible linear map `l`: normal pushed by l^{-T}.
Plane transport_plane(const Mat3& l, const Plane& p);

/// Ordered (stable, center, unstable) directions and the two invariant planes
/// E^cs = span(e_s, e_c) and E^cu = span(e_c, e_u).
class SplittingFrame {
public:
    SplittingFrame(const Vec3& e_s, const Vec3& e_c, const Vec3& e_u);
    /// Planes supplied separately (e.g. from plane power iteration); they must
    /// contain the corresponding vectors within 1e-10.
    SplittingFrame(const Vec3& e_s, const Vec3& e_c, const Vec3& e_u, const Plane& cs, const Plane& cu);

    const Vec3& stable() const { return e_s_; }
    const Vec3& center() const { return e_c_; }
    const Vec3& unstable() const { return e_u_; }
    const Plane& center_stable() const { return cs_; }
    const Plane& center_unstable() const { return cu_; }

    /// Largest of the three line angles to `other`.
    double max_angle_to(const SplittingFrame& other) const;

private:
    void validate() const;

    Vec3 e_s_, e_c_, e_u_;
    Plane cs_, cu_;
};

}  // namespace phlab
