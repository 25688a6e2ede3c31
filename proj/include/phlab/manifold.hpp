#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "phlab/geometry.hpp"
#include "phlab/linalg.hpp"

namespace phlab {

/// A point of a registered 3-manifold model in its canonical chart.
///
/// Suspension models use (x, y, s) in the first three slots; the geodesic model
/// stores the SL(2,R) representative (a, b, c, d).
struct ModelPoint {
    std::array<double, 4> c{};

    ModelPoint() = default;
    ModelPoint(double x, double y, double s) : c{x, y, s, 0.0} {}
    ModelPoint(double a, double b, double cc, double d) : c{a, b, cc, d} {}

    double operator[](std::size_t i) const { return c[i]; }
    double& operator[](std::size_t i) { return c[i]; }
    Vec3 xyz() const { return {c[0], c[1], c[2]}; }

    friend bool operator==(const ModelPoint&, const ModelPoint&) = default;
};

/// Point together with the differential of the map that produced it.
struct Jet {
    ModelPoint point;
    Mat3 jacobian;
};

/// Chart-level description of a closed 3-manifold with a metric that is
/// Euclidean in tangent coordinates.
class Manifold {
public:
    virtual ~Manifold() = default;

    virtual std::string name() const = 0;
    virtual bool valid(const ModelPoint& p) const = 0;
    /// Canonical chart representative.
    virtual ModelPoint reduce(const ModelPoint& p) const = 0;
    /// Exponential-chart step from p by tangent vector v (reduced).
    virtual ModelPoint displace(const ModelPoint& p, const Vec3& v) const = 0;
    /// Tangent vector at `from` pointing to the nearest lift of `to`; the
    /// inverse of `displace` for nearby points.
    virtual Vec3 displacement(const ModelPoint& from, const ModelPoint& to) const = 0;
    /// How `displacement(·, to)` coordinates change when the lift of `to`
    /// across chart identifications is used: the linear map applied to
    /// tangent coordinates at `to` to express them at the chosen lift.
    virtual Mat3 lift_jacobian(const ModelPoint& from, const ModelPoint& to) const {
        (void)from;
        (void)to;
        return Mat3::Identity();
    }
    virtual double distance(const ModelPoint& a, const ModelPoint& b) const {
        return displacement(a, b).norm();
    }
    /// Deterministic sample grid with roughly n points per dimension.
    virtual std::vector<ModelPoint> grid(int n) const = 0;
    virtual ModelPoint sample(std::mt19937_64& rng) const = 0;
};

/// A manifold carrying a flow with computable time-t maps.
class FlowModel : public Manifold {
public:
    /// Time-t map and its differential at p.
    virtual Jet flow(const ModelPoint& p, double t) const = 0;
    virtual Vec3 vector_field(const ModelPoint& p) const = 0;
    /// Exact invariant splitting when the model knows it in closed form.
    virtual std::optional<SplittingFrame> exact_splitting(const ModelPoint& p) const = 0;
    /// Flow time whose map is used when the splitting has to be estimated
    /// numerically. Should be long enough to see one full return.
    virtual double splitting_time() const { return 1.0; }
    /// Reference strong directions used to center default cone fields.
    virtual Vec3 reference_unstable(const ModelPoint& p) const = 0;
    virtual Vec3 reference_stable(const ModelPoint& p) const = 0;
};

}  // namespace phlab
