#pragma once

#include <memory>
#include <optional>
#include <string>

#include "phlab/map.hpp"
#include "phlab/scalar_field.hpp"

namespace phlab {

using Mat2i = Eigen::Matrix2i;

struct FlowOptions {
    /// Fixed RK4 step.
    double step = 1e-3;
    /// Event (roof / box boundary) location tolerance in time.
    double event_tol = 1e-12;
    /// Use closed-form stepping when rho is constant.
    bool exact_if_constant = true;
};

/// The two linear foliations induced on the transverse torus.
struct LinearFoliations {
    Vec2 stable;
    Vec2 unstable;
};

/// Suspension of a hyperbolic toral automorphism A, time-changed by rho, with
/// an optional flow box of length eta inserted at the fiber s = 0.
///
/// Chart: (x, y) mod 1 on the fiber and s in [0, 1 + eta). For eta > 0 the
/// slab s in [0, eta] is the flow box with unit horizontal flow, and the
/// original suspension occupies s in [eta, 1 + eta) where the speed is
/// rho(x, y, s - eta). Crossing s = 1 + eta maps (v, 1 + eta) to (A v, 0).
/// The metric is the flat product metric dx^2 + dy^2 + ds^2.
class SuspensionModel final : public FlowModel {
public:
    /// Throws NotUnimodular, NotHyperbolic, RhoOutOfRange or InvalidInput.
    SuspensionModel(const Mat2i& a, ScalarFieldPtr rho, double eta, FlowOptions options = {});

    std::string name() const override;
    bool valid(const ModelPoint& p) const override;
    ModelPoint reduce(const ModelPoint& p) const override;
    ModelPoint displace(const ModelPoint& p, const Vec3& v) const override;
    Vec3 displacement(const ModelPoint& from, const ModelPoint& to) const override;
    Mat3 lift_jacobian(const ModelPoint& from, const ModelPoint& to) const override;
    std::vector<ModelPoint> grid(int n) const override;
    ModelPoint sample(std::mt19937_64& rng) const override;

    Jet flow(const ModelPoint& p, double t) const override;
    Vec3 vector_field(const ModelPoint& p) const override;
    std::optional<SplittingFrame> exact_splitting(const ModelPoint& p) const override;
    double splitting_time() const override { return roof(); }
    Vec3 reference_unstable(const ModelPoint&) const override { return {e_u_[0], e_u_[1], 0.0}; }
    Vec3 reference_stable(const ModelPoint&) const override { return {e_s_[0], e_s_[1], 0.0}; }

    const Mat2i& matrix() const { return a_int_; }
    const Mat2& a() const { return a_; }
    const Mat2& a_inverse() const { return a_inv_; }
    /// Eigenvalues with |lambda_u| > 1 > |lambda_s|.
    double lambda_u() const { return lambda_u_; }
    double lambda_s() const { return lambda_s_; }
    const Vec2& e_u() const { return e_u_; }
    const Vec2& e_s() const { return e_s_; }
    LinearFoliations foliations() const { return {e_s_, e_u_}; }

    const ScalarField& rho() const { return *rho_; }
    const ScalarFieldPtr& rho_ptr() const { return rho_; }
    double rho_min() const { return rho_min_; }
    double eta() const { return eta_; }
    double roof() const { return 1.0 + eta_; }
    bool in_box(const ModelPoint& p) const;
    const FlowOptions& options() const { return options_; }

    /// Speed ds/dt at a chart point: 1 in the box, rho outside.
    double speed(const Vec3& xys) const;
    Vec3 speed_gradient(const Vec3& xys) const;

private:
    struct State {
        Vec3 z;
        Mat3 m;
    };

    void advance(State& st, double t) const;
    void rk4_step(const Vec3& z, const Mat3& m, double h, double dir, Vec3& z_out, Mat3& m_out) const;
    void cross_event(State& st, double dir, bool roof) const;
    Vec2 wrap_fiber(const Vec2& v) const;

    Mat2i a_int_;
    Mat2 a_, a_inv_;
    double lambda_u_, lambda_s_;
    Vec2 e_u_, e_s_;
    ScalarFieldPtr rho_;
    std::optional<double> rho_constant_;
    double rho_min_ = 1.0;
    double eta_;
    FlowOptions options_;
};

using SuspensionPtr = std::shared_ptr<const SuspensionModel>;

SuspensionPtr make_suspension(const Mat2i& a, ScalarFieldPtr rho, double eta, FlowOptions options = {});

/// rho_eta of the collar construction, as a time change of the base suspension.
std::shared_ptr<const CollarTimeChange> eta_time_change(double eta, double eps = 0.2);

/// Coordinates (t, u, v) in [0,1] x T^2 of a flow-box point.
struct EtaChartPoint {
    double t = 0.0;
    double u = 0.0;
    double v = 0.0;
};

/// Straightening chart H_eta: flow-box point X_t(p), p on the entry torus,
/// maps to (t / eta, fiber coordinates of p). Throws OutsideBox.
EtaChartPoint straighten(const SuspensionModel& model, const ModelPoint& p);
ModelPoint unstraighten(const SuspensionModel& model, const EtaChartPoint& q);
/// DH_eta in tangent coordinates ordered (du, dv, dt).
Mat3 straighten_jacobian(const SuspensionModel& model);

struct PushedBundles {
    /// Splitting directions pushed by DH_eta, (u, v, t) coordinates.
    SplittingFrame frame;
    /// Angles of the pushed strong directions to the horizontal lines {t} x F^s, {t} x F^u.
    double stable_angle;
    double unstable_angle;
    /// Angles of the pushed center planes to [0,1] x F^s and [0,1] x F^u.
    double cs_plane_angle;
    double cu_plane_angle;
};

/// Pushes a splitting at a flow-box point through the straightening chart.
PushedBundles pushed_bundles(const SuspensionModel& model, const ModelPoint& p, const SplittingFrame& splitting);

/// Conjugacy Psi from the eta-inserted model (rho = 1) to the base model
/// time-changed by rho_eta: identity away from the collar, psi x id on it.
class CollarConjugacy final : public MapPiece {
public:
    /// `boxed` must have rho = 1 and eta > 0; `base` must have eta = 0, the same
    /// matrix, and rho = rho_eta for the same eta.
    CollarConjugacy(SuspensionPtr boxed, SuspensionPtr base, std::shared_ptr<const CollarTimeChange> change,
                    bool inverse = false);

    PieceKind kind() const override { return PieceKind::Conjugacy; }
    const Manifold& domain() const override { return inverse_ ? *base_ : *boxed_; }
    const Manifold& codomain() const override { return inverse_ ? *boxed_ : *base_; }
    Jet jet(const ModelPoint& p) const override;
    PiecePtr inverse() const override;
    std::string describe() const override { return inverse_ ? "Psi^-1" : "Psi"; }

private:
    Jet forward(const ModelPoint& p) const;
    Jet backward(const ModelPoint& p) const;

    SuspensionPtr boxed_;
    SuspensionPtr base_;
    std::shared_ptr<const CollarTimeChange> change_;
    bool inverse_;
};

/// Applies a fixed linear map to the fiber, s unchanged. A test double for
/// adversarial connecting maps; it is a diffeomorphism of the chart only.
class FiberLinearPiece final : public MapPiece {
public:
    FiberLinearPiece(SuspensionPtr model, const Mat2& fiber_map);

    PieceKind kind() const override { return PieceKind::Conjugacy; }
    const Manifold& domain() const override { return *model_; }
    const Manifold& codomain() const override { return *model_; }
    Jet jet(const ModelPoint& p) const override;
    PiecePtr inverse() const override;
    std::string describe() const override { return "fiber-linear"; }

private:
    SuspensionPtr model_;
    Mat2 map_;
};

}  // namespace phlab
