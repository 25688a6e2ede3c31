#include "phlab/suspension.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "phlab/errors.hpp"

namespace phlab {

namespace {

double wrap_unit(double v) {
    double w = v - std::floor(v);
    if (w >= 1.0) w -= 1.0;
    return w;
}

double wrap_half(double v) { return v - std::floor(v + 0.5); }

Vec2 eigenvector(const Mat2& a, double lambda) {
    Vec2 v = std::abs(a(0, 1)) > 0.0 ? Vec2(a(0, 1), lambda - a(0, 0)) : Vec2(lambda - a(1, 1), a(1, 0));
    v.normalize();
    if (v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0)) v = -v;
    return v;
}

}  // namespace

SuspensionModel::SuspensionModel(const Mat2i& a, ScalarFieldPtr rho, double eta, FlowOptions options)
    : a_int_(a), rho_(std::move(rho)), eta_(eta), options_(options) {
    const long det = static_cast<long>(a(0, 0)) * a(1, 1) - static_cast<long>(a(0, 1)) * a(1, 0);
    if (det != 1) fail(ErrorCode::NotUnimodular, "det A = " + std::to_string(det));
    const int trace = a(0, 0) + a(1, 1);
    if (std::abs(trace) <= 2) fail(ErrorCode::NotHyperbolic, "|trace A| = " + std::to_string(std::abs(trace)));
    if (!rho_) fail(ErrorCode::InvalidInput, "missing time change rho");
    if (!(eta >= 0.0) || !std::isfinite(eta)) fail(ErrorCode::InvalidInput, "eta must be finite and >= 0");
    if (!(options_.step > 0.0)) fail(ErrorCode::InvalidInput, "integration step must be positive");

    a_ = a.cast<double>();
    a_inv_ << a_(1, 1), -a_(0, 1), -a_(1, 0), a_(0, 0);
    const double disc = std::sqrt(static_cast<double>(trace) * trace - 4.0);
    const double l1 = 0.5 * (trace + disc);
    const double l2 = 0.5 * (trace - disc);
    lambda_u_ = std::abs(l1) > 1.0 ? l1 : l2;
    lambda_s_ = std::abs(l1) > 1.0 ? l2 : l1;
    e_u_ = eigenvector(a_, lambda_u_);
    e_s_ = eigenvector(a_, lambda_s_);

    rho_constant_ = rho_->constant();
    double lo = 1.0;
    double hi = 0.0;
    if (rho_constant_) {
        lo = hi = *rho_constant_;
    } else {
        constexpr int n = 12;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (int k = 0; k <= n; ++k) {
                    const double v = rho_->value({(i + 0.5) / n, (j + 0.5) / n, static_cast<double>(k) / n});
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }
    }
    if (!(lo > 0.0) || !(hi <= 1.0 + 1e-12)) {
        std::ostringstream os;
        os << "rho sampled in [" << lo << ", " << hi << "], must lie in (0, 1]";
        fail(ErrorCode::RhoOutOfRange, os.str());
    }
    rho_min_ = lo;
}

std::string SuspensionModel::name() const {
    std::ostringstream os;
    os << "suspension(A=[[" << a_int_(0, 0) << "," << a_int_(0, 1) << "],[" << a_int_(1, 0) << ","
       << a_int_(1, 1) << "]], rho=" << rho_->describe() << ", eta=" << eta_ << ")";
    return os.str();
}

bool SuspensionModel::valid(const ModelPoint& p) const {
    constexpr double slack = 1e-9;
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(p[i])) return false;
    }
    return p[0] >= -slack && p[0] < 1.0 + slack && p[1] >= -slack && p[1] < 1.0 + slack && p[2] >= -slack &&
           p[2] <= roof() + slack;
}

ModelPoint SuspensionModel::reduce(const ModelPoint& p) const {
    Vec2 v(p[0], p[1]);
    double s = p[2];
    const double r = roof();
    long k = static_cast<long>(std::floor(s / r));
    s -= static_cast<double>(k) * r;
    if (s >= r) {
        s -= r;
        ++k;
    }
    if (s < 0.0) {
        s += r;
        --k;
    }
    v = {wrap_unit(v[0]), wrap_unit(v[1])};
    for (; k > 0; --k) v = {wrap_unit(a_(0, 0) * v[0] + a_(0, 1) * v[1]), wrap_unit(a_(1, 0) * v[0] + a_(1, 1) * v[1])};
    for (; k < 0; ++k) {
        v = {wrap_unit(a_inv_(0, 0) * v[0] + a_inv_(0, 1) * v[1]),
             wrap_unit(a_inv_(1, 0) * v[0] + a_inv_(1, 1) * v[1])};
    }
    return {v[0], v[1], s};
}

ModelPoint SuspensionModel::displace(const ModelPoint& p, const Vec3& v) const {
    return reduce({p[0] + v[0], p[1] + v[1], p[2] + v[2]});
}

Vec2 SuspensionModel::wrap_fiber(const Vec2& v) const { return {wrap_half(v[0]), wrap_half(v[1])}; }

namespace {

// Lift index: 0 direct, +1 "to" lifted above the roof, -1 lifted below zero.
struct Lift {
    Vec3 delta;
    int which;
};

}  // namespace

static Lift best_lift(const SuspensionModel& m, const ModelPoint& from, const ModelPoint& to) {
    const Vec2 f(from[0], from[1]);
    const Vec2 t(to[0], to[1]);
    auto wrap = [](const Vec2& d) { return Vec2(d[0] - std::floor(d[0] + 0.5), d[1] - std::floor(d[1] + 0.5)); };
    Lift best{Vec3::Zero(), 0};
    const Vec2 d0 = wrap(t - f);
    best.delta = {d0[0], d0[1], to[2] - from[2]};
    // `to` near s = 0 seen from just below the roof.
    const Vec2 up = m.a_inverse() * t;
    const Vec2 d1 = wrap(up - f);
    const Vec3 c1(d1[0], d1[1], to[2] + m.roof() - from[2]);
    if (c1.norm() < best.delta.norm()) best = {c1, 1};
    const Vec2 down = m.a() * t;
    const Vec2 d2 = wrap(down - f);
    const Vec3 c2(d2[0], d2[1], to[2] - m.roof() - from[2]);
    if (c2.norm() < best.delta.norm()) best = {c2, -1};
    return best;
}

Vec3 SuspensionModel::displacement(const ModelPoint& from, const ModelPoint& to) const {
    return best_lift(*this, from, to).delta;
}

Mat3 SuspensionModel::lift_jacobian(const ModelPoint& from, const ModelPoint& to) const {
    switch (best_lift(*this, from, to).which) {
        case 1: return block_fiber(a_inv_);
        case -1: return block_fiber(a_);
        default: return Mat3::Identity();
    }
}

std::vector<ModelPoint> SuspensionModel::grid(int n) const {
    std::vector<ModelPoint> out;
    out.reserve(static_cast<std::size_t>(n) * n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                out.emplace_back((i + 0.5) / n, (j + 0.5) / n, (k + 0.5) / n * roof());
            }
        }
    }
    return out;
}

ModelPoint SuspensionModel::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double x = u(rng);
    const double y = u(rng);
    const double s = u(rng) * roof();
    return {x, y, s};
}

bool SuspensionModel::in_box(const ModelPoint& p) const {
    return eta_ > 0.0 && p[2] >= -1e-12 && p[2] <= eta_ + 1e-12;
}

double SuspensionModel::speed(const Vec3& z) const {
    if (eta_ > 0.0 && z[2] < eta_) return 1.0;
    if (rho_constant_) return *rho_constant_;
    return rho_->value({z[0], z[1], z[2] - eta_});
}

Vec3 SuspensionModel::speed_gradient(const Vec3& z) const {
    if ((eta_ > 0.0 && z[2] < eta_) || rho_constant_) return Vec3::Zero();
    return rho_->gradient({z[0], z[1], z[2] - eta_});
}

Vec3 SuspensionModel::vector_field(const ModelPoint& p) const { return {0.0, 0.0, speed(p.xyz())}; }

std::optional<SplittingFrame> SuspensionModel::exact_splitting(const ModelPoint&) const {
    // Constant time changes keep the strong bundles tangent to the fibers.
    if (!rho_constant_) return std::nullopt;
    return SplittingFrame(Vec3(e_s_[0], e_s_[1], 0.0), Vec3::UnitZ(), Vec3(e_u_[0], e_u_[1], 0.0));
}

void SuspensionModel::rk4_step(const Vec3& z, const Mat3& m, double h, double dir, Vec3& z_out,
                               Mat3& m_out) const {
    // Outer-region field evaluated by formula even past the event level, so
    // trial steps used by the event bisection see one smooth vector field.
    auto field = [&](const Vec3& p, const Mat3& mm, Vec3& dz, Mat3& dm) {
        const Vec3 q(p[0], p[1], p[2] - eta_);
        const double v = rho_->value(q);
        if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorCode::IntegrationError, "non-positive speed");
        const Vec3 g = rho_->gradient(q);
        dz = {0.0, 0.0, dir * v};
        dm.setZero();
        dm.row(2) = dir * (g.transpose() * mm);
    };
    Vec3 k1, k2, k3, k4;
    Mat3 l1, l2, l3, l4;
    field(z, m, k1, l1);
    field(z + 0.5 * h * k1, m + 0.5 * h * l1, k2, l2);
    field(z + 0.5 * h * k2, m + 0.5 * h * l2, k3, l3);
    field(z + h * k3, m + h * l3, k4, l4);
    z_out = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    m_out = m + (h / 6.0) * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
}

// Saltation across the level set {s = level}: the fiber jumps by `fiber`, and
// the s-row rescales by the ratio of speeds after / before the event.
void SuspensionModel::cross_event(State& st, double dir, bool roof_event) const {
    const bool box = eta_ > 0.0;
    double before = 0.0;
    double after = 0.0;
    Mat2 fiber = Mat2::Identity();
    Vec3& z = st.z;
    if (roof_event) {
        if (dir > 0) {
            before = speed({z[0], z[1], roof()});
            const Vec2 v = a_ * Vec2(z[0], z[1]);
            z = {wrap_unit(v[0]), wrap_unit(v[1]), 0.0};
            fiber = a_;
            after = speed(z);
        } else {
            before = speed({z[0], z[1], 0.0});
            const Vec2 v = a_inv_ * Vec2(z[0], z[1]);
            z = {wrap_unit(v[0]), wrap_unit(v[1]), roof()};
            fiber = a_inv_;
            after = speed(z);
        }
    } else {
        // Box boundary s = eta; the box side has unit speed.
        const double outer = speed({z[0], z[1], eta_});
        before = dir > 0 ? 1.0 : outer;
        after = dir > 0 ? outer : 1.0;
        z[2] = eta_;
    }
    (void)box;
    if (!(before > 0.0) || !(after > 0.0)) fail(ErrorCode::IntegrationError, "non-positive speed at event");
    st.m = block_fiber(fiber, after / before) * st.m;
}

void SuspensionModel::advance(State& st, double t) const {
    const double dir = t >= 0.0 ? 1.0 : -1.0;
    double remaining = std::abs(t);
    const bool has_box = eta_ > 0.0;
    const bool closed_form = rho_constant_ && options_.exact_if_constant;
    long events = 0;
    while (remaining > 0.0) {
        if (++events > 100000000L) fail(ErrorCode::IntegrationError, "event count overflow");
        double& s = st.z[2];
        bool in_box_region;
        double level;
        bool roof_event;
        if (dir > 0) {
            in_box_region = has_box && s < eta_;
            level = in_box_region ? eta_ : roof();
            roof_event = !in_box_region;
        } else {
            in_box_region = has_box && s <= eta_;
            level = (in_box_region || !has_box) ? 0.0 : eta_;
            roof_event = in_box_region || !has_box;
        }

        if (in_box_region || closed_form) {
            const double v = in_box_region ? 1.0 : *rho_constant_;
            const double time_to_level = std::abs(level - s) / v;
            if (remaining < time_to_level) {
                s += dir * v * remaining;
                remaining = 0.0;
                break;
            }
            s = level;
            remaining -= time_to_level;
            cross_event(st, dir, roof_event);
            continue;
        }

        const double h = std::min(options_.step, remaining);
        Vec3 z1;
        Mat3 m1;
        rk4_step(st.z, st.m, h, dir, z1, m1);
        auto crossed = [&](const Vec3& z) { return dir > 0 ? z[2] >= level : z[2] <= level; };
        if (!crossed(z1)) {
            if (!std::isfinite(z1[2])) fail(ErrorCode::IntegrationError, "non-finite state");
            st.z = z1;
            st.m = m1;
            remaining -= h;
            continue;
        }
        double lo = 0.0;
        double hi = h;
        int iter = 0;
        while (hi - lo > options_.event_tol) {
            if (++iter > 200) fail(ErrorCode::IntegrationError, "event bisection did not converge");
            const double mid = 0.5 * (lo + hi);
            Vec3 zm;
            Mat3 mm;
            rk4_step(st.z, st.m, mid, dir, zm, mm);
            if (crossed(zm)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        rk4_step(st.z, st.m, hi, dir, z1, m1);
        if (std::abs(z1[2] - level) > 1e-9) fail(ErrorCode::IntegrationError, "event located off the level set");
        st.z = z1;
        st.m = m1;
        st.z[2] = level;
        remaining -= hi;
        cross_event(st, dir, roof_event);
    }
}

Jet SuspensionModel::flow(const ModelPoint& p, double t) const {
    if (!(std::abs(t) <= 1e6)) fail(ErrorCode::PreconditionViolation, "flow time outside |t| <= 1e6");
    const ModelPoint start = reduce(p);
    State st{start.xyz(), Mat3::Identity()};
    advance(st, t);
    return {reduce({st.z[0], st.z[1], st.z[2]}), st.m};
}

SuspensionPtr make_suspension(const Mat2i& a, ScalarFieldPtr rho, double eta, FlowOptions options) {
    return std::make_shared<const SuspensionModel>(a, std::move(rho), eta, options);
}

std::shared_ptr<const CollarTimeChange> eta_time_change(double eta, double eps) {
    return std::make_shared<const CollarTimeChange>(eta, eps);
}

EtaChartPoint straighten(const SuspensionModel& model, const ModelPoint& p) {
    if (!model.in_box(p)) fail(ErrorCode::OutsideBox, "point is not in the flow box");
    const double t = std::clamp(p[2] / model.eta(), 0.0, 1.0);
    return {t, p[0], p[1]};
}

ModelPoint unstraighten(const SuspensionModel& model, const EtaChartPoint& q) {
    if (!(model.eta() > 0.0) || q.t < -1e-12 || q.t > 1.0 + 1e-12) {
        fail(ErrorCode::OutsideBox, "chart point outside [0,1] x T^2");
    }
    return {wrap_unit(q.u), wrap_unit(q.v), std::clamp(q.t, 0.0, 1.0) * model.eta()};
}

Mat3 straighten_jacobian(const SuspensionModel& model) {
    if (!(model.eta() > 0.0)) fail(ErrorCode::OutsideBox, "model has no flow box");
    Mat3 d = Mat3::Identity();
    d(2, 2) = 1.0 / model.eta();
    return d;
}

PushedBundles pushed_bundles(const SuspensionModel& model, const ModelPoint& p, const SplittingFrame& splitting) {
    if (!model.in_box(p)) fail(ErrorCode::OutsideBox, "point is not in the flow box");
    const Mat3 dh = straighten_jacobian(model);
    const Vec3 es = dh * splitting.stable();
    const Vec3 ec = dh * splitting.center();
    const Vec3 eu = dh * splitting.unstable();
    const Plane cs = transport_plane(dh, splitting.center_stable());
    const Plane cu = transport_plane(dh, splitting.center_unstable());
    const Vec3 fs(model.e_s()[0], model.e_s()[1], 0.0);
    const Vec3 fu(model.e_u()[0], model.e_u()[1], 0.0);
    const Plane horizontal_cs = Plane::spanned_by(fs, Vec3::UnitZ());
    const Plane horizontal_cu = Plane::spanned_by(fu, Vec3::UnitZ());
    return {SplittingFrame(es, ec, eu, cs, cu),       angle_between_lines(es, fs),
            angle_between_lines(eu, fu),              angle_between_planes(cs, horizontal_cs),
            angle_between_planes(cu, horizontal_cu)};
}

CollarConjugacy::CollarConjugacy(SuspensionPtr boxed, SuspensionPtr base, std::shared_ptr<const CollarTimeChange> change,
                                 bool inverse)
    : boxed_(std::move(boxed)), base_(std::move(base)), change_(std::move(change)), inverse_(inverse) {
    if (!boxed_ || !base_ || !change_) fail(ErrorCode::InvalidInput, "collar conjugacy needs both models");
    if (boxed_->matrix() != base_->matrix()) fail(ErrorCode::InvalidInput, "models use different matrices");
    const auto c = boxed_->rho().constant();
    if (!c || *c != 1.0) fail(ErrorCode::InvalidInput, "boxed model must have rho = 1");
    if (std::abs(boxed_->eta() - change_->eta()) > 1e-15 || base_->eta() != 0.0) {
        fail(ErrorCode::InvalidInput, "eta mismatch between boxed model and time change");
    }
}

Jet CollarConjugacy::forward(const ModelPoint& p0) const {
    const ModelPoint p = boxed_->reduce(p0);
    const double eps = change_->eps();
    const double eta = boxed_->eta();
    const Vec2 v(p[0], p[1]);
    double sigma;
    Vec2 w = v;
    Mat2 from = Mat2::Identity();
    if (p[2] <= eta + eps) {
        sigma = p[2];
    } else if (p[2] >= boxed_->roof() - eps) {
        sigma = p[2] - boxed_->roof();
        w = boxed_->a() * v;
        from = boxed_->a();
    } else {
        return {base_->reduce({v[0], v[1], p[2] - eta}), Mat3::Identity()};
    }
    const double tau = change_->psi(sigma);
    Mat2 to = Mat2::Identity();
    ModelPoint out;
    if (tau >= 0.0) {
        out = {w[0], w[1], tau};
    } else {
        const Vec2 u = boxed_->a_inverse() * w;
        out = {u[0], u[1], 1.0 + tau};
        to = boxed_->a_inverse();
    }
    return {base_->reduce(out), block_fiber(to * from, change_->psi_d1(sigma))};
}

Jet CollarConjugacy::backward(const ModelPoint& q0) const {
    const ModelPoint q = base_->reduce(q0);
    const double eps = change_->eps();
    const double eta = boxed_->eta();
    const Vec2 u(q[0], q[1]);
    double tau;
    Vec2 w = u;
    Mat2 from = Mat2::Identity();
    if (q[2] <= eps) {
        tau = q[2];
    } else if (q[2] >= 1.0 - eps) {
        tau = q[2] - 1.0;
        w = base_->a() * u;
        from = base_->a();
    } else {
        return {boxed_->reduce({u[0], u[1], q[2] + eta}), Mat3::Identity()};
    }
    const double sigma = change_->psi_inverse(tau);
    Mat2 to = Mat2::Identity();
    ModelPoint out;
    if (sigma >= 0.0) {
        out = {w[0], w[1], sigma};
    } else {
        const Vec2 v = boxed_->a_inverse() * w;
        out = {v[0], v[1], boxed_->roof() + sigma};
        to = boxed_->a_inverse();
    }
    return {boxed_->reduce(out), block_fiber(to * from, 1.0 / change_->psi_d1(sigma))};
}

Jet CollarConjugacy::jet(const ModelPoint& p) const { return inverse_ ? backward(p) : forward(p); }

PiecePtr CollarConjugacy::inverse() const {
    return std::make_shared<CollarConjugacy>(boxed_, base_, change_, !inverse_);
}

FiberLinearPiece::FiberLinearPiece(SuspensionPtr model, const Mat2& fiber_map) : model_(std::move(model)), map_(fiber_map) {
    if (std::abs(map_.determinant()) < 1e-12) fail(ErrorCode::SingularMap, "fiber map is singular");
}

Jet FiberLinearPiece::jet(const ModelPoint& p) const {
    const ModelPoint q = model_->reduce(p);
    const Vec2 v = map_ * Vec2(q[0], q[1]);
    return {model_->reduce({v[0], v[1], q[2]}), block_fiber(map_)};
}

PiecePtr FiberLinearPiece::inverse() const { return std::make_shared<FiberLinearPiece>(model_, map_.inverse()); }

}  // namespace phlab
