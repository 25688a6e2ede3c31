#include "phlab/certifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "phlab/errors.hpp"

namespace phlab {

namespace {

// QR with a positive R diagonal; returns the diagonal.
Vec3 qr_positive(const Mat3& m, Mat3& q) {
    Eigen::HouseholderQR<Mat3> qr(m);
    q = qr.householderQ();
    const Mat3 r = qr.matrixQR().triangularView<Eigen::Upper>();
    Vec3 d;
    for (int i = 0; i < 3; ++i) {
        d[i] = r(i, i);
        if (d[i] < 0.0) {
            q.col(i) = -q.col(i);
            d[i] = -d[i];
        }
    }
    return d;
}

Mat3 initial_frame(double tilt) {
    Mat3 m;
    m.col(0) = Vec3(1.0, 1.0, 1.0).normalized();
    m.col(1) = Vec3(1.0, -1.0, 0.0).normalized();
    m.col(2) = Vec3(1.0, 1.0, -2.0).normalized();
    if (tilt != 0.0) {
        const Eigen::AngleAxisd rot(tilt, Vec3(0.3, -0.7, 0.5).normalized());
        m = rot.toRotationMatrix() * m;
    }
    return m;
}

Vec3 orient(Vec3 v) {
    int k = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(v[i]) > std::abs(v[k])) k = i;
    }
    return v[k] < 0.0 ? Vec3(-v) : v;
}

struct Pass {
    Mat3 q;
    double log_ratio_12 = 0.0;
    double log_ratio_23 = 0.0;
};

// Pushes `start` through the matrices in order, re-orthonormalizing.
Pass push_frame(const std::vector<Mat3>& mats, const Mat3& start) {
    Pass out{start};
    for (const Mat3& m : mats) {
        Mat3 q;
        const Vec3 d = qr_positive(m * out.q, q);
        if (!(d[0] > 0.0 && d[1] > 0.0 && d[2] > 0.0)) fail(ErrorCode::SingularMap, "degenerate frame push");
        out.q = q;
        out.log_ratio_12 += std::log(d[1] / d[0]);
        out.log_ratio_23 += std::log(d[2] / d[1]);
    }
    return out;
}

std::vector<Vec3> cone_test_vectors(const Vec3& axis, double aperture, int count) {
    std::vector<Vec3> v = cone_boundary(axis, aperture, count);
    v.push_back(axis.normalized());
    return v;
}

bool only_flow_pieces(const ComposedMap& f) {
    for (const auto& piece : f.pieces()) {
        if (piece->kind() != PieceKind::FlowTime && piece->kind() != PieceKind::Identity) return false;
    }
    return true;
}

}  // namespace

ConeField::ConeField(LineField reference, double aperture) : reference_(std::move(reference)), aperture_(aperture) {
    if (!reference_) fail(ErrorCode::InvalidInput, "cone field needs a reference line field");
    if (!(aperture > 0.0 && aperture < std::numbers::pi / 2)) {
        fail(ErrorCode::InvalidInput, "cone aperture must lie in (0, pi/2)");
    }
}

ConeField ConeField::sampled(std::shared_ptr<const Manifold> model, std::vector<ModelPoint> samples,
                             std::vector<Vec3> lines, double aperture) {
    if (!model || samples.empty() || samples.size() != lines.size()) {
        fail(ErrorCode::InvalidInput, "sampled cone field needs matching samples and lines");
    }
    for (auto& l : lines) {
        if (!(l.norm() > 0.0)) fail(ErrorCode::ZeroVector, "zero reference line");
        l.normalize();
    }
    auto field = [model, samples = std::move(samples), lines = std::move(lines)](const ModelPoint& p) {
        std::size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double d = model->distance(p, samples[i]);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        return lines[best];
    };
    return ConeField(field, aperture);
}

Vec3 ConeField::axis(const ModelPoint& p) const {
    const Vec3 a = reference_(p);
    const double n = a.norm();
    if (!(n > 0.0)) fail(ErrorCode::ZeroVector, "reference line vanishes");
    return a / n;
}

double ConeField::angle(const ModelPoint& p, const Vec3& v) const { return angle_between_lines(v, axis(p)); }

std::vector<Vec3> ConeField::boundary(const ModelPoint& p, int count) const {
    return cone_boundary(axis(p), aperture_, count);
}

std::vector<Vec3> cone_boundary(const Vec3& axis, double aperture, int count) {
    const Vec3 a = axis.normalized();
    int k = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(a[i]) < std::abs(a[k])) k = i;
    }
    const Vec3 b1 = a.cross(Vec3::Unit(k)).normalized();
    const Vec3 b2 = a.cross(b1);
    std::vector<Vec3> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / count;
        out.push_back(std::cos(aperture) * a + std::sin(aperture) * (std::cos(phi) * b2 + std::sin(phi) * b1));
    }
    return out;
}

ConeField unstable_cone(std::shared_ptr<const FlowModel> model, double aperture) {
    return ConeField([model](const ModelPoint& p) { return model->reference_unstable(p); }, aperture);
}

ConeField stable_cone(std::shared_ptr<const FlowModel> model, double aperture) {
    return ConeField([model](const ModelPoint& p) { return model->reference_stable(p); }, aperture);
}

SplittingEstimate estimate_splitting_detailed(const ComposedMap& f, const ModelPoint& p,
                                              const SplittingOptions& options) {
    if (options.n_max < 1 || !(options.tol > 0.0)) fail(ErrorCode::InvalidInput, "bad splitting options");
    const ComposedMap inv = f.inverse();
    const double target = std::log(options.tol);

    // Jacobians of F along the backward and forward orbits, extended on demand.
    std::vector<Mat3> back;   // back[k] = DF at F^{-(k+1)}(p)
    std::vector<Mat3> ahead;  // ahead[k] = DF^{-1} at F^{k+1}(p), i.e. inverse of DF at F^k(p)
    ModelPoint back_point = f.pieces().empty() ? p : f.pieces().front()->domain().reduce(p);
    ModelPoint ahead_point = back_point;
    auto extend = [&](int n) {
        while (static_cast<int>(back.size()) < n) {
            const Jet j = inv.jet(back_point);
            back.push_back(j.jacobian.inverse());
            back_point = j.point;
        }
        while (static_cast<int>(ahead.size()) < n) {
            const Jet j = f.jet(ahead_point);
            ahead.push_back(j.jacobian.inverse());
            ahead_point = j.point;
        }
    };

    SplittingEstimate est{SplittingFrame(Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()), 0, 0, {}};
    for (double tilt : {0.0, 1e-3}) {
        const Mat3 start = initial_frame(tilt);
        bool u_done = false;
        bool s_done = false;
        Pass up, down;
        int n = std::min(options.n_start, options.n_max);
        for (;;) {
            extend(n);
            if (!u_done) {
                // Oldest point first: back[n-1] acts first.
                std::vector<Mat3> mats(back.rbegin() + (static_cast<long>(back.size()) - n), back.rend());
                up = push_frame(mats, start);
                u_done = up.log_ratio_12 <= target && up.log_ratio_23 <= target;
                est.unstable_iterations = n;
            }
            if (!s_done) {
                std::vector<Mat3> mats(ahead.rbegin() + (static_cast<long>(ahead.size()) - n), ahead.rend());
                down = push_frame(mats, start);
                s_done = down.log_ratio_12 <= target && down.log_ratio_23 <= target;
                est.stable_iterations = n;
            }
            est.history.push_back(std::max({up.log_ratio_12, up.log_ratio_23, down.log_ratio_12,
                                             down.log_ratio_23}) / std::log(10.0));
            if ((u_done && s_done) || n >= options.n_max) break;
            n = std::min(2 * n, options.n_max);
        }
        if (!u_done || !s_done) continue;
        const Vec3 e_u = orient(up.q.col(0));
        const Vec3 e_s = orient(down.q.col(0));
        const Vec3 n_cu = up.q.col(2);
        const Vec3 n_cs = down.q.col(2);
        const Vec3 c = n_cs.cross(n_cu);
        if (c.norm() < 1e-8) continue;
        try {
            est.frame = SplittingFrame(e_s, orient(c.normalized()), e_u, Plane(n_cs), Plane(n_cu));
        } catch (const Error&) {
            continue;
        }
        return est;
    }
    std::ostringstream os;
    os << "splitting did not converge at n_max = " << options.n_max << "; log10 dominance history:";
    for (double h : est.history) os << " " << h;
    fail(ErrorCode::NoConvergence, os.str());
}

SplittingFrame estimate_splitting(const ComposedMap& f, const ModelPoint& p, int n_max, double tol) {
    SplittingOptions o;
    o.n_max = n_max;
    o.tol = tol;
    return estimate_splitting_detailed(f, p, o).frame;
}

std::array<double, 3> ftle(const ComposedMap& f, const ModelPoint& p, int n, int warmup) {
    if (n < 10) fail(ErrorCode::PreconditionViolation, "ftle needs n >= 10");
    if (warmup < 0) warmup = n;
    // The warm-up aligns the frame with the backward Lyapunov directions at p;
    // without it the exponents carry an O(1/n) bias from the initial frame.
    const ComposedMap inv = f.inverse();
    ModelPoint x = f.pieces().front()->domain().reduce(p);
    for (int k = 0; k < warmup; ++k) x = inv.apply(x);
    Mat3 q = Mat3::Identity();
    Vec3 sums = Vec3::Zero();
    for (int k = 0; k < warmup + n; ++k) {
        const Jet j = f.jet(x);
        Mat3 next;
        const Vec3 d = qr_positive(j.jacobian * q, next);
        if (k >= warmup) sums += d.array().log().matrix();
        q = next;
        x = j.point;
    }
    std::array<double, 3> out{sums[0] / n, sums[1] / n, sums[2] / n};
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

DynamicsSpec::DynamicsSpec(std::string name, std::shared_ptr<const Manifold> model, SplittingProvider splitting)
    : name_(std::move(name)), model_(std::move(model)), splitting_(std::move(splitting)) {
    if (!model_) fail(ErrorCode::InvalidInput, "dynamics spec needs a model");
}

DynamicsSpec DynamicsSpec::flow_time(std::shared_ptr<const FlowModel> model, double t, SplittingOptions options) {
    if (!model) fail(ErrorCode::InvalidInput, "dynamics spec needs a model");
    const ComposedMap map{std::make_shared<FlowTimePiece>(model, model->splitting_time())};
    std::ostringstream os;
    os << "flow(" << t << ") on " << model->name();
    auto provider = [model, map, options](const ModelPoint& p) {
        if (auto exact = model->exact_splitting(p)) return *exact;
        return estimate_splitting_detailed(map, p, options).frame;
    };
    return DynamicsSpec(os.str(), model, provider);
}

DynamicsSpec DynamicsSpec::inverse() const {
    DynamicsSpec out = *this;
    out.reversed_ = !reversed_;
    out.name_ = reversed_ && name_.ends_with("^-1") ? name_.substr(0, name_.size() - 3) : name_ + "^-1";
    return out;
}

SplittingFrame DynamicsSpec::splitting(const ModelPoint& p) const {
    if (!splitting_) fail(ErrorCode::MissingSplitting, "no splitting for " + name_);
    const SplittingFrame s = splitting_(p);
    if (!reversed_) return s;
    return SplittingFrame(s.unstable(), s.center(), s.stable(), s.center_unstable(), s.center_stable());
}

TransversalityCertificate check_h_transverse(const DynamicsSpec& f, const DynamicsSpec& g, const ComposedMap& h,
                                             const TransverseOptions& options) {
    if (h.empty()) fail(ErrorCode::InvalidInput, "connecting map has no pieces");
    if (&h.pieces().front()->domain() != &f.model() || &h.pieces().back()->codomain() != &g.model()) {
        fail(ErrorCode::DomainError, "connecting map does not go from f's model to g's model");
    }
    TransversalityCertificate c;
    c.f = f.name();
    c.g = g.name();
    c.h = h.describe();
    c.grid = options.grid;
    c.tol = options.tol;

    struct Sample {
        double angle;
        ModelPoint p;
    };
    const ComposedMap h_inv = h.inverse();
    const auto f_grid = f.model().grid(options.grid);
    const auto forward = parallel_map<Sample>(
        f_grid.size(),
        [&](std::size_t i) {
            const ModelPoint& p = f_grid[i];
            const Jet j = h.jet(p);
            const Vec3 pushed = j.jacobian * f.splitting(p).unstable();
            return Sample{angle_line_plane(pushed, g.splitting(j.point).center_stable()), p};
        },
        options.threads);
    const auto g_grid = g.model().grid(options.grid);
    const auto backward = parallel_map<Sample>(
        g_grid.size(),
        [&](std::size_t i) {
            const ModelPoint& q = g_grid[i];
            const Jet j = h_inv.jet(q);
            const Vec3 pulled = j.jacobian * g.splitting(q).stable();
            return Sample{angle_line_plane(pulled, f.splitting(j.point).center_unstable()), q};
        },
        options.threads);

    c.min_unstable_angle = std::numeric_limits<double>::infinity();
    c.min_stable_angle = std::numeric_limits<double>::infinity();
    for (const Sample& s : forward) {
        if (s.angle < c.min_unstable_angle) {
            c.min_unstable_angle = s.angle;
            c.argmin_unstable = s.p;
        }
    }
    for (const Sample& s : backward) {
        if (s.angle < c.min_stable_angle) {
            c.min_stable_angle = s.angle;
            c.argmin_stable = s.p;
        }
    }
    c.pass = c.min_unstable_angle >= options.tol && c.min_stable_angle >= options.tol;
    c.reversed_min_unstable_angle = c.min_stable_angle;
    c.reversed_min_stable_angle = c.min_unstable_angle;
    c.reversed_pass = c.pass;
    return c;
}

namespace {

SplittingFrame frame_of(const FlowModel& model, const ModelPoint& p) {
    if (auto exact = model.exact_splitting(p)) return *exact;
    const ComposedMap one{std::make_shared<FlowTimePiece>(
        std::shared_ptr<const FlowModel>(std::shared_ptr<const FlowModel>{}, &model), model.splitting_time())};
    return estimate_splitting(one, p);
}

double max_angle(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, x);
    return m;
}

}  // namespace

double junction_unstable_angle(const Junction& j, int m, const PlanOptions& options) {
    const ComposedMap push = j.h.then(std::make_shared<FlowTimePiece>(j.g, static_cast<double>(m)));
    const auto grid = j.f->grid(options.grid);
    const auto worst = parallel_map<double>(
        grid.size(),
        [&](std::size_t i) {
            const Jet jet = push.jet(grid[i]);
            const Vec3 target = frame_of(*j.g, jet.point).unstable();
            double w = 0.0;
            for (const Vec3& v : cone_test_vectors(frame_of(*j.f, grid[i]).unstable(), options.aperture,
                                                   options.boundary)) {
                w = std::max(w, angle_between_lines(jet.jacobian * v, target));
            }
            return w;
        },
        options.threads);
    return max_angle(worst);
}

double junction_stable_angle(const Junction& j, int m, const PlanOptions& options) {
    const ComposedMap pull = j.h.inverse().then(std::make_shared<FlowTimePiece>(j.f, -static_cast<double>(m)));
    const auto grid = j.g->grid(options.grid);
    const auto worst = parallel_map<double>(
        grid.size(),
        [&](std::size_t i) {
            const Jet jet = pull.jet(grid[i]);
            const Vec3 target = frame_of(*j.f, jet.point).stable();
            double w = 0.0;
            for (const Vec3& v : cone_test_vectors(frame_of(*j.g, grid[i]).stable(), options.aperture,
                                                   options.boundary)) {
                w = std::max(w, angle_between_lines(jet.jacobian * v, target));
            }
            return w;
        },
        options.threads);
    return max_angle(worst);
}

namespace {

// Smallest m in [1, cap] with angle(m) <= alpha, assuming angle is non-increasing.
int search_exponent(const std::function<double(int)>& angle, double alpha, int cap, double& achieved,
                    std::vector<std::pair<int, double>>* probes) {
    auto eval = [&](int m) {
        const double a = angle(m);
        if (probes) probes->emplace_back(m, a);
        return a;
    };
    int lo = 0;  // known failing (0 means "none yet")
    int hi = 1;
    double a_hi = eval(1);
    while (a_hi > alpha) {
        if (hi >= cap) {
            std::ostringstream os;
            os << "no exponent m <= " << cap << " reaches angle " << alpha << " (best " << a_hi << ")";
            fail(ErrorCode::CapExceeded, os.str());
        }
        lo = hi;
        hi = std::min(2 * hi, cap);
        a_hi = eval(hi);
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        const double a = eval(mid);
        if (a <= alpha) {
            hi = mid;
            a_hi = a;
        } else {
            lo = mid;
        }
    }
    achieved = a_hi;
    return hi;
}

}  // namespace

PlanResult plan_composition(const std::vector<Junction>& chain, const PlanOptions& options) {
    if (!(options.alpha > 0.0) || options.cap < 1) fail(ErrorCode::InvalidInput, "bad planner options");
    PlanResult out;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const Junction& j = chain[i];
        if (!j.f || !j.g) fail(ErrorCode::InvalidInput, "junction is missing a model");
        if (!j.certificate) {
            fail(ErrorCode::PreconditionViolation, "junction " + std::to_string(i) + " has no h-transversality certificate");
        }
        if (!j.certificate->pass) {
            fail(ErrorCode::PreconditionViolation, "junction " + std::to_string(i) + " is not certified h-transverse");
        }
        double au = 0.0;
        double as = 0.0;
        std::vector<std::pair<int, double>> probes;
        const int mu = search_exponent([&](int m) { return junction_unstable_angle(j, m, options); }, options.alpha,
                                       options.cap, au, &probes);
        const int ms = search_exponent([&](int m) { return junction_stable_angle(j, m, options); }, options.alpha,
                                       options.cap, as, nullptr);
        out.unstable_exponents.push_back(mu);
        out.stable_exponents.push_back(ms);
        out.exponents.push_back(std::max(mu, ms));
        out.unstable_angles.push_back(au);
        out.stable_angles.push_back(as);
        out.probes.push_back(std::move(probes));
    }
    return out;
}

PHCertificate certify_ph(std::shared_ptr<const FlowModel> model, const ComposedMap& f, const CertifyOptions& options) {
    if (!model) fail(ErrorCode::InvalidInput, "certify_ph needs a model");
    if (f.empty()) fail(ErrorCode::InvalidInput, "empty map");
    if (options.iterates < 1 || options.grid < 1 || options.boundary < 1) {
        fail(ErrorCode::InvalidInput, "bad certification options");
    }
    const ConeField cu = options.unstable ? *options.unstable : unstable_cone(model, options.aperture);
    const ConeField cs = options.stable ? *options.stable : stable_cone(model, options.aperture);
    const ComposedMap fl = f.power(options.iterates);
    const ComposedMap fl_inv = fl.inverse();
    const double inv_l = 1.0 / options.iterates;

    PHCertificate c;
    c.map = f.describe();
    c.word = f.word().reduced().to_string();
    c.grid = options.grid;
    c.iterates = options.iterates;
    c.aperture = cu.aperture();
    c.margin_threshold = options.margin_threshold;

    struct ConeSample {
        double margin_u = 0.0, expansion = std::numeric_limits<double>::infinity();
        double margin_s = 0.0, contraction = 0.0;
        Vec3 worst_u = Vec3::Zero(), worst_s = Vec3::Zero();
    };
    const auto grid = model->grid(options.grid);
    c.points = static_cast<int>(grid.size());
    const auto cones = parallel_map<ConeSample>(
        grid.size(),
        [&](std::size_t i) {
            const ModelPoint& p = grid[i];
            ConeSample s;
            const Jet fwd = fl.jet(p);
            const Vec3 axis_u = cu.axis(fwd.point);
            for (const Vec3& v : cone_test_vectors(cu.axis(p), cu.aperture(), options.boundary)) {
                const Vec3 w = fwd.jacobian * v;
                const double m = angle_between_lines(w, axis_u) / cu.aperture();
                if (m > s.margin_u) {
                    s.margin_u = m;
                    s.worst_u = v;
                }
                s.expansion = std::min(s.expansion, std::pow(w.norm(), inv_l));
            }
            // Stable cone at p is the image of a cone at F^{-l}(p); test through the inverse.
            const Jet bwd = fl_inv.jet(p);
            const Vec3 axis_s = cs.axis(bwd.point);
            for (const Vec3& v : cone_test_vectors(cs.axis(p), cs.aperture(), options.boundary)) {
                const Vec3 w = bwd.jacobian * v;
                const double m = angle_between_lines(w, axis_s) / cs.aperture();
                if (m > s.margin_s) {
                    s.margin_s = m;
                    s.worst_s = v;
                }
                s.contraction = std::max(s.contraction, std::pow(1.0 / w.norm(), inv_l));
            }
            return s;
        },
        options.threads);

    c.min_expansion_uu = std::numeric_limits<double>::infinity();
    std::size_t wu = 0, ws = 0, we = 0, wc = 0;
    for (std::size_t i = 0; i < cones.size(); ++i) {
        const ConeSample& s = cones[i];
        if (s.margin_u > c.cone_margin_uu) c.cone_margin_uu = s.margin_u, wu = i;
        if (s.margin_s > c.cone_margin_ss) c.cone_margin_ss = s.margin_s, ws = i;
        if (s.expansion < c.min_expansion_uu) c.min_expansion_uu = s.expansion, we = i;
        if (s.contraction > c.max_contraction_ss) c.max_contraction_ss = s.contraction, wc = i;
    }
    c.witnesses.push_back({"worst-unstable-cone", grid[wu], cones[wu].worst_u, c.cone_margin_uu});
    c.witnesses.push_back({"worst-stable-cone", grid[ws], cones[ws].worst_s, c.cone_margin_ss});
    c.witnesses.push_back({"min-expansion", grid[we], Vec3::Zero(), c.min_expansion_uu});
    c.witnesses.push_back({"max-contraction", grid[wc], Vec3::Zero(), c.max_contraction_ss});

    auto note = [&](const std::string& msg) { c.failures.push_back(msg); };
    if (c.cone_margin_uu > options.margin_threshold) {
        c.witnesses.push_back({"cone-escape-unstable", grid[wu], cones[wu].worst_u, c.cone_margin_uu});
        note("unstable cone escape");
    }
    if (c.cone_margin_ss > options.margin_threshold) {
        c.witnesses.push_back({"cone-escape-stable", grid[ws], cones[ws].worst_s, c.cone_margin_ss});
        note("stable cone escape");
    }
    if (!(c.min_expansion_uu > 1.0)) note("no expansion on the unstable cone");
    if (!(c.max_contraction_ss < 1.0)) note("no contraction on the stable cone");
    c.cones_pass = c.failures.empty();
    if (!c.cones_pass) return c;

    // Rates along the splitting.
    c.splitting_exact = options.exact_splitting && only_flow_pieces(f) && model->exact_splitting(grid.front());
    struct Rates {
        double s, c, u;
    };
    const auto rates = parallel_map<Rates>(
        grid.size(),
        [&](std::size_t i) {
            const ModelPoint& p = grid[i];
            SplittingFrame frame = SplittingFrame(Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ());
            if (c.splitting_exact) {
                frame = *model->exact_splitting(p);
            } else {
                try {
                    frame = estimate_splitting_detailed(f, p, options.splitting).frame;
                } catch (const Error& e) {
                    fail(ErrorCode::SplittingEstimationFailed, e.what());
                }
            }
            const Mat3 d = fl.jet(p).jacobian;
            return Rates{std::pow((d * frame.stable()).norm(), inv_l), std::pow((d * frame.center()).norm(), inv_l),
                         std::pow((d * frame.unstable()).norm(), inv_l)};
        },
        options.threads);
    c.gaps_evaluated = true;
    c.lambda1 = 0.0;
    c.lambda2 = std::numeric_limits<double>::infinity();
    c.center_min = std::numeric_limits<double>::infinity();
    c.center_max = 0.0;
    for (const Rates& r : rates) {
        c.lambda1 = std::max(c.lambda1, r.s);
        c.lambda2 = std::min(c.lambda2, r.u);
        c.center_min = std::min(c.center_min, r.c);
        c.center_max = std::max(c.center_max, r.c);
    }
    if (!(c.lambda1 < 1.0 && 1.0 < c.lambda2)) note("absolute gap lambda1 < 1 < lambda2 fails");
    if (!(c.lambda1 < c.center_min && c.center_max < c.lambda2)) note("center rates not between lambda1 and lambda2");
    c.gaps_pass = c.failures.empty();
    c.pass = c.cones_pass && c.gaps_pass;
    return c;
}

}  // namespace phlab
