#include "phlab/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "phlab/errors.hpp"

namespace phlab {

using cplx = std::complex<double>;

Mat2 sl2_diagonal(double t) {
    Mat2 m;
    m << std::exp(0.5 * t), 0.0, 0.0, std::exp(-0.5 * t);
    return m;
}

Mat2 sl2_rotation(double theta) {
    const double phi = 0.5 * theta;
    Mat2 m;
    m << std::cos(phi), std::sin(phi), -std::sin(phi), std::cos(phi);
    return m;
}

Mat2 sl2_exp(const Vec3& v) {
    Mat2 xi;
    xi << 0.5 * v[1], v[2], v[0], -0.5 * v[1];
    // xi^2 = delta * I for traceless xi.
    const double delta = 0.25 * v[1] * v[1] + v[0] * v[2];
    double c, s;
    if (std::abs(delta) < 1e-10) {
        c = 1.0 + 0.5 * delta;
        s = 1.0 + delta / 6.0;
    } else if (delta > 0.0) {
        const double r = std::sqrt(delta);
        c = std::cosh(r);
        s = std::sinh(r) / r;
    } else {
        const double r = std::sqrt(-delta);
        c = std::cos(r);
        s = std::sin(r) / r;
    }
    return c * Mat2::Identity() + s * xi;
}

Vec3 sl2_log(const Mat2& m0) {
    const Mat2 m = m0.trace() < 0.0 ? Mat2(-m0) : m0;
    const double h = 0.5 * m.trace();
    double factor;
    if (std::abs(h - 1.0) < 1e-10) {
        factor = 1.0 - (h - 1.0) / 3.0;
    } else if (h > 1.0) {
        const double r = std::acosh(h);
        factor = r / std::sinh(r);
    } else {
        const double r = std::acos(std::max(h, -1.0));
        factor = r / std::sin(r);
    }
    const Mat2 xi = factor * (m - h * Mat2::Identity());
    return {xi(1, 0), xi(0, 0) - xi(1, 1), xi(0, 1)};
}

double cosh_distance_to_base(const Mat2& g) { return 0.5 * g.squaredNorm(); }

Mat2 canonical_sign(const Mat2& g) {
    const double tr = g.trace();
    if (tr > 0.0) return g;
    if (tr < 0.0) return -g;
    for (int i = 0; i < 4; ++i) {
        const double v = g(i / 2, i % 2);
        if (v != 0.0) return v > 0.0 ? g : Mat2(-g);
    }
    return g;
}

namespace {

cplx mobius(const Mat2& g, cplx z) { return (g(0, 0) * z + g(0, 1)) / (g(1, 0) * z + g(1, 1)); }

double cosh_dist(cplx z, cplx w) { return 1.0 + std::norm(z - w) / (2.0 * z.imag() * w.imag()); }

bool same_element(const Mat2& a, const Mat2& b) {
    return (a - b).cwiseAbs().maxCoeff() < 1e-8 || (a + b).cwiseAbs().maxCoeff() < 1e-8;
}

// Point equidistant from i, p and q, by Newton from `z`.
cplx circumcenter(cplx p, cplx q, cplx z) {
    const cplx base(0.0, 1.0);
    auto residual = [&](cplx w) {
        return Vec2(cosh_dist(w, base) - cosh_dist(w, p), cosh_dist(w, base) - cosh_dist(w, q));
    };
    for (int it = 0; it < 100; ++it) {
        const Vec2 r = residual(z);
        if (r.norm() < 1e-15) break;
        const double h = 1e-7;
        Mat2 j;
        j.col(0) = (residual(z + h) - residual(z - h)) / (2 * h);
        j.col(1) = (residual(z + cplx(0, h)) - residual(z - cplx(0, h))) / (2 * h);
        const Vec2 step = j.fullPivLu().solve(r);
        z -= cplx(step[0], step[1]);
    }
    return z;
}

}  // namespace

std::shared_ptr<const FuchsianGroup> FuchsianGroup::octagon() {
    static const std::shared_ptr<const FuchsianGroup> group = [] {
        std::shared_ptr<FuchsianGroup> g(new FuchsianGroup());
        // Regular octagon with interior angle pi/4: inradius r has
        // cosh r = cot(pi/8) = 1 + sqrt(2), and side pairings translate by 2r.
        g->translation_length_ = 2.0 * std::acosh(1.0 + std::numbers::sqrt2);
        g->domain_radius_ = std::acosh(3.0 + 2.0 * std::numbers::sqrt2);
        for (int k = 0; k < 8; ++k) {
            const Mat2 rot = sl2_rotation(k * std::numbers::pi / 4);
            g->generators_.push_back(rot * sl2_diagonal(g->translation_length_) * rot.inverse());
        }
        for (int k = 0; k < 8; ++k) g->relator_.emplace_back(k, k % 2 == 0 ? 1 : -1);

        const cplx base(0.0, 1.0);
        for (int k = 0; k < 8; ++k) {
            const cplx p = mobius(g->generators_[k], base);
            const cplx q = mobius(g->generators_[(k + 1) % 8], base);
            const cplx guess = mobius(sl2_rotation((k + 0.5) * std::numbers::pi / 4), base * std::exp(g->domain_radius_));
            g->vertices_.push_back(circumcenter(p, q, guess));
        }

        // Words of length <= 4 reach every tile around each vertex.
        const double bound = std::cosh(2.0 * g->domain_radius_) * (1.0 + 1e-9);
        std::vector<Mat2> frontier{Mat2::Identity()};
        g->neighbors_.push_back(Mat2::Identity());
        for (int len = 1; len <= 4; ++len) {
            std::vector<Mat2> next;
            for (const Mat2& w : frontier) {
                for (const Mat2& gen : g->generators_) {
                    const Mat2 m = gen * w;
                    next.push_back(m);
                    if (cosh_distance_to_base(m) > bound) continue;
                    const bool seen = std::any_of(g->neighbors_.begin(), g->neighbors_.end(),
                                                  [&](const Mat2& n) { return same_element(n, m); });
                    if (!seen) g->neighbors_.push_back(m);
                }
            }
            frontier = std::move(next);
        }
        return std::shared_ptr<const FuchsianGroup>(g);
    }();
    return group;
}

Mat2 FuchsianGroup::relator_product() const {
    Mat2 m = Mat2::Identity();
    for (const auto& [k, power] : relator_) m = m * (power > 0 ? generators_[k] : Mat2(generators_[k].inverse()));
    return m;
}

double FuchsianGroup::vertex_angle_sum() const {
    double sum = 0.0;
    const int n = static_cast<int>(vertices_.size());
    for (int k = 0; k < n; ++k) {
        const cplx w = vertices_[k];
        const cplx prev = vertices_[(k + n - 1) % n];
        const cplx next = vertices_[(k + 1) % n];
        const double ca = cosh_dist(w, prev);
        const double cb = cosh_dist(w, next);
        const double cc = cosh_dist(prev, next);
        const double sa = std::sqrt(ca * ca - 1.0);
        const double sb = std::sqrt(cb * cb - 1.0);
        sum += std::acos(std::clamp((ca * cb - cc) / (sa * sb), -1.0, 1.0));
    }
    return sum;
}

Reduction FuchsianGroup::reduce(const Mat2& g) const {
    Reduction r{g, {}};
    double current = r.element.squaredNorm();
    for (int step = 0;; ++step) {
        if (step >= 10000) fail(ErrorCode::NonTermination, "reduction exceeded 10^4 steps");
        int best = -1;
        double best_norm = current;
        for (int k = 0; k < static_cast<int>(generators_.size()); ++k) {
            const double n = (generators_[k] * r.element).squaredNorm();
            if (n < best_norm * (1.0 - 1e-13)) {
                best_norm = n;
                best = k;
            }
        }
        if (best < 0) break;
        r.element = generators_[best] * r.element;
        r.word.push_back(best);
        current = best_norm;
    }
    r.element = canonical_sign(r.element);
    return r;
}

Mat2 FuchsianGroup::word_product(const std::vector<int>& word) const {
    Mat2 m = Mat2::Identity();
    for (int k : word) m = generators_.at(k) * m;
    return m;
}

GeodesicModel::GeodesicModel(GroupPtr group) : group_(std::move(group)) {
    if (!group_) fail(ErrorCode::InvalidInput, "missing group");
}

Mat2 GeodesicModel::matrix(const ModelPoint& p) {
    Mat2 m;
    m << p[0], p[1], p[2], p[3];
    return m;
}

ModelPoint GeodesicModel::point(const Mat2& g) { return {g(0, 0), g(0, 1), g(1, 0), g(1, 1)}; }

bool GeodesicModel::valid(const ModelPoint& p) const {
    for (double v : p.c) {
        if (!std::isfinite(v)) return false;
    }
    return std::abs(matrix(p).determinant() - 1.0) <= 1e-9;
}

ModelPoint GeodesicModel::reduce(const ModelPoint& p) const {
    Mat2 g = matrix(p);
    const double det = g.determinant();
    if (!(det > 0.0)) fail(ErrorCode::DomainError, "matrix is not in SL(2,R)");
    if (std::abs(det - 1.0) > 1e-15) g /= std::sqrt(det);
    return point(group_->reduce(g).element);
}

ModelPoint GeodesicModel::displace(const ModelPoint& p, const Vec3& v) const {
    return reduce(point(matrix(p) * sl2_exp(v)));
}

Vec3 GeodesicModel::displacement(const ModelPoint& from, const ModelPoint& to) const {
    const Mat2 a_inv = matrix(from).inverse();
    const Mat2 b = matrix(to);
    Vec3 best = Vec3::Zero();
    double best_norm = std::numeric_limits<double>::infinity();
    for (const Mat2& gamma : group_->neighbors()) {
        const Mat2 m = a_inv * gamma * b;
        // Far lifts are not in the domain of the log; skip them cheaply.
        if (std::abs(m.trace()) < 1.0) continue;
        const Vec3 v = sl2_log(m);
        const double n = v.squaredNorm();
        if (n < best_norm) {
            best_norm = n;
            best = v;
        }
    }
    return best;
}

std::vector<ModelPoint> GeodesicModel::grid(int n) const {
    std::vector<ModelPoint> out;
    out.reserve(static_cast<std::size_t>(n) * n * n);
    const double r = group_->domain_radius();
    for (int i = 0; i < n; ++i) {
        const Mat2 turn = sl2_rotation(2.0 * std::numbers::pi * (i + 0.5) / n);
        for (int j = 0; j < n; ++j) {
            const Mat2 out_to = turn * sl2_diagonal(r * (j + 0.5) / n);
            for (int k = 0; k < n; ++k) {
                out.push_back(reduce(point(out_to * sl2_rotation(2.0 * std::numbers::pi * (k + 0.5) / n))));
            }
        }
    }
    return out;
}

ModelPoint GeodesicModel::sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double alpha = 2.0 * std::numbers::pi * u(rng);
    const double rho = group_->domain_radius() * u(rng);
    const double beta = 2.0 * std::numbers::pi * u(rng);
    return reduce(point(sl2_rotation(alpha) * sl2_diagonal(rho) * sl2_rotation(beta)));
}

Jet GeodesicModel::flow(const ModelPoint& p, double t) const {
    if (!(std::abs(t) <= 1000.0)) fail(ErrorCode::PreconditionViolation, "flow time outside |t| <= 1000");
    Mat2 g = matrix(reduce(p));
    const int chunks = std::max(1, static_cast<int>(std::ceil(std::abs(t))));
    const Mat2 step = sl2_diagonal(t / chunks);
    for (int i = 0; i < chunks; ++i) g = group_->reduce(g * step).element;
    Mat3 d = Mat3::Zero();
    d(0, 0) = std::exp(t);
    d(1, 1) = 1.0;
    d(2, 2) = std::exp(-t);
    return {point(g), d};
}

std::optional<SplittingFrame> GeodesicModel::exact_splitting(const ModelPoint& p) const {
    return geodesic_splitting(p);
}

ModelPoint GeodesicModel::axis_state(int k) const {
    return reduce(point(sl2_rotation(k * std::numbers::pi / 4)));
}

SplittingFrame geodesic_splitting(const ModelPoint&) {
    return SplittingFrame(Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitX());
}

}  // namespace phlab
