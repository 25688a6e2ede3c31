#include "phlab/shadowing.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <limits>
#include <sstream>

#include "phlab/errors.hpp"
#include "phlab/parallel.hpp"

namespace phlab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double PseudoOrbit::max_defect() const {
    double m = 0.0;
    for (double d : defects) m = std::max(m, d);
    return m;
}

PseudoOrbit make_pseudo_orbit(std::shared_ptr<const FlowModel> model, const ModelPoint& p0, int steps, double delta,
                              std::uint64_t seed) {
    if (!model) fail(ErrorCode::InvalidInput, "pseudo-orbit needs a model");
    if (!(delta >= 0.0 && delta <= 1e-2)) fail(ErrorCode::PreconditionViolation, "delta must lie in [0, 1e-2]");
    if (steps < 1 || steps > 100000) fail(ErrorCode::PreconditionViolation, "steps must lie in [1, 10^5]");
    PseudoOrbit out;
    out.model = model;
    out.delta = delta;
    out.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    out.points.push_back(model->reduce(p0));
    for (int k = 0; k < steps; ++k) {
        const ModelPoint image = model->flow(out.points.back(), 1.0).point;
        Vec3 noise;
        do {
            noise = {u(rng), u(rng), u(rng)};
        } while (noise.squaredNorm() > 1.0);
        // Slightly inside the ball so that rounding in the chart keeps defects <= delta.
        const ModelPoint next = model->displace(image, noise * delta * (1.0 - 1e-9));
        out.points.push_back(next);
        out.times.push_back(1.0);
        out.defects.push_back(model->distance(image, next));
    }
    return out;
}

namespace {

struct Linearization {
    std::vector<Vec3> residual;  // G_k
    std::vector<Eigen::Matrix<double, 3, 4>> block;  // dG_k / d(q_k, s_k)
    double gauge = 0.0;
    Vec3 gauge_row = Vec3::Zero();
};

Linearization linearize(const FlowModel& model, const PseudoOrbit& pseudo, const std::vector<ModelPoint>& q,
                        const std::vector<double>& s, const Vec3& flow_dir, int threads) {
    const std::size_t k_max = s.size();
    Linearization lin;
    lin.residual.resize(k_max);
    lin.block.resize(k_max);
    struct Step {
        Vec3 g;
        Eigen::Matrix<double, 3, 4> b;
    };
    const auto steps = parallel_map<Step>(
        k_max,
        [&](std::size_t k) {
            const Jet j = model.flow(q[k], s[k]);
            const Mat3 lift = model.lift_jacobian(q[k + 1], j.point);
            Step st;
            st.g = model.displacement(q[k + 1], j.point);
            st.b.leftCols<3>() = lift * j.jacobian;
            st.b.col(3) = lift * model.vector_field(j.point);
            return st;
        },
        threads);
    for (std::size_t k = 0; k < k_max; ++k) {
        lin.residual[k] = steps[k].g;
        lin.block[k] = steps[k].b;
    }
    const Vec3 d0 = model.displacement(pseudo.points.front(), q.front());
    lin.gauge = flow_dir.dot(d0);
    lin.gauge_row = model.lift_jacobian(pseudo.points.front(), q.front()).transpose() * flow_dir;
    return lin;
}

}  // namespace

ShadowResult shadow(const PseudoOrbit& pseudo, double eps_target, const ShadowOptions& options) {
    if (!pseudo.model) fail(ErrorCode::InvalidInput, "pseudo-orbit has no model");
    const FlowModel& model = *pseudo.model;
    const std::size_t n = pseudo.steps();
    if (n == 0 || pseudo.points.size() != n + 1) fail(ErrorCode::InvalidInput, "malformed pseudo-orbit");

    std::vector<ModelPoint> q = pseudo.points;
    std::vector<double> s = pseudo.times;
    const Vec3 flow_dir = model.vector_field(pseudo.points.front()).normalized();

    ShadowResult out;
    for (int iter = 0;; ++iter) {
        const Linearization lin = linearize(model, pseudo, q, s, flow_dir, options.threads);
        double r = std::abs(lin.gauge);
        for (const Vec3& g : lin.residual) r = std::max(r, g.norm());
        out.residual_history.push_back(r);
        out.iterations = iter + 1;
        if (r < options.tolerance) break;
        if (iter >= options.max_iterations) {
            std::ostringstream os;
            os << "no convergence after " << options.max_iterations << " Newton steps; residuals:";
            for (double h : out.residual_history) os << " " << h;
            fail(ErrorCode::NoConvergence, os.str());
        }

        // Row block k: [P_k on (dq_k, ds_k), Q_k = -I on dq_{k+1}]; block 0 also
        // carries the gauge row on dq_0. Normal matrix J J^T is block tridiagonal.
        std::vector<MatrixXd> p(n), qb(n);
        std::vector<VectorXd> rhs(n);
        for (std::size_t k = 0; k < n; ++k) {
            const int rows = k == 0 ? 4 : 3;
            p[k] = MatrixXd::Zero(rows, 4);
            qb[k] = MatrixXd::Zero(rows, 3);
            rhs[k] = VectorXd::Zero(rows);
            const int off = k == 0 ? 1 : 0;
            p[k].block(off, 0, 3, 4) = lin.block[k];
            qb[k].block(off, 0, 3, 3) = -Mat3::Identity();
            rhs[k].segment(off, 3) = lin.residual[k];
            if (k == 0) {
                p[0].block(0, 0, 1, 3) = lin.gauge_row.transpose();
                rhs[0][0] = lin.gauge;
            }
        }
        std::vector<MatrixXd> diag(n), upper(n);
        for (std::size_t k = 0; k < n; ++k) {
            diag[k] = p[k] * p[k].transpose() + qb[k] * qb[k].transpose();
            if (k + 1 < n) upper[k] = qb[k] * p[k + 1].leftCols(3).transpose();
        }
        // Block Cholesky-style elimination.
        std::vector<Eigen::LLT<MatrixXd>> piv(n);
        std::vector<VectorXd> y(n);
        for (std::size_t k = 0; k < n; ++k) {
            MatrixXd d = diag[k];
            VectorXd b = rhs[k];
            if (k > 0) {
                d -= upper[k - 1].transpose() * piv[k - 1].solve(upper[k - 1]);
                b -= upper[k - 1].transpose() * piv[k - 1].solve(y[k - 1]);
            }
            piv[k].compute(d);
            const MatrixXd l = piv[k].matrixL();
            if (piv[k].info() != Eigen::Success || l.diagonal().minCoeff() < std::sqrt(options.pivot_tolerance)) {
                fail(ErrorCode::DegenerateLinearization, "block pivot below tolerance at step " + std::to_string(k));
            }
            y[k] = b;
        }
        std::vector<VectorXd> lambda(n);
        for (std::size_t k = n; k-- > 0;) {
            VectorXd b = y[k];
            if (k + 1 < n) b -= upper[k] * lambda[k + 1];
            lambda[k] = piv[k].solve(b);
        }
        // Correction = -J^T lambda.
        std::vector<Vec3> dq(n + 1, Vec3::Zero());
        std::vector<double> ds(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const VectorXd w = -p[k].transpose() * lambda[k];
            dq[k] += w.head<3>();
            ds[k] = w[3];
            dq[k + 1] += -qb[k].transpose() * lambda[k];
        }
        for (std::size_t k = 0; k <= n; ++k) q[k] = model.displace(q[k], dq[k]);
        for (std::size_t k = 0; k < n; ++k) s[k] += ds[k];
    }

    out.points = q;
    out.times = s;
    out.max_residual = out.residual_history.back();
    for (std::size_t k = 0; k <= n; ++k) out.max_correction = std::max(out.max_correction, model.distance(pseudo.points[k], q[k]));
    for (std::size_t k = 0; k < n; ++k) out.max_time_change = std::max(out.max_time_change, std::abs(s[k] - pseudo.times[k]));
    out.success = out.max_residual < options.tolerance && out.max_correction <= eps_target;
    return out;
}

UniquenessReport uniqueness_probe(const PseudoOrbit& a, const ShadowResult& shadow_a, const PseudoOrbit& b,
                                  const ShadowResult& shadow_b, double eps) {
    if (!a.model || a.model != b.model) fail(ErrorCode::InvalidInput, "probe needs two orbits of one model");
    if (a.points.size() != b.points.size() || shadow_a.points.size() != a.points.size() ||
        shadow_b.points.size() != b.points.size()) {
        fail(ErrorCode::InvalidInput, "orbits and shadows must have equal length");
    }
    if (!shadow_a.success || !shadow_b.success) fail(ErrorCode::PreconditionViolation, "both orbits must be shadowed");
    const FlowModel& model = *a.model;
    UniquenessReport r;
    const std::size_t n = a.points.size();
    for (std::size_t k = 0; k < n; ++k) {
        r.pseudo_separation = std::max(r.pseudo_separation, model.distance(a.points[k], b.points[k]));
        r.shadow_separation = std::max(r.shadow_separation, model.distance(shadow_a.points[k], shadow_b.points[k]));
    }
    r.inputs_separated = r.pseudo_separation >= 3.0 * eps;
    r.pass = !r.inputs_separated || r.shadow_separation >= eps;

    // Same-orbit test on the middle half, ignoring offsets along the flow.
    const std::size_t lo = n / 4;
    const std::size_t hi = n - n / 4;
    r.same_orbit_distance = std::numeric_limits<double>::infinity();
    for (int shift : {0, 1, -1}) {
        double worst = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            const long j = static_cast<long>(k) + shift;
            if (j < 0 || j >= static_cast<long>(n)) continue;
            const ModelPoint& qa = shadow_a.points[static_cast<std::size_t>(j)];
            const Vec3 d = model.displacement(qa, shadow_b.points[k]);
            const Vec3 x = model.vector_field(qa).normalized();
            worst = std::max(worst, (d - x.dot(d) * x).norm());
        }
        if (worst < r.same_orbit_distance) {
            r.same_orbit_distance = worst;
            r.shift = shift;
        }
    }
    r.same_orbit = r.same_orbit_distance <= 1e-8;
    return r;
}

}  // namespace phlab
