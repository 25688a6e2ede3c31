#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "phlab/manifold.hpp"

namespace phlab {

struct PseudoOrbit {
    std::shared_ptr<const FlowModel> model;
    std::vector<ModelPoint> points;  // p_0 .. p_K
    std::vector<double> times;       // t_0 .. t_{K-1}
    std::vector<double> defects;     // distance(Phi_{t_k}(p_k), p_{k+1})
    double delta = 0.0;
    std::uint64_t seed = 0;

    std::size_t steps() const { return times.size(); }
    double max_defect() const;
};

/// p_{k+1} = Phi_1(p_k) displaced by a uniform random vector of norm <= delta.
/// Throws PreconditionViolation unless delta <= 1e-2 and K <= 10^5.
PseudoOrbit make_pseudo_orbit(std::shared_ptr<const FlowModel> model, const ModelPoint& p0, int steps, double delta,
                              std::uint64_t seed);

struct ShadowOptions {
    int max_iterations = 50;
    double tolerance = 1e-10;
    double pivot_tolerance = 1e-13;
    int threads = 1;
};

struct ShadowResult {
    std::vector<ModelPoint> points;  // q_0 .. q_K
    std::vector<double> times;       // s_0 .. s_{K-1}
    double max_correction = 0.0;     // max_k distance(p_k, q_k)
    double max_residual = 0.0;       // max_k distance(Phi_{s_k}(q_k), q_{k+1})
    double max_time_change = 0.0;    // max_k |s_k - t_k|
    /// Residual evaluations, the first one included.
    int iterations = 0;
    std::vector<double> residual_history;
    bool success = false;
};

/// Newton iteration on G_k = Phi_{s_k}(q_k) - q_{k+1} with free endpoints and
/// the gauge <q_0 - p_0, X(p_0)> = 0. Each step takes the minimum-norm
/// correction; the normal equations are block tridiagonal and are solved by
/// block forward elimination and back substitution.
/// Throws NoConvergence, DegenerateLinearization.
ShadowResult shadow(const PseudoOrbit& pseudo, double eps_target, const ShadowOptions& options = {});

struct UniquenessReport {
    double pseudo_separation = 0.0;  // max_k distance(p^A_k, p^B_k)
    double shadow_separation = 0.0;  // max_k distance(q^A_k, q^B_k)
    bool inputs_separated = false;   // pseudo_separation >= 3 eps
    /// Shadows agree on interior indices up to an index shift and a flow-time offset.
    bool same_orbit = false;
    int shift = 0;
    double same_orbit_distance = 0.0;
    bool pass = false;
};

/// Pass iff separated inputs (>= 3 eps) have shadows at least eps apart.
UniquenessReport uniqueness_probe(const PseudoOrbit& a, const ShadowResult& shadow_a, const PseudoOrbit& b,
                                  const ShadowResult& shadow_b, double eps);

}  // namespace phlab
