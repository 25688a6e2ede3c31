#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phlab/map.hpp"
#include "phlab/parallel.hpp"

namespace phlab {

using LineField = std::function<Vec3(const ModelPoint&)>;

/// Reference line field plus an aperture; v is in C(x) iff angle(v, L(x)) <= aperture.
class ConeField {
public:
    /// Throws InvalidInput unless 0 < aperture < pi/2.
    ConeField(LineField reference, double aperture);
    /// Field sampled at finitely many points; lookups use the nearest sample.
    static ConeField sampled(std::shared_ptr<const Manifold> model, std::vector<ModelPoint> samples,
                             std::vector<Vec3> lines, double aperture);

    Vec3 axis(const ModelPoint& p) const;
    double aperture() const { return aperture_; }
    double angle(const ModelPoint& p, const Vec3& v) const;
    bool contains(const ModelPoint& p, const Vec3& v) const { return angle(p, v) <= aperture_; }
    /// `count` equally spaced unit vectors on the cone boundary.
    std::vector<Vec3> boundary(const ModelPoint& p, int count = 16) const;

private:
    LineField reference_;
    double aperture_;
};

/// Boundary directions of a cone of the given aperture around `axis`. The
/// first direction tilts within the plane of the axis and the chart axis least
/// aligned with it.
std::vector<Vec3> cone_boundary(const Vec3& axis, double aperture, int count = 16);

ConeField unstable_cone(std::shared_ptr<const FlowModel> model, double aperture = 0.2);
ConeField stable_cone(std::shared_ptr<const FlowModel> model, double aperture = 0.2);

struct SplittingOptions {
    int n_max = 200;
    double tol = 1e-12;
    int n_start = 8;
};

struct SplittingEstimate {
    SplittingFrame frame;
    int unstable_iterations = 0;
    int stable_iterations = 0;
    /// log10 of the accumulated dominance ratios for every trial length.
    std::vector<double> history;
};

/// Power iteration of frames along the orbit of p. E^uu and P_cu come from
/// pushing a generic frame forward from F^{-n}(p), E^ss and P_cs from pulling
/// one back from F^n(p); E^c = P_cs ∩ P_cu. n doubles until the accumulated
/// QR ratios certify `tol`. Throws NoConvergence.
SplittingEstimate estimate_splitting_detailed(const ComposedMap& f, const ModelPoint& p,
                                              const SplittingOptions& options = {});
SplittingFrame estimate_splitting(const ComposedMap& f, const ModelPoint& p, int n_max = 200, double tol = 1e-12);

/// Finite-time exponents over the n steps starting at p, sorted descending.
/// The QR frame is first run over `warmup` steps ending at p (default n).
/// Throws PreconditionViolation unless n >= 10.
std::array<double, 3> ftle(const ComposedMap& f, const ModelPoint& p, int n, int warmup = -1);

using SplittingProvider = std::function<SplittingFrame(const ModelPoint&)>;

/// A partially hyperbolic map as seen by h-transversality: the model it acts
/// on and its invariant splitting. The inverse map swaps the strong bundles.
class DynamicsSpec {
public:
    DynamicsSpec(std::string name, std::shared_ptr<const Manifold> model, SplittingProvider splitting);
    /// Time-t map of a flow; exact splitting when the model has one, else estimated.
    static DynamicsSpec flow_time(std::shared_ptr<const FlowModel> model, double t = 1.0,
                                  SplittingOptions options = {});

    const std::string& name() const { return name_; }
    const Manifold& model() const { return *model_; }
    bool reversed() const { return reversed_; }
    DynamicsSpec inverse() const;

    /// Splitting of this map (stable and unstable swapped for inverses).
    SplittingFrame splitting(const ModelPoint& p) const;

private:
    std::string name_;
    std::shared_ptr<const Manifold> model_;
    SplittingProvider splitting_;
    bool reversed_ = false;
};

struct TransverseOptions {
    int grid = 32;
    double tol = 1e-3;
    int threads = default_threads();
};

struct TransversalityCertificate {
    std::string f;
    std::string g;
    std::string h;
    int grid = 0;
    double tol = 0.0;
    /// min angle of Dh(E^uu_f) to E^cs_g, and of Dh^{-1}(E^ss_g) to E^cu_f.
    double min_unstable_angle = 0.0;
    double min_stable_angle = 0.0;
    ModelPoint argmin_unstable;
    ModelPoint argmin_stable;
    bool pass = false;
    /// The reversed pair (g^{-1}, f^{-1}, h^{-1}) has the two minima swapped.
    double reversed_min_unstable_angle = 0.0;
    double reversed_min_stable_angle = 0.0;
    bool reversed_pass = false;
};

/// Throws MissingSplitting if either spec has no splitting.
TransversalityCertificate check_h_transverse(const DynamicsSpec& f, const DynamicsSpec& g, const ComposedMap& h,
                                             const TransverseOptions& options = {});

/// One link f -> h -> g of a composition chain.
struct Junction {
    std::shared_ptr<const FlowModel> f;
    ComposedMap h;
    std::shared_ptr<const FlowModel> g;
    std::optional<TransversalityCertificate> certificate;
};

struct PlanOptions {
    double alpha = 1e-2;
    /// Aperture of the cones pushed across each junction.
    double aperture = 0.2;
    int grid = 8;
    int cap = 1024;
    int boundary = 16;
    int threads = default_threads();
};

struct PlanResult {
    /// Per junction: max of the unstable (g^m after h) and stable (f^{-m} after h^{-1}) requirements.
    std::vector<int> exponents;
    std::vector<int> unstable_exponents;
    std::vector<int> stable_exponents;
    std::vector<double> unstable_angles;
    std::vector<double> stable_angles;
    /// Every (m, angle) the search evaluated, per junction, unstable side.
    std::vector<std::vector<std::pair<int, double>>> probes;
};

/// Worst angle between D(g^m h)(cone around E^uu_f) and E^uu_g over the grid.
double junction_unstable_angle(const Junction& j, int m, const PlanOptions& options = {});
/// Worst angle between D(f^{-m} h^{-1})(cone around E^ss_g) and E^ss_f.
double junction_stable_angle(const Junction& j, int m, const PlanOptions& options = {});

/// Smallest exponents reaching `alpha`, by doubling then bisection.
/// Throws PreconditionViolation for missing or failing certificates, CapExceeded.
PlanResult plan_composition(const std::vector<Junction>& chain, const PlanOptions& options = {});

struct CertifyOptions {
    int grid = 32;
    int iterates = 1;
    double aperture = 0.2;
    double margin_threshold = 0.9;
    int boundary = 16;
    std::optional<ConeField> unstable;
    std::optional<ConeField> stable;
    SplittingOptions splitting;
    /// Use the model's exact splitting when F is a plain flow-time map.
    bool exact_splitting = true;
    int threads = default_threads();
};

struct Witness {
    std::string kind;
    ModelPoint point;
    Vec3 vector = Vec3::Zero();
    double value = 0.0;
};

struct PHCertificate {
    std::string map;
    std::string word;
    int grid = 0;
    int points = 0;
    int iterates = 1;
    double aperture = 0.0;
    double margin_threshold = 0.0;
    /// Worst image angular radius / aperture.
    double cone_margin_uu = 0.0;
    double cone_margin_ss = 0.0;
    double min_expansion_uu = 0.0;
    double max_contraction_ss = 0.0;
    /// Rates per iterate along the estimated splitting.
    bool gaps_evaluated = false;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double center_min = 0.0;
    double center_max = 0.0;
    bool splitting_exact = false;
    bool cones_pass = false;
    bool gaps_pass = false;
    bool pass = false;
    std::vector<Witness> witnesses;
    std::vector<std::string> failures;
};

/// Cone-field and gap certification of F on the model grid.
/// Throws SplittingEstimationFailed if the cones pass but a splitting cannot be estimated.
PHCertificate certify_ph(std::shared_ptr<const FlowModel> model, const ComposedMap& f,
                         const CertifyOptions& options = {});

}  // namespace phlab
