#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "phlab/manifold.hpp"

namespace phlab {

/// a_t = diag(e^{t/2}, e^{-t/2}).
Mat2 sl2_diagonal(double t);
/// Elliptic rotation fixing i in the upper half-plane by angle theta.
Mat2 sl2_rotation(double theta);
/// exp of v1 E^- + v2 X + v3 E^+, with E^+ = [[0,1],[0,0]], E^- = [[0,0],[1,0]], X = diag(1,-1)/2.
Mat2 sl2_exp(const Vec3& v);
/// Inverse of sl2_exp near the identity, for the representative of ±m with non-negative trace.
Vec3 sl2_log(const Mat2& m);
/// cosh of the hyperbolic distance from g·i to i.
double cosh_distance_to_base(const Mat2& g);
/// Canonical sign: trace >= 0, ties broken by the first non-zero entry being positive.
Mat2 canonical_sign(const Mat2& g);

struct Reduction {
    Mat2 element;
    /// Generator indices in the order they were left-multiplied.
    std::vector<int> word;
};

/// Cocompact Fuchsian group of the regular octagon with angle pi/4: genus 2.
class FuchsianGroup {
public:
    /// Generator k translates by L along the geodesic through i at angle k pi/4,
    /// with cosh(L/2) = 1 + sqrt(2); generator k + 4 is the inverse of k.
    static std::shared_ptr<const FuchsianGroup> octagon();

    const std::vector<Mat2>& generators() const { return generators_; }
    /// Relator as (generator, power) pairs; the product is ±identity.
    const std::vector<std::pair<int, int>>& relator() const { return relator_; }
    Mat2 relator_product() const;
    double translation_length() const { return translation_length_; }
    /// Circumradius of the octagon; reduced base points lie within it.
    double domain_radius() const { return domain_radius_; }
    /// Octagon vertices in the upper half-plane, derived from the generators as
    /// points equidistant from i and two adjacent translates.
    const std::vector<std::complex<double>>& vertices() const { return vertices_; }
    /// Sum of the interior angles of the octagon; one vertex cycle, so 2 pi.
    double vertex_angle_sum() const;

    /// Greedy Dirichlet reduction: left-multiply by generators while d(g·i, i) strictly drops.
    /// Throws NonTermination after 10^4 steps.
    Reduction reduce(const Mat2& g) const;
    /// Product of generators listed in `word` (left-multiplied in order).
    Mat2 word_product(const std::vector<int>& word) const;

    /// Deck elements whose tiles meet the fundamental octagon (identity included).
    const std::vector<Mat2>& neighbors() const { return neighbors_; }

private:
    FuchsianGroup() = default;

    std::vector<Mat2> generators_;
    std::vector<std::pair<int, int>> relator_;
    std::vector<Mat2> neighbors_;
    std::vector<std::complex<double>> vertices_;
    double translation_length_ = 0.0;
    double domain_radius_ = 0.0;
};

using GroupPtr = std::shared_ptr<const FuchsianGroup>;

inline GroupPtr octagon_group() { return FuchsianGroup::octagon(); }

/// Geodesic flow on T^1 S = Gamma \ PSL(2,R), g -> g a_t, with the
/// left-trivialized frame (E^-, X, E^+) as tangent coordinates. ModelPoint
/// holds the matrix entries (a, b, c, d).
class GeodesicModel final : public FlowModel {
public:
    explicit GeodesicModel(GroupPtr group = octagon_group());

    std::string name() const override { return "geodesic(octagon, genus 2)"; }
    bool valid(const ModelPoint& p) const override;
    ModelPoint reduce(const ModelPoint& p) const override;
    ModelPoint displace(const ModelPoint& p, const Vec3& v) const override;
    Vec3 displacement(const ModelPoint& from, const ModelPoint& to) const override;
    std::vector<ModelPoint> grid(int n) const override;
    ModelPoint sample(std::mt19937_64& rng) const override;

    /// Throws PreconditionViolation for |t| > 1000.
    Jet flow(const ModelPoint& p, double t) const override;
    Vec3 vector_field(const ModelPoint&) const override { return Vec3::UnitY(); }
    std::optional<SplittingFrame> exact_splitting(const ModelPoint& p) const override;
    Vec3 reference_unstable(const ModelPoint&) const override { return Vec3::UnitX(); }
    Vec3 reference_stable(const ModelPoint&) const override { return Vec3::UnitZ(); }

    const FuchsianGroup& group() const { return *group_; }
    /// State whose orbit is the closed geodesic along the axis of generator k.
    ModelPoint axis_state(int k) const;

    static Mat2 matrix(const ModelPoint& p);
    static ModelPoint point(const Mat2& g);

private:
    GroupPtr group_;
};

/// The exact splitting (E^+, X, E^-) labelled (stable, center, unstable).
SplittingFrame geodesic_splitting(const ModelPoint& p);

}  // namespace phlab
