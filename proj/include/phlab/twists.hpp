#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "phlab/map.hpp"
#include "phlab/profiles.hpp"
#include "phlab/suspension.hpp"

namespace phlab {

enum class TwistKind { Translation, Shear, Identity };

std::string to_string(TwistKind kind);
TwistKind parse_twist_kind(const std::string& text);

/// Loop s -> phi_s of torus maps with phi_s = id near s = 0 and s = 1.
///
/// Translation: phi_s(v) = v + beta(s) gamma. Shear: phi_s(v) = v + beta(s) N v
/// for a nilpotent N; shears only exist to exercise failing checks and are not
/// maps of the torus unless N is integral. Identity: phi_s = id.
class TwistPath {
public:
    /// Throws ZeroClass for gamma = (0, 0).
    static TwistPath translation(int a, int b, RampProfile profile = {});
    /// Throws InvalidInput unless N^2 = 0.
    static TwistPath shear(const Mat2& n, RampProfile profile = {});
    static TwistPath identity();

    TwistKind kind() const { return kind_; }
    int gamma_a() const { return a_; }
    int gamma_b() const { return b_; }
    Vec2 gamma() const { return {static_cast<double>(a_), static_cast<double>(b_)}; }
    const Mat2& shear_matrix() const { return n_; }
    const RampProfile& profile() const { return profile_; }

    /// phi_s(v), not reduced mod 1.
    Vec2 apply(double s, const Vec2& v) const;
    /// D phi_s at v.
    Mat2 differential(double s, const Vec2& v) const;
    /// d/ds phi_s(v).
    Vec2 velocity(double s, const Vec2& v) const;

    /// The loop with the class reversed (translation and identity only).
    TwistPath reversed() const;
    std::string describe() const;

private:
    TwistPath() = default;

    TwistKind kind_ = TwistKind::Identity;
    int a_ = 0;
    int b_ = 0;
    Mat2 n_ = Mat2::Zero();
    RampProfile profile_;
};

TwistPath make_twist_path(int a, int b, TwistKind kind = TwistKind::Translation, RampProfile profile = {});

struct TwistGrid {
    int s_values = 64;
    int torus = 32;
    double tol = 1e-3;
};

struct MinAngleReport {
    TwistGrid grid;
    double min_angle = 0.0;
    double argmin_s = 0.0;
    Vec2 argmin_point = Vec2::Zero();
    bool pass = false;
};

/// Minimum over the grid of the angle between D phi_s(F^u) and F^s.
MinAngleReport check_twist_transversality(const TwistPath& path, const LinearFoliations& foliations,
                                          const TwistGrid& grid = {});
MinAngleReport check_twist_transversality(const TwistPath& path, const SuspensionModel& model,
                                          const TwistGrid& grid = {});

struct GroupProbeEntry {
    int a = 0;
    int b = 0;
    MinAngleReport report;
};

struct GroupReport {
    std::vector<GroupProbeEntry> entries;
    /// Classes whose translation loop passed.
    std::vector<std::pair<int, int>> passing;
    /// F^s and F^u fail to be transverse; nothing else is meaningful.
    bool invalid_foliations = false;
    bool irrational_slopes = false;
    std::string summary;
};

/// Runs the translation-path check for every candidate class.
GroupReport twist_group_probe(const LinearFoliations& foliations, const std::vector<std::pair<int, int>>& candidates,
                              const TwistGrid& grid = {});

/// The glued twist h_eta on a model with a flow box: identity outside the box,
/// (t, v) -> (t, phi_t(v)) in straightened coordinates inside.
class DehnTwistPiece final : public MapPiece {
public:
    /// Throws UnsupportedTwist for shear paths, PreconditionViolation if eta = 0.
    DehnTwistPiece(SuspensionPtr model, TwistPath path);

    PieceKind kind() const override { return PieceKind::DehnTwist; }
    const Manifold& domain() const override { return *model_; }
    const Manifold& codomain() const override { return *model_; }
    Jet jet(const ModelPoint& p) const override;
    PiecePtr inverse() const override;
    MappingWord word() const override;
    std::string describe() const override;

    const TwistPath& path() const { return path_; }
    const SuspensionPtr& model() const { return model_; }

private:
    SuspensionPtr model_;
    TwistPath path_;
};

struct DehnTwistSpec {
    TwistPath path;
    SuspensionPtr model;
    PiecePtr piece;
    MinAngleReport transversality;
    MappingWord word;
};

/// Throws TransversalityFail if the path check fails, UnsupportedTwist for shears.
DehnTwistSpec build_dehn_twist(SuspensionPtr model, const TwistPath& path, const TwistGrid& grid = {});

}  // namespace phlab
