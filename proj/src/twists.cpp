#include "phlab/twists.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phlab/errors.hpp"
#include "phlab/geometry.hpp"

namespace phlab {

namespace {

double wrap_unit(double v) {
    double w = v - std::floor(v);
    return w >= 1.0 ? w - 1.0 : w;
}

double line_angle_2d(const Vec2& a, const Vec2& b) {
    return angle_between_lines({a[0], a[1], 0.0}, {b[0], b[1], 0.0});
}

// True when the slope of v is p/q with q <= 100 (within 1e-9).
bool rational_direction(const Vec2& v) {
    if (std::abs(v[0]) < 1e-12 || std::abs(v[1]) < 1e-12) return true;
    const double slope = std::abs(v[1] / v[0]);
    for (int q = 1; q <= 100; ++q) {
        if (std::abs(slope * q - std::round(slope * q)) < 1e-9 * q) return true;
    }
    return false;
}

}  // namespace

std::string to_string(TwistKind kind) {
    switch (kind) {
        case TwistKind::Translation: return "translation";
        case TwistKind::Shear: return "shear";
        case TwistKind::Identity: return "identity";
    }
    return "unknown";
}

TwistKind parse_twist_kind(const std::string& text) {
    if (text == "translation") return TwistKind::Translation;
    if (text == "shear") return TwistKind::Shear;
    if (text == "identity") return TwistKind::Identity;
    fail(ErrorCode::InvalidInput, "unknown twist kind '" + text + "'");
}

TwistPath TwistPath::translation(int a, int b, RampProfile profile) {
    if (a == 0 && b == 0) fail(ErrorCode::ZeroClass, "translation loop along (0,0) is homotopically trivial");
    TwistPath p;
    p.kind_ = TwistKind::Translation;
    p.a_ = a;
    p.b_ = b;
    p.profile_ = profile;
    return p;
}

TwistPath TwistPath::shear(const Mat2& n, RampProfile profile) {
    if ((n * n).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, n.squaredNorm())) {
        fail(ErrorCode::InvalidInput, "shear matrix must be nilpotent");
    }
    TwistPath p;
    p.kind_ = TwistKind::Shear;
    p.n_ = n;
    p.profile_ = profile;
    return p;
}

TwistPath TwistPath::identity() { return TwistPath(); }

Vec2 TwistPath::apply(double s, const Vec2& v) const {
    switch (kind_) {
        case TwistKind::Translation: return v + profile_.value(s) * gamma();
        case TwistKind::Shear: return v + profile_.value(s) * (n_ * v);
        case TwistKind::Identity: return v;
    }
    return v;
}

Mat2 TwistPath::differential(double s, const Vec2&) const {
    if (kind_ == TwistKind::Shear) return Mat2::Identity() + profile_.value(s) * n_;
    return Mat2::Identity();
}

Vec2 TwistPath::velocity(double s, const Vec2& v) const {
    switch (kind_) {
        case TwistKind::Translation: return profile_.derivative(s) * gamma();
        case TwistKind::Shear: return profile_.derivative(s) * (n_ * v);
        case TwistKind::Identity: return Vec2::Zero();
    }
    return Vec2::Zero();
}

TwistPath TwistPath::reversed() const {
    switch (kind_) {
        case TwistKind::Translation: return translation(-a_, -b_, profile_);
        case TwistKind::Identity: return identity();
        case TwistKind::Shear: fail(ErrorCode::UnsupportedTwist, "shear loops have no reversed class");
    }
    return identity();
}

std::string TwistPath::describe() const {
    std::ostringstream os;
    os << to_string(kind_);
    if (kind_ == TwistKind::Translation) os << "(" << a_ << "," << b_ << ")";
    if (kind_ != TwistKind::Identity) os << " ramp[" << profile_.start() << "," << profile_.end() << "]";
    return os.str();
}

TwistPath make_twist_path(int a, int b, TwistKind kind, RampProfile profile) {
    switch (kind) {
        case TwistKind::Translation: return TwistPath::translation(a, b, profile);
        case TwistKind::Identity: return TwistPath::identity();
        case TwistKind::Shear:
            fail(ErrorCode::InvalidInput, "shear paths are built from a nilpotent matrix, not a class");
    }
    return TwistPath::identity();
}

MinAngleReport check_twist_transversality(const TwistPath& path, const LinearFoliations& foliations,
                                          const TwistGrid& grid) {
    if (grid.s_values < 2 || grid.torus < 1) fail(ErrorCode::InvalidInput, "twist grid too small");
    MinAngleReport r;
    r.grid = grid;
    r.min_angle = std::numeric_limits<double>::infinity();
    // Translations and shears have position-independent differentials, but
    // the scan keeps the torus loop so that any future path kind is covered.
    for (int i = 0; i < grid.s_values; ++i) {
        const double s = static_cast<double>(i) / (grid.s_values - 1);
        for (int j = 0; j < grid.torus; ++j) {
            for (int k = 0; k < grid.torus; ++k) {
                const Vec2 v((j + 0.5) / grid.torus, (k + 0.5) / grid.torus);
                const Vec2 pushed = path.differential(s, v) * foliations.unstable;
                const double angle = line_angle_2d(pushed, foliations.stable);
                if (angle < r.min_angle) {
                    r.min_angle = angle;
                    r.argmin_s = s;
                    r.argmin_point = v;
                }
            }
        }
    }
    r.pass = r.min_angle >= grid.tol;
    return r;
}

MinAngleReport check_twist_transversality(const TwistPath& path, const SuspensionModel& model, const TwistGrid& grid) {
    return check_twist_transversality(path, model.foliations(), grid);
}

GroupReport twist_group_probe(const LinearFoliations& foliations, const std::vector<std::pair<int, int>>& candidates,
                              const TwistGrid& grid) {
    GroupReport out;
    if (candidates.empty()) {
        out.summary = "no candidates";
        return out;
    }
    if (line_angle_2d(foliations.unstable, foliations.stable) < grid.tol) {
        out.invalid_foliations = true;
        out.summary = "InvalidFoliations: F^s and F^u are not transverse";
        return out;
    }
    out.irrational_slopes = !rational_direction(foliations.stable) && !rational_direction(foliations.unstable);
    for (const auto& [a, b] : candidates) {
        GroupProbeEntry e{a, b, {}};
        e.report = check_twist_transversality(TwistPath::translation(a, b), foliations, grid);
        if (e.report.pass) out.passing.emplace_back(a, b);
        out.entries.push_back(e);
    }
    if (out.irrational_slopes && out.passing.size() == out.entries.size()) {
        out.summary = "full Z^2 (sampled basis (1,0),(0,1),(1,1),(1,-1))";
    } else {
        std::ostringstream os;
        os << out.passing.size() << " of " << out.entries.size() << " sampled classes pass";
        if (!out.irrational_slopes) os << "; rational slopes, circle leaves possible";
        out.summary = os.str();
    }
    return out;
}

DehnTwistPiece::DehnTwistPiece(SuspensionPtr model, TwistPath path) : model_(std::move(model)), path_(std::move(path)) {
    if (!model_) fail(ErrorCode::InvalidInput, "missing model");
    if (path_.kind() == TwistKind::Shear) fail(ErrorCode::UnsupportedTwist, "only translation twists can be glued");
    if (!(model_->eta() > 0.0)) fail(ErrorCode::PreconditionViolation, "model has no flow box");
}

Jet DehnTwistPiece::jet(const ModelPoint& p) const {
    const ModelPoint q = model_->reduce(p);
    if (!model_->in_box(q) || path_.kind() == TwistKind::Identity) return {q, Mat3::Identity()};
    const double eta = model_->eta();
    const double t = std::clamp(q[2] / eta, 0.0, 1.0);
    const Vec2 v(q[0], q[1]);
    const Vec2 w = path_.apply(t, v);
    Mat3 d = block_fiber(path_.differential(t, v));
    d.block<2, 1>(0, 2) = path_.velocity(t, v) / eta;
    return {{wrap_unit(w[0]), wrap_unit(w[1]), q[2]}, d};
}

PiecePtr DehnTwistPiece::inverse() const { return std::make_shared<DehnTwistPiece>(model_, path_.reversed()); }

MappingWord DehnTwistPiece::word() const {
    if (path_.kind() != TwistKind::Translation) return {};
    return MappingWord({TwistLetter::from_class(path_.gamma_a(), path_.gamma_b())});
}

std::string DehnTwistPiece::describe() const { return "h[" + path_.describe() + "]"; }

DehnTwistSpec build_dehn_twist(SuspensionPtr model, const TwistPath& path, const TwistGrid& grid) {
    if (!model) fail(ErrorCode::InvalidInput, "missing model");
    if (path.kind() == TwistKind::Shear) fail(ErrorCode::UnsupportedTwist, "only translation twists can be glued");
    const MinAngleReport report = check_twist_transversality(path, *model, grid);
    if (!report.pass) {
        std::ostringstream os;
        os << "min angle " << report.min_angle << " < tol " << grid.tol << " at s = " << report.argmin_s;
        fail(ErrorCode::TransversalityFail, os.str());
    }
    auto piece = std::make_shared<DehnTwistPiece>(model, path);
    return {path, std::move(model), piece, report, piece->word()};
}

}  // namespace phlab
