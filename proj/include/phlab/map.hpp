#pragma once

#include <memory>
#include <string>
#include <vector>

#include "phlab/manifold.hpp"
#include "phlab/mapping_word.hpp"

namespace phlab {

enum class PieceKind { FlowTime, DehnTwist, Conjugacy, Identity };

std::string to_string(PieceKind kind);

/// Differential at `source`, landing at `target`.
struct LinearMap3 {
    Mat3 matrix = Mat3::Identity();
    ModelPoint source;
    ModelPoint target;
};

/// An elementary diffeomorphism between two chart models.
class MapPiece {
public:
    virtual ~MapPiece() = default;

    virtual PieceKind kind() const = 0;
    virtual const Manifold& domain() const = 0;
    virtual const Manifold& codomain() const = 0;
    /// Image point (reduced) together with the differential.
    virtual Jet jet(const ModelPoint& p) const = 0;
    virtual ModelPoint apply(const ModelPoint& p) const { return jet(p).point; }
    virtual std::shared_ptr<const MapPiece> inverse() const = 0;
    virtual MappingWord word() const { return {}; }
    virtual std::string describe() const = 0;
};

using PiecePtr = std::shared_ptr<const MapPiece>;

class IdentityPiece final : public MapPiece {
public:
    explicit IdentityPiece(std::shared_ptr<const Manifold> model) : model_(std::move(model)) {}

    PieceKind kind() const override { return PieceKind::Identity; }
    const Manifold& domain() const override { return *model_; }
    const Manifold& codomain() const override { return *model_; }
    Jet jet(const ModelPoint& p) const override { return {model_->reduce(p), Mat3::Identity()}; }
    PiecePtr inverse() const override { return std::make_shared<IdentityPiece>(model_); }
    std::string describe() const override { return "id"; }

private:
    std::shared_ptr<const Manifold> model_;
};

/// Time-t map of a model flow.
class FlowTimePiece final : public MapPiece {
public:
    FlowTimePiece(std::shared_ptr<const FlowModel> model, double t) : model_(std::move(model)), t_(t) {}

    PieceKind kind() const override { return PieceKind::FlowTime; }
    const Manifold& domain() const override { return *model_; }
    const Manifold& codomain() const override { return *model_; }
    Jet jet(const ModelPoint& p) const override { return model_->flow(p, t_); }
    PiecePtr inverse() const override { return std::make_shared<FlowTimePiece>(model_, -t_); }
    std::string describe() const override;
    double time() const { return t_; }

private:
    std::shared_ptr<const FlowModel> model_;
    double t_;
};

/// Finite sequence of pieces, applied left to right: pieces()[0] acts first.
class ComposedMap {
public:
    ComposedMap() = default;
    explicit ComposedMap(std::vector<PiecePtr> pieces);
    ComposedMap(std::initializer_list<PiecePtr> pieces) : ComposedMap(std::vector<PiecePtr>(pieces)) {}

    const std::vector<PiecePtr>& pieces() const { return pieces_; }
    bool empty() const { return pieces_.empty(); }

    /// Throws DomainError if p is not a valid point of the first piece's domain.
    ModelPoint apply(const ModelPoint& p) const;
    /// Ordered product of piece differentials along the piece orbit of p.
    LinearMap3 differential(const ModelPoint& p) const;
    Jet jet(const ModelPoint& p) const;

    ComposedMap inverse() const;
    /// "this, then other".
    ComposedMap then(const ComposedMap& other) const;
    ComposedMap then(PiecePtr piece) const;
    ComposedMap power(int n) const;

    /// Concatenation of non-identity piece words, in application order.
    MappingWord word() const;
    std::string describe() const;

private:
    void check_domain(const ModelPoint& p) const;

    std::vector<PiecePtr> pieces_;
};

}  // namespace phlab
