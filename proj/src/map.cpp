#include "phlab/map.hpp"

#include <sstream>

#include "phlab/errors.hpp"

namespace phlab {

std::string to_string(PieceKind kind) {
    switch (kind) {
        case PieceKind::FlowTime: return "flow-time";
        case PieceKind::DehnTwist: return "dehn-twist";
        case PieceKind::Conjugacy: return "conjugacy";
        case PieceKind::Identity: return "identity";
    }
    return "unknown";
}

std::string FlowTimePiece::describe() const {
    std::ostringstream os;
    os << "flow(" << t_ << ")";
    return os.str();
}

ComposedMap::ComposedMap(std::vector<PiecePtr> pieces) : pieces_(std::move(pieces)) {
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (!pieces_[i]) fail(ErrorCode::InvalidInput, "null map piece");
        if (i > 0 && &pieces_[i]->domain() != &pieces_[i - 1]->codomain()) {
            fail(ErrorCode::DomainError, "piece " + std::to_string(i) + " does not act on the previous codomain");
        }
    }
}

void ComposedMap::check_domain(const ModelPoint& p) const {
    if (!pieces_.empty() && !pieces_.front()->domain().valid(p)) {
        fail(ErrorCode::DomainError, "point is not valid for " + pieces_.front()->domain().name());
    }
}

ModelPoint ComposedMap::apply(const ModelPoint& p) const {
    check_domain(p);
    ModelPoint q = p;
    for (const auto& piece : pieces_) q = piece->apply(q);
    return q;
}

Jet ComposedMap::jet(const ModelPoint& p) const {
    check_domain(p);
    Jet out{p, Mat3::Identity()};
    for (const auto& piece : pieces_) {
        Jet step = piece->jet(out.point);
        out.point = step.point;
        out.jacobian = step.jacobian * out.jacobian;
    }
    return out;
}

LinearMap3 ComposedMap::differential(const ModelPoint& p) const {
    Jet j = jet(p);
    return {j.jacobian, p, j.point};
}

ComposedMap ComposedMap::inverse() const {
    std::vector<PiecePtr> out;
    out.reserve(pieces_.size());
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) out.push_back((*it)->inverse());
    return ComposedMap(std::move(out));
}

ComposedMap ComposedMap::then(const ComposedMap& other) const {
    std::vector<PiecePtr> out = pieces_;
    out.insert(out.end(), other.pieces_.begin(), other.pieces_.end());
    return ComposedMap(std::move(out));
}

ComposedMap ComposedMap::then(PiecePtr piece) const {
    std::vector<PiecePtr> out = pieces_;
    out.push_back(std::move(piece));
    return ComposedMap(std::move(out));
}

ComposedMap ComposedMap::power(int n) const {
    if (n < 0) return inverse().power(-n);
    std::vector<PiecePtr> out;
    out.reserve(pieces_.size() * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out.insert(out.end(), pieces_.begin(), pieces_.end());
    return ComposedMap(std::move(out));
}

MappingWord ComposedMap::word() const {
    MappingWord w;
    for (const auto& piece : pieces_) {
        if (piece->kind() != PieceKind::Identity) w = w.then(piece->word());
    }
    return w;
}

std::string ComposedMap::describe() const {
    if (pieces_.empty()) return "id";
    std::string out;
    for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it) {
        if (!out.empty()) out += " ∘ ";
        out += (*it)->describe();
    }
    return out;
}

}  // namespace phlab
