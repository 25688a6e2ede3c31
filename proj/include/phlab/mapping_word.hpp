#pragma once

#include <string>
#include <vector>

namespace phlab {

/// One Dehn-twist symbol tau(gamma)^power. The class is stored in canonical
/// form (first non-zero component positive); tau(-gamma) is tau(gamma)^-1.
struct TwistLetter {
    int a = 0;
    int b = 0;
    int power = 1;

    static TwistLetter from_class(int a, int b);
    TwistLetter inverse() const { return {a, b, -power}; }
    friend bool operator==(const TwistLetter&, const TwistLetter&) = default;
};

/// Symbolic mapping-class word. Letters are kept in application order (the
/// first letter is applied first); free reduction cancels adjacent inverses.
class MappingWord {
public:
    MappingWord() = default;
    explicit MappingWord(std::vector<TwistLetter> letters);

    const std::vector<TwistLetter>& letters() const { return letters_; }
    bool empty() const { return letters_.empty(); }
    std::size_t size() const { return letters_.size(); }

    /// Word of "this, then other".
    MappingWord then(const MappingWord& other) const;
    MappingWord inverse() const;
    MappingWord reduced() const;

    /// Composition notation: last-applied letter leftmost, e.g. "τ(1,0)·τ(0,1)⁻¹".
    /// The empty word prints as "1".
    std::string to_string() const;
    /// Application-order listing, e.g. "τ(0,1)⁻¹, τ(1,0)".
    std::string application_order_string() const;

    friend bool operator==(const MappingWord&, const MappingWord&) = default;

private:
    std::vector<TwistLetter> letters_;
};

std::string to_string(const TwistLetter& letter);

}  // namespace phlab
