#include "phlab/mapping_word.hpp"

#include <algorithm>

#include "phlab/errors.hpp"

namespace phlab {

TwistLetter TwistLetter::from_class(int a, int b) {
    if (a == 0 && b == 0) fail(ErrorCode::ZeroClass, "twist class (0,0) is homotopically trivial");
    if (a < 0 || (a == 0 && b < 0)) return {-a, -b, -1};
    return {a, b, 1};
}

std::string to_string(const TwistLetter& letter) {
    std::string out = "τ(" + std::to_string(letter.a) + "," + std::to_string(letter.b) + ")";
    if (letter.power == -1) {
        out += "⁻¹";
    } else if (letter.power != 1) {
        out += "^" + std::to_string(letter.power);
    }
    return out;
}

MappingWord::MappingWord(std::vector<TwistLetter> letters) : letters_(std::move(letters)) {}

MappingWord MappingWord::then(const MappingWord& other) const {
    std::vector<TwistLetter> out = letters_;
    out.insert(out.end(), other.letters_.begin(), other.letters_.end());
    return MappingWord(std::move(out));
}

MappingWord MappingWord::inverse() const {
    std::vector<TwistLetter> out;
    out.reserve(letters_.size());
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.push_back(it->inverse());
    return MappingWord(std::move(out));
}

MappingWord MappingWord::reduced() const {
    std::vector<TwistLetter> stack;
    for (const auto& letter : letters_) {
        if (!stack.empty() && stack.back().a == letter.a && stack.back().b == letter.b) {
            stack.back().power += letter.power;
            if (stack.back().power == 0) stack.pop_back();
        } else {
            stack.push_back(letter);
        }
    }
    return MappingWord(std::move(stack));
}

std::string MappingWord::to_string() const {
    if (letters_.empty()) return "1";
    std::string out;
    for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) {
        if (!out.empty()) out += "·";
        out += phlab::to_string(*it);
    }
    return out;
}

std::string MappingWord::application_order_string() const {
    std::string out;
    for (const auto& letter : letters_) {
        if (!out.empty()) out += ", ";
        out += phlab::to_string(letter);
    }
    return out;
}

}  // namespace phlab
