#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "phlab/linalg.hpp"

namespace phlab {

/// Small scalar formula language over chart coordinates x, y, s.
///
/// Grammar: numbers, `pi`, the variables x y s, binary + - * /, unary minus,
/// parentheses, and the functions sin cos exp. Derivatives are formed
/// symbolically so flows can integrate exact variational equations.
class Expression {
public:
    /// Throws Error(ParseError) with the offending column on malformed input.
    static Expression parse(std::string_view text);
    static Expression constant(double value);

    double evaluate(const Vec3& xys) const;
    /// Partial derivative with respect to coordinate 0 (x), 1 (y) or 2 (s).
    Expression derivative(int coordinate) const;

    bool is_constant() const;
    /// Value of a constant expression (undefined otherwise).
    double constant_value() const;
    const std::string& source() const { return source_; }
    /// Canonical printed form of the parsed tree.
    std::string to_string() const;

    struct Node;

private:
    Expression(std::shared_ptr<const Node> root, std::string source);

    std::shared_ptr<const Node> root_;
    std::string source_;
};

}  // namespace phlab
