#pragma once

#include <memory>
#include <optional>
#include <string>

#include "phlab/expression.hpp"
#include "phlab/linalg.hpp"

namespace phlab {

/// Smooth positive function on the base suspension chart (x, y, s), s in [0, 1).
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual double value(const Vec3& xys) const = 0;
    virtual Vec3 gradient(const Vec3& xys) const = 0;
    /// Set when the field is constant; flows then use closed-form stepping.
    virtual std::optional<double> constant() const { return std::nullopt; }
    virtual std::string describe() const = 0;
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

class ExpressionField final : public ScalarField {
public:
    explicit ExpressionField(Expression expr);
    static ScalarFieldPtr parse(const std::string& text);
    static ScalarFieldPtr constant_field(double value);

    double value(const Vec3& xys) const override { return expr_.evaluate(xys); }
    Vec3 gradient(const Vec3& xys) const override;
    std::optional<double> constant() const override;
    std::string describe() const override { return expr_.source(); }

private:
    Expression expr_;
    Expression dx_, dy_, ds_;
};

/// The time change that makes the base suspension flow conjugate to the flow
/// with an inserted flow box of length eta.
///
/// psi : [-eps, eps + eta] -> [-eps, eps] is increasing with psi' = 1 near both
/// ends; the field equals psi' o psi^{-1} on the collar |s| <= eps around the
/// fiber s = 0 and 1 elsewhere. Crossing the collar takes time 2 eps + eta.
class CollarTimeChange final : public ScalarField {
public:
    /// Throws BadCollar unless 0 < eps <= 0.2, PreconditionViolation unless eta > 0.
    CollarTimeChange(double eta, double eps);

    double value(const Vec3& xys) const override;
    Vec3 gradient(const Vec3& xys) const override;
    std::string describe() const override;

    double eta() const { return eta_; }
    double eps() const { return eps_; }
    /// Smallest value of the field (attained in the middle of the collar).
    double min_value() const { return min_speed_; }

    /// Collar reparametrization and its derivatives, sigma in [-eps, eps + eta].
    double psi(double sigma) const;
    double psi_d1(double sigma) const;
    double psi_d2(double sigma) const;
    /// Inverse of psi on [-eps, eps].
    double psi_inverse(double tau) const;

    /// Signed collar coordinate tau in [-eps, eps] of base coordinate s, if inside.
    std::optional<double> collar_coordinate(double s) const;

private:
    double bump(double u) const;
    double bump_d1(double u) const;
    double bump_integral(double u) const;

    double eta_;
    double eps_;
    double length_;     // 2 eps + eta
    double ramp_;       // ramp width as a fraction of length_
    double depth_;      // 1 - min speed
    double min_speed_;
};

}  // namespace phlab
