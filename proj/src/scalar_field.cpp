#include "phlab/scalar_field.hpp"

#include <cmath>
#include <sstream>

#include "phlab/errors.hpp"
#include "phlab/profiles.hpp"

namespace phlab {

ExpressionField::ExpressionField(Expression expr)
    : expr_(std::move(expr)), dx_(expr_.derivative(0)), dy_(expr_.derivative(1)), ds_(expr_.derivative(2)) {}

ScalarFieldPtr ExpressionField::parse(const std::string& text) {
    return std::make_shared<ExpressionField>(Expression::parse(text));
}

ScalarFieldPtr ExpressionField::constant_field(double value) {
    return std::make_shared<ExpressionField>(Expression::constant(value));
}

Vec3 ExpressionField::gradient(const Vec3& xys) const {
    return {dx_.evaluate(xys), dy_.evaluate(xys), ds_.evaluate(xys)};
}

std::optional<double> ExpressionField::constant() const {
    if (expr_.is_constant()) return expr_.constant_value();
    return std::nullopt;
}

// psi'(sigma) = 1 - depth * b(u), u = (sigma + eps) / L, where b is a plateau
// bump rising over [0, r] and falling over [1 - r, 1]. The ramps have length
// eps each (r = eps / L), and depth is fixed by psi(eps + eta) = eps:
//   integral of psi' = L - depth * L * (1 - r) = 2 eps  =>  depth = eta / (eta + eps).
CollarTimeChange::CollarTimeChange(double eta, double eps) : eta_(eta), eps_(eps) {
    if (!(eps > 0.0 && eps <= 0.2)) fail(ErrorCode::BadCollar, "collar half-width must lie in (0, 0.2]");
    if (!(eta > 0.0)) fail(ErrorCode::PreconditionViolation, "flow-box length must be positive");
    length_ = 2.0 * eps_ + eta_;
    ramp_ = eps_ / length_;
    depth_ = eta_ / (length_ * (1.0 - ramp_));
    min_speed_ = 1.0 - depth_;
}

double CollarTimeChange::bump(double u) const {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    if (u < ramp_) return smoothstep7(u / ramp_);
    if (u > 1.0 - ramp_) return smoothstep7((1.0 - u) / ramp_);
    return 1.0;
}

double CollarTimeChange::bump_d1(double u) const {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    if (u < ramp_) return smoothstep7_d1(u / ramp_) / ramp_;
    if (u > 1.0 - ramp_) return -smoothstep7_d1((1.0 - u) / ramp_) / ramp_;
    return 0.0;
}

double CollarTimeChange::bump_integral(double u) const {
    if (u <= 0.0) return 0.0;
    if (u <= ramp_) return ramp_ * smoothstep7_integral(u / ramp_);
    const double first = 0.5 * ramp_;
    if (u <= 1.0 - ramp_) return first + (u - ramp_);
    const double middle = first + (1.0 - 2.0 * ramp_);
    const double uu = std::min(u, 1.0);
    return middle + ramp_ * (0.5 - smoothstep7_integral((1.0 - uu) / ramp_));
}

double CollarTimeChange::psi(double sigma) const {
    const double u = (sigma + eps_) / length_;
    return sigma - depth_ * length_ * bump_integral(u);
}

double CollarTimeChange::psi_d1(double sigma) const { return 1.0 - depth_ * bump((sigma + eps_) / length_); }

double CollarTimeChange::psi_d2(double sigma) const {
    return -depth_ * bump_d1((sigma + eps_) / length_) / length_;
}

double CollarTimeChange::psi_inverse(double tau) const {
    // psi is increasing with psi' >= min_speed > 0: safeguarded Newton.
    double lo = -eps_;
    double hi = eps_ + eta_;
    double x = -eps_ + (tau + eps_) * length_ / (2.0 * eps_);
    for (int iter = 0; iter < 200; ++iter) {
        const double f = psi(x) - tau;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        if (std::abs(f) < 1e-15) break;
        double next = x - f / psi_d1(x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - x) < 1e-16) break;
        x = next;
    }
    return x;
}

std::optional<double> CollarTimeChange::collar_coordinate(double s) const {
    if (s <= eps_) return s;
    if (s >= 1.0 - eps_) return s - 1.0;
    return std::nullopt;
}

double CollarTimeChange::value(const Vec3& xys) const {
    const auto tau = collar_coordinate(xys[2]);
    if (!tau) return 1.0;
    return psi_d1(psi_inverse(*tau));
}

Vec3 CollarTimeChange::gradient(const Vec3& xys) const {
    const auto tau = collar_coordinate(xys[2]);
    if (!tau) return Vec3::Zero();
    const double sigma = psi_inverse(*tau);
    // d/dtau psi'(psi^{-1}(tau)) = psi''(sigma) / psi'(sigma)
    return {0.0, 0.0, psi_d2(sigma) / psi_d1(sigma)};
}

std::string CollarTimeChange::describe() const {
    std::ostringstream os;
    os << "collar_time_change(eta=" << eta_ << ", eps=" << eps_ << ")";
    return os.str();
}

}  // namespace phlab
