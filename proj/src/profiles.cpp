#include "phlab/profiles.hpp"

#include "phlab/errors.hpp"

namespace phlab {

double smoothstep7(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double u2 = u * u;
    const double u4 = u2 * u2;
    return u4 * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
}

double smoothstep7_d1(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double u3 = u * u * u;
    return u3 * (140.0 + u * (-420.0 + u * (420.0 - 140.0 * u)));
}

double smoothstep7_d2(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double u2 = u * u;
    return u2 * (420.0 + u * (-1680.0 + u * (2100.0 - 840.0 * u)));
}

double smoothstep7_integral(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 0.5 + (u - 1.0);
    const double u5 = u * u * u * u * u;
    return u5 * (7.0 + u * (-14.0 + u * (10.0 - 2.5 * u)));
}

RampProfile::RampProfile(double start, double end) : start_(start), end_(end) {
    if (!(0.0 <= start && start < end && end <= 1.0)) {
        fail(ErrorCode::InvalidInput, "ramp profile needs 0 <= start < end <= 1");
    }
}

RampProfile RampProfile::centered(double width) { return {0.5 - 0.5 * width, 0.5 + 0.5 * width}; }

double RampProfile::value(double s) const { return smoothstep7((s - start_) / (end_ - start_)); }

double RampProfile::derivative(double s) const {
    return smoothstep7_d1((s - start_) / (end_ - start_)) / (end_ - start_);
}

double RampProfile::max_derivative() const { return smoothstep7_d1(0.5) / (end_ - start_); }

}  // namespace phlab
