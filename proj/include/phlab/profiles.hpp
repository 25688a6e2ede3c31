#pragma once

namespace phlab {

/// Order-7 smoothstep 35u^4 - 84u^5 + 70u^6 - 20u^7 on [0,1], clamped outside.
/// Value 0 and 1 at the ends with the first three derivatives vanishing.
double smoothstep7(double u);
double smoothstep7_d1(double u);
double smoothstep7_d2(double u);
/// Integral of smoothstep7 over [0, u], for u in [0, 1].
double smoothstep7_integral(double u);

/// Monotone ramp: 0 on [0, start], 1 on [end, 1], smoothstep7 in between.
class RampProfile {
public:
    RampProfile() = default;
    RampProfile(double start, double end);

    /// Ramp concentrated in [0.5 - w/2, 0.5 + w/2].
    static RampProfile centered(double width);

    double value(double s) const;
    double derivative(double s) const;
    /// Supremum of |derivative|, attained at the ramp midpoint.
    double max_derivative() const;
    double start() const { return start_; }
    double end() const { return end_; }

private:
    double start_ = 0.1;
    double end_ = 0.9;
};

}  // namespace phlab
