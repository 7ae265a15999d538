#pragma once

#include <cmath>
#include <optional>

#include "qrng/errors.hpp"

namespace qrng {

// Two-exponential anti-bunching model
//   g2(tau) = 1 - a exp(-lambda1 |tau|) + b exp(-lambda2 |tau|)
// a: dip amplitude, b: bunching amplitude, rates in 1/ns, tau in ns.
struct G2Model {
    double a = 0.0;
    double lambda1 = 1.0;
    double b = 0.0;
    double lambda2 = 0.5;

    double value(double tau_ns) const {
        const double t = std::abs(tau_ns);
        return 1.0 - a * std::exp(-lambda1 * t) + b * std::exp(-lambda2 * t);
    }

    double zero() const { return 1.0 - a + b; }

    void validate() const {
        if (a < 0.0 || b < 0.0) throw DomainError("G2Model: amplitudes must be >= 0");
        if (!(lambda1 > lambda2) || !(lambda2 > 0.0))
            throw DomainError("G2Model: requires lambda1 > lambda2 > 0");
        if (zero() < 0.0) throw DomainError("G2Model: g2(0) < 0");
    }
};

// antiderivative of g2 on tau >= 0
inline double g2_antiderivative(const G2Model& m, double tau_ns) {
    return tau_ns + (m.a / m.lambda1) * std::exp(-m.lambda1 * tau_ns) -
           (m.b / m.lambda2) * std::exp(-m.lambda2 * tau_ns);
}

// integral of g2(|tau|) from 0 to x, sign-aware
inline double g2_integral_from_zero(const G2Model& m, double x_ns) {
    const double v = g2_antiderivative(m, std::abs(x_ns)) - g2_antiderivative(m, 0.0);
    return x_ns >= 0.0 ? v : -v;
}

// closed-form integral of g2(|tau|) over [t1, t2] in ns
inline double g2_integral(const G2Model& m, double t1_ns, double t2_ns) {
    if (t1_ns > t2_ns) throw DomainError("g2_integral: t1 > t2");
    return g2_integral_from_zero(m, t2_ns) - g2_integral_from_zero(m, t1_ns);
}

enum class CrossingStatus { Found, NoCrossing, NoFiniteCrossing };

struct ClassicalCrossing {
    CrossingStatus status = CrossingStatus::NoCrossing;
    double t_ns = 0.0;  // valid when status == Found

    bool found() const { return status == CrossingStatus::Found; }
};

// Positive solution of g2(t) = 1. Exists and is unique when a > b > 0:
//   a exp(-l1 t) = b exp(-l2 t)  =>  t = ln(a/b) / (l1 - l2).
inline ClassicalCrossing classical_crossing(const G2Model& m) {
    if (m.b <= 0.0) {
        if (m.a <= 0.0) return {CrossingStatus::NoCrossing, 0.0};
        return {CrossingStatus::NoFiniteCrossing, 0.0};  // dip approaches 1 from below
    }
    if (m.a < m.b) return {CrossingStatus::NoCrossing, 0.0};
    return {CrossingStatus::Found, std::log(m.a / m.b) / (m.lambda1 - m.lambda2)};
}

}  // namespace qrng
