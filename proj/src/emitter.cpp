#include "qrng/emitter.hpp"

#include <algorithm>
#include <cmath>

#include "qrng/apparatus.hpp"
#include "qrng/entropy.hpp"
#include "qrng/errors.hpp"

namespace qrng {

void ThreeLevelRates::validate() const {
    if (k12 < 0 || k21 < 0 || k23 < 0 || k31 < 0)
        throw DomainError("rates must be >= 0");
    if (!(k21 > 0)) throw DomainError("radiative rate k21 must be > 0");
}

void PowerModel::validate() const {
    if (pump_coeff < 0 || k21 < 0 || k23_linear < 0 || k23_const < 0 ||
        k31_linear < 0 || k31_const < 0 || bg_coeff_cps_per_mw < 0)
        throw DomainError("power model coefficients must be >= 0");
    if (!(overall_efficiency > 0.0 && overall_efficiency <= 1.0))
        throw DomainError("overall efficiency outside (0,1]");
}

ThreeLevelRates rates_from_power(double power_mw, const PowerModel& model) {
    if (power_mw < 0.0) throw DomainError("negative excitation power");
    model.validate();
    ThreeLevelRates r;
    r.k12 = model.pump_coeff * power_mw;
    r.k21 = model.k21;
    r.k23 = model.k23_linear * power_mw + model.k23_const;
    r.k31 = model.k31_linear * power_mw + model.k31_const;
    return r;
}

Populations steady_state(const ThreeLevelRates& rates) {
    if (rates.k12 == 0 && rates.k21 == 0 && rates.k23 == 0 && rates.k31 == 0)
        throw SingularSystemError("all rates zero");
    if (!(rates.k12 + rates.k21 > 0)) throw DomainError("k12 + k21 must be > 0");
    if (rates.k12 == 0.0) return {1.0, 0.0, 0.0};
    // rho1 = (k21+k23)/k12 rho2, rho3 = (k23/k31) rho2, normalized to 1.
    // k31 = 0 with k23 > 0 traps all population in the shelf.
    if (rates.k31 == 0.0 && rates.k23 > 0.0) return {0.0, 0.0, 1.0};
    const double c1 = (rates.k21 + rates.k23) / rates.k12;
    const double c3 = rates.k31 > 0.0 ? rates.k23 / rates.k31 : 0.0;
    const double rho2 = 1.0 / (c1 + 1.0 + c3);
    return {c1 * rho2, rho2, c3 * rho2};
}

namespace {

// rho2(tau) via the closed-form exponential of the reduced 2x2 system
//   d/dt (x2, x3) = A (x2, x3),  A = [[-(k12+k21+k23), -k12], [k23, -k31]]
// where x is the deviation from steady state. Uses the Cayley-Hamilton form
// of exp(A t), valid for real, complex and repeated eigenvalues.
double rho2_of_tau(const ThreeLevelRates& k, double tau) {
    const double alpha = k.k12 + k.k21 + k.k23;
    const double a11 = -alpha, a12 = -k.k12, a21 = k.k23, a22 = -k.k31;
    const double tr = a11 + a22;
    const double det = a11 * a22 - a12 * a21;

    // steady state deviation at tau = 0: rho2 = rho3 = 0
    const double inv = (k.k21 + k.k23) / k.k12 + 1.0 + (k.k31 > 0 ? k.k23 / k.k31 : 0.0);
    const double rho2_inf = 1.0 / inv;
    const double rho3_inf = (k.k31 > 0 ? k.k23 / k.k31 : 0.0) * rho2_inf;
    const double x0 = -rho2_inf, y0 = -rho3_inf;

    // exp(A t) = e^{mt} [cosh(qt) I + sinh(qt)/q (A - m I)], m = tr/2, q^2 = m^2 - det
    const double m = 0.5 * tr;
    const double q2 = m * m - det;
    double ch, shq;  // cosh(q tau), sinh(q tau)/q  (real for q2 of either sign)
    if (q2 > 0.0) {
        const double q = std::sqrt(q2);
        ch = std::cosh(q * tau);
        shq = std::sinh(q * tau) / q;
    } else if (q2 < 0.0) {
        const double w = std::sqrt(-q2);
        ch = std::cos(w * tau);
        shq = w * tau == 0.0 ? tau : std::sin(w * tau) / w;
    } else {
        ch = 1.0;
        shq = tau;
    }
    const double e = std::exp(m * tau);
    const double x = e * (ch * x0 + shq * ((a11 - m) * x0 + a12 * y0));
    return rho2_inf + x;
}

}  // namespace

double g2_analytic(const ThreeLevelRates& rates, double tau_ns) {
    rates.validate();
    const double tau = std::abs(tau_ns);
    if (rates.k12 == 0.0) throw DomainError("g2 undefined for unpumped emitter");
    const Populations ss = steady_state(rates);
    if (ss.rho2 == 0.0) throw DomainError("g2 undefined: no steady-state emission");
    return rho2_of_tau(rates, tau) / ss.rho2;
}

FluorescenceRates fluorescence_rates(double power_mw, const PowerModel& model) {
    if (power_mw < 0.0) throw DomainError("negative excitation power");
    FluorescenceRates out;
    out.background_cps = model.bg_coeff_cps_per_mw * power_mw;
    if (power_mw == 0.0) return out;
    const ThreeLevelRates rates = rates_from_power(power_mw, model);
    const Populations ss = steady_state(rates);
    out.emitted_cps = ss.rho2 * rates.k21 * 1e9;  // 1/ns -> 1/s
    out.total_cps = out.emitted_cps + out.background_cps;
    out.detected_cps = out.total_cps * model.overall_efficiency;
    return out;
}

std::optional<G2Model> emitter_g2_model(const ThreeLevelRates& k) {
    const double alpha = k.k12 + k.k21 + k.k23;
    const double tr = -(alpha + k.k31);
    const double det = alpha * k.k31 + k.k12 * k.k23;
    const double disc = tr * tr - 4.0 * det;
    if (disc <= 0.0) return std::nullopt;
    const double root = std::sqrt(disc);
    const double l1 = 0.5 * (-tr + root);  // fast
    const double l2 = 0.5 * (-tr - root);  // slow
    if (!(l2 > 0.0) || l1 == l2) return std::nullopt;

    // g2 = 1 + c1 e^{-l1 t} + c2 e^{-l2 t}; c follows from rho2(0) = 0 and
    // rho2'(0) = k12 (initial condition rho = (1,0,0)).
    const Populations ss = steady_state(k);
    if (ss.rho2 <= 0.0) return std::nullopt;
    // x(t) = rho2(t) - rho2_inf satisfies x(0) = -rho2_inf, x'(0) = k12 - 0
    //   c1 + c2 = x(0),  -l1 c1 - l2 c2 = x'(0)
    const double xp0 = k.k12;
    const double x0 = -ss.rho2;
    const double c1 = (xp0 + l2 * x0) / (l2 - l1);
    const double c2 = x0 - c1;
    const double amp_dip = -c1 / ss.rho2;
    const double amp_bunch = c2 / ss.rho2;
    if (amp_dip <= 0.0 || amp_bunch < 0.0) return std::nullopt;
    return G2Model{amp_dip, l1, amp_bunch, l2};
}

std::optional<G2Model> mixed_g2_model(const ThreeLevelRates& rates, double signal_fraction) {
    if (!(signal_fraction >= 0.0 && signal_fraction <= 1.0))
        throw DomainError("signal fraction outside [0,1]");
    auto pure = emitter_g2_model(rates);
    if (!pure) return std::nullopt;
    const double s2 = signal_fraction * signal_fraction;
    return G2Model{pure->a * s2, pure->lambda1, pure->b * s2, pure->lambda2};
}

RandRateCurve randomness_rate_curve(const std::vector<double>& powers_mw,
                                    const ApparatusParams& apparatus,
                                    const PowerModel& model) {
    if (powers_mw.empty()) throw DomainError("empty power grid");
    apparatus.validate();
    // Fixed collection optics: the incident rate scales with the total
    // emission rate, anchored so the configured I_in corresponds to the
    // detected/emitted ratio of the power model.
    const double coll = model.overall_efficiency /
                        (apparatus.eta_a * apparatus.t + apparatus.eta_b * apparatus.r);
    RandRateCurve curve;
    curve.points.reserve(powers_mw.size());
    for (double p : powers_mw) {
        if (p < 0.0) throw DomainError("negative power in grid");
        RandRatePoint pt{p, 0.0};
        if (p > 0.0) {
            const FluorescenceRates fl = fluorescence_rates(p, model);
            const ThreeLevelRates rates = rates_from_power(p, model);
            const double sig = fl.total_cps > 0 ? fl.emitted_cps / fl.total_cps : 0.0;
            if (auto g2 = mixed_g2_model(rates, sig)) {
                ApparatusParams ap = apparatus;
                ap.i_in_cps = fl.total_cps * coll;
                pt.r_rand_cps = quantum_area_rate(ap, *g2);  // 0 when no crossing
            }
        }
        curve.points.push_back(pt);
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        if (curve.points[i].r_rand_cps > curve.points[curve.argmax].r_rand_cps)
            curve.argmax = i;
    return curve;
}

}  // namespace qrng
