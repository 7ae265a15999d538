#pragma once

#include <optional>
#include <vector>

#include "qrng/g2model.hpp"

namespace qrng {

// Pump/decay rates of the three-level emitter, all in 1/ns.
// 1 = ground, 2 = excited (radiative), 3 = shelving state.
struct ThreeLevelRates {
    double k12 = 0.0;  // pump
    double k21 = 0.0;  // radiative decay
    double k23 = 0.0;  // shelving
    double k31 = 0.0;  // deshelving

    void validate() const;
};

struct Populations {
    double rho1 = 1.0;
    double rho2 = 0.0;
    double rho3 = 0.0;
};

// Coefficients mapping excitation power (mW) to emitter rates and background.
struct PowerModel {
    double pump_coeff = 0.77601;              // 1/ns per mW
    double k21 = 1.0 / 16.08;                 // 1/ns
    double k23_linear = 1.0 / 30.97;          // 1/ns per mW
    double k23_const = 1.0 / 1000.0;          // 1/ns
    double k31_linear = 1.0 / 78.37;          // 1/ns per mW
    double k31_const = 1.0 / 471.7;           // 1/ns
    double bg_coeff_cps_per_mw = 5.2e6;       // background clicks/s per mW
    double overall_efficiency = 0.779e-2;     // detected / emitted fraction

    void validate() const;
};

struct FluorescenceRates {
    double emitted_cps = 0.0;    // F
    double total_cps = 0.0;      // F_bg = F + background
    double detected_cps = 0.0;   // F_bg * overall efficiency
    double background_cps = 0.0;
};

ThreeLevelRates rates_from_power(double power_mw, const PowerModel& model);

Populations steady_state(const ThreeLevelRates& rates);

// g2(tau) for tau >= 0 (symmetric extension for negative tau), from the
// closed-form solution of the rate equations with rho = (1,0,0) at tau = 0.
double g2_analytic(const ThreeLevelRates& rates, double tau_ns);

FluorescenceRates fluorescence_rates(double power_mw, const PowerModel& model);

// Two-exponential representation of the analytic g2, i.e. the model a fit
// would recover on noiseless emitter data. Empty when the relaxation is
// oscillatory or degenerate and no such representation exists.
std::optional<G2Model> emitter_g2_model(const ThreeLevelRates& rates);

// g2 of the emitter stream diluted with a Poisson background; signal_fraction
// is F / F_bg. Uncorrelated admixture scales both amplitudes by the squared
// signal fraction.
std::optional<G2Model> mixed_g2_model(const ThreeLevelRates& rates, double signal_fraction);

struct ApparatusParams;  // stream_sim

struct RandRatePoint {
    double power_mw = 0.0;
    double r_rand_cps = 0.0;
};

struct RandRateCurve {
    std::vector<RandRatePoint> points;
    std::size_t argmax = 0;
};

// r_rand over a power grid: per-power rates and background feed the mixed g2
// model, the apparatus incident rate rescales with F_bg, and the model-3
// quantum-area rate is evaluated at each point. Powers where g2 never dips
// below the classical line contribute zero.
RandRateCurve randomness_rate_curve(const std::vector<double>& powers_mw,
                                    const ApparatusParams& apparatus,
                                    const PowerModel& model);

}  // namespace qrng
