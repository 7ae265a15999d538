#pragma once

#include "qrng/errors.hpp"

#include <cmath>

namespace qrng {

// Beam splitter, detector efficiencies, dead times and incident photon rate.
// Channel A sits in the transmitted arm, channel B in the reflected arm.
struct ApparatusParams {
    double t = 0.39;              // transmission coefficient
    double r = 0.61;              // reflection coefficient
    double eta_a = 0.60;
    double eta_b = 0.60;
    double tau_dead_a_ns = 43.5;
    double tau_dead_b_ns = 42.9;
    double i_in_cps = 166000.0;   // incident photon rate at the beam splitter

    void validate() const {
        if (std::abs(t + r - 1.0) > 1e-12) throw DomainError("apparatus: T + R != 1");
        if (!(t > 0.0 && t < 1.0)) throw DomainError("apparatus: T outside (0,1)");
        if (!(eta_a > 0.0 && eta_a <= 1.0) || !(eta_b > 0.0 && eta_b <= 1.0))
            throw DomainError("apparatus: efficiency outside (0,1]");
        if (tau_dead_a_ns < 0.0 || tau_dead_b_ns < 0.0)
            throw DomainError("apparatus: negative dead time");
        if (i_in_cps < 0.0) throw DomainError("apparatus: negative incident rate");
    }
};

// 1-sigma uncertainties of the apparatus parameters. The beam-splitter value
// applies to whichever of T or R a given propagation perturbs.
struct ParamSigmas {
    double beamsplitter = 0.004;
    double eta_a = 0.01;
    double eta_b = 0.01;
    double tau_dead_a_ns = 10.0;
    double tau_dead_b_ns = 10.0;
    double i_in_cps = -1.0;  // negative: use sqrt(I_in)

    double i_in_sigma(double i_in) const {
        return i_in_cps < 0.0 ? std::sqrt(i_in) : i_in_cps;
    }

    void validate() const {
        if (beamsplitter < 0 || eta_a < 0 || eta_b < 0 || tau_dead_a_ns < 0 ||
            tau_dead_b_ns < 0)
            throw DomainError("sigmas must be >= 0");
    }
};

}  // namespace qrng
