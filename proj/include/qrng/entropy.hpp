#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>

#include "qrng/apparatus.hpp"
#include "qrng/bits.hpp"
#include "qrng/g2model.hpp"

namespace qrng {

// Outcome and transition probabilities of the raw bit stream.
// A (transmitted) carries outcome 0, B (reflected) outcome 1.
struct ProbTable {
    double p_a = 0.5;
    double p_b = 0.5;
    double p_a_given_a = 0.5;
    double p_b_given_a = 0.5;
    double p_a_given_b = 0.5;
    double p_b_given_b = 0.5;

    double p_ab() const { return p_a * p_b_given_a; }  // joint pair probability
    void validate() const;
};

// f(p) = max{p(A), p(B), 2 p(AB), 1 - 2 p(AB)}; the guessing probability of
// the four-branch conditional min-entropy case split.
double dominant_term(const ProbTable& pt);

double minentropy(const ProbTable& pt);

// H = -log2(f + k sigma * delta); zero (not an error) once the argument
// reaches 1.
double conservative_minentropy(double f_p, double delta, double k_sigma);

// Which beam-splitter coordinate a propagation perturbs. Click-probability
// quantities vary T with R held fixed; the normalization factor varies R.
enum class PerturbSet { ClickParams, NormFactor };

// 1-sigma uncertainty of an apparatus-dependent quantity by quadrature over
// central finite differences in the six apparatus parameters.
double propagate_sigma(const std::function<double(const ApparatusParams&)>& quantity,
                       const ApparatusParams& apparatus, const ParamSigmas& sigmas,
                       PerturbSet set = PerturbSet::ClickParams);

// Parametric probability table from the dead-time-corrected click rates and
// the row-normalized conditional detection probabilities.
ProbTable probs_from_params(const ApparatusParams& apparatus, const G2Model& g2);

struct TupleCounts {
    std::uint64_t n00 = 0, n01 = 0, n10 = 0, n11 = 0;
    std::uint64_t n0 = 0, n1 = 0;
    std::uint64_t total() const { return n00 + n01 + n10 + n11; }
};

// Overlapping tuple counts including the wraparound pair (last, first), so
// tuple counts sum to the bit count.
TupleCounts tuple_frequencies(const BitString& bits);

ProbTable table_from_counts(const TupleCounts& counts);

struct EntropyReport {
    int model = 1;
    ProbTable probs;
    double f_p = 1.0;
    double h_raw = 0.0;
    double delta = 0.0;    // 1 sigma of the dominant/combined term
    double k_sigma = 11.5;
    double h_conservative = 0.0;
    double p_e = 0.0;      // model 2: adversary fraction
    double delta_p_e = 0.0;
    double p_c = 0.0;      // model 3: classical fraction
    double p_bold0 = 0.0;  // model 3: bold-bit probability
    double r_rand_cps = 0.0;
    double r_total_cps = 0.0;
    double t_cross_ns = 0.0;
    double delta_t_ns = 0.0;  // crossing shift from the classical-line band (diagnostic)
    std::uint64_t raw_bits = 0;
    std::uint64_t extractable_bits = 0;
    double rate_bps = 0.0;
    bool empirical = false;
};

// k such that the two-sided Gaussian tail beyond +-k sigma equals epsilon.
double sigma_multiplier(double epsilon);

struct EntropyContext {
    ApparatusParams apparatus;
    ParamSigmas sigmas;
    G2Model g2;
    double k_sigma = 11.5;
    double delta_g2_0 = 0.0;       // from norm_uncertainty
    double delta_unit_line = 0.0;  // Delta_1, shifts the classical crossing
};

EntropyReport model1_entropy(const EntropyContext& ctx);

// H = -log2(p_e + (1-p_e) f(p)) with p_e = 1 - sqrt(1 - g2(0)); g2(0) >= 1
// discards everything (zero-entropy report).
EntropyReport model2_entropy(const EntropyContext& ctx);

// Start-stop tuple model inside the quantum area below the classical line.
EntropyReport model3_entropy(const EntropyContext& ctx);

// Model-3 quantum-area rate r_rand = (1 - g2(0)) r_A r_B Int_{-t}^{t} g2;
// zero when the classical crossing does not exist.
double quantum_area_rate(const ApparatusParams& apparatus, const G2Model& g2);

// Entropy of recorded bits via overlapping tuple frequencies, evaluated under
// the selected model's reduction (the parametric context supplies p_e / p_c).
EntropyReport empirical_entropy(const BitString& bits, int model, const EntropyContext& ctx);

// Fills extractable_bits and rate_bps from an extraction plan for n raw bits
// collected over duration_s.
void attach_extraction(EntropyReport& report, std::uint64_t n_raw_bits, double epsilon_total,
                       double duration_s);

}  // namespace qrng
