#include "qrng/entropy.hpp"

#include <algorithm>
#include <cmath>

#include "qrng/extractor.hpp"
#include "qrng/sim.hpp"

namespace qrng {

namespace {
constexpr double kNsToS = 1e-9;

double log2_safe(double x) { return std::log2(x); }
}  // namespace

void ProbTable::validate() const {
    const auto in01 = [](double v) { return v >= -1e-12 && v <= 1.0 + 1e-12; };
    if (!in01(p_a) || !in01(p_b) || !in01(p_a_given_a) || !in01(p_b_given_a) ||
        !in01(p_a_given_b) || !in01(p_b_given_b))
        throw DomainError("probability outside [0,1]");
    if (std::abs(p_a + p_b - 1.0) > 1e-9) throw DomainError("p(A)+p(B) != 1");
    if (std::abs(p_a_given_a + p_b_given_a - 1.0) > 1e-9 ||
        std::abs(p_a_given_b + p_b_given_b - 1.0) > 1e-9)
        throw DomainError("conditional row does not sum to 1");
}

double dominant_term(const ProbTable& pt) {
    const double pab = pt.p_ab();
    return std::max({pt.p_a, pt.p_b, 2.0 * pab, 1.0 - 2.0 * pab});
}

double minentropy(const ProbTable& pt) {
    pt.validate();
    return -log2_safe(dominant_term(pt));
}

double conservative_minentropy(double f_p, double delta, double k_sigma) {
    if (delta < 0.0 || k_sigma < 0.0) throw DomainError("negative uncertainty");
    const double arg = f_p + k_sigma * delta;
    if (arg >= 1.0) return 0.0;
    return -log2_safe(arg);
}

double propagate_sigma(const std::function<double(const ApparatusParams&)>& quantity,
                       const ApparatusParams& apparatus, const ParamSigmas& sigmas,
                       PerturbSet set) {
    sigmas.validate();
    struct Param {
        double ApparatusParams::* field;
        double sigma;
    };
    const double sig_i = sigmas.i_in_sigma(apparatus.i_in_cps);
    std::array<Param, 6> params{{
        {set == PerturbSet::ClickParams ? &ApparatusParams::t : &ApparatusParams::r,
         sigmas.beamsplitter},
        {&ApparatusParams::eta_a, sigmas.eta_a},
        {&ApparatusParams::eta_b, sigmas.eta_b},
        {&ApparatusParams::tau_dead_a_ns, sigmas.tau_dead_a_ns},
        {&ApparatusParams::tau_dead_b_ns, sigmas.tau_dead_b_ns},
        {&ApparatusParams::i_in_cps, sig_i},
    }};
    double sum = 0.0;
    for (const auto& par : params) {
        if (par.sigma == 0.0) continue;
        const double theta = apparatus.*(par.field);
        const double h = std::max(1e-6, 1e-4 * std::abs(theta));
        ApparatusParams up = apparatus, dn = apparatus;
        up.*(par.field) = theta + h;
        dn.*(par.field) = theta - h;
        const double d = (quantity(up) - quantity(dn)) / (2.0 * h);
        if (!std::isfinite(d)) throw ModelError("non-finite partial derivative");
        sum += d * par.sigma * d * par.sigma;
    }
    return std::sqrt(sum);
}

ProbTable probs_from_params(const ApparatusParams& apparatus, const G2Model& g2) {
    apparatus.validate();
    const ClickRates rates = analytic_click_rates(apparatus, g2);
    const double r_tot = rates.total();
    if (!(r_tot > 0.0)) throw ModelError("zero total click rate");

    const double det_a = apparatus.eta_a * apparatus.t;  // detected fraction, arm A
    const double det_b = apparatus.eta_b * apparatus.r;
    const double i_in = apparatus.i_in_cps;

    // Window integrals become probabilities through the detected-photon rate
    // of the arm whose dead time defines the window.
    const double win_a = det_a * i_in * g2_integral(g2, 0.0, apparatus.tau_dead_a_ns) * kNsToS;
    const double win_b = det_b * i_in * g2_integral(g2, 0.0, apparatus.tau_dead_b_ns) * kNsToS;
    const double half_a = det_a * i_in * g2_integral(g2, 0.0, 0.5 * apparatus.tau_dead_a_ns) * kNsToS;
    const double half_b = det_b * i_in * g2_integral(g2, 0.0, 0.5 * apparatus.tau_dead_b_ns) * kNsToS;

    const double raw_aa = (1.0 - win_a) * det_a;
    const double raw_ba = det_b * (1.0 - det_b * half_b * half_b);
    const double raw_bb = (1.0 - win_b) * det_b;
    const double raw_ab = det_a * (1.0 - det_a * half_a * half_a);
    for (double v : {raw_aa, raw_ba, raw_bb, raw_ab})
        if (v < -1e-3 || v > 1.0 + 1e-3)
            throw ModelError("raw conditional probability outside [0,1]");

    ProbTable pt;
    pt.p_a = rates.r_a_cps / r_tot;
    pt.p_b = rates.r_b_cps / r_tot;
    pt.p_a_given_a = raw_aa / (raw_aa + raw_ba);
    pt.p_b_given_a = raw_ba / (raw_aa + raw_ba);
    pt.p_a_given_b = raw_ab / (raw_ab + raw_bb);
    pt.p_b_given_b = raw_bb / (raw_ab + raw_bb);
    pt.validate();
    return pt;
}

TupleCounts tuple_frequencies(const BitString& bits) {
    if (bits.size() < 2) throw DomainError("need at least 2 bits for tuple counting");
    TupleCounts c;
    const std::size_t n = bits.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool x = bits[i];
        const bool y = bits[(i + 1) % n];  // wraparound pair (last, first)
        (x ? c.n1 : c.n0)++;
        if (!x && !y) ++c.n00;
        else if (!x && y) ++c.n01;
        else if (x && !y) ++c.n10;
        else ++c.n11;
    }
    return c;
}

ProbTable table_from_counts(const TupleCounts& c) {
    const double n = static_cast<double>(c.total());
    if (n == 0) throw DomainError("empty tuple counts");
    ProbTable pt;
    pt.p_a = static_cast<double>(c.n0) / n;
    pt.p_b = static_cast<double>(c.n1) / n;
    pt.p_a_given_a = c.n0 ? static_cast<double>(c.n00) / static_cast<double>(c.n0) : 0.5;
    pt.p_b_given_a = c.n0 ? static_cast<double>(c.n01) / static_cast<double>(c.n0) : 0.5;
    pt.p_a_given_b = c.n1 ? static_cast<double>(c.n10) / static_cast<double>(c.n1) : 0.5;
    pt.p_b_given_b = c.n1 ? static_cast<double>(c.n11) / static_cast<double>(c.n1) : 0.5;
    return pt;
}

double sigma_multiplier(double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon outside (0,1)");
    // solve erfc(k / sqrt(2)) = epsilon by bisection on the monotone tail
    double lo = 0.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (std::erfc(mid / std::sqrt(2.0)) > epsilon)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

EntropyReport model1_entropy(const EntropyContext& ctx) {
    EntropyReport rep;
    rep.model = 1;
    rep.k_sigma = ctx.k_sigma;
    rep.probs = probs_from_params(ctx.apparatus, ctx.g2);
    rep.f_p = dominant_term(rep.probs);
    rep.h_raw = -log2_safe(rep.f_p);
    rep.delta = propagate_sigma(
        [&](const ApparatusParams& ap) { return dominant_term(probs_from_params(ap, ctx.g2)); },
        ctx.apparatus, ctx.sigmas, PerturbSet::ClickParams);
    rep.h_conservative = conservative_minentropy(rep.f_p, rep.delta, ctx.k_sigma);
    rep.r_total_cps = analytic_click_rates(ctx.apparatus, ctx.g2).total();
    return rep;
}

EntropyReport model2_entropy(const EntropyContext& ctx) {
    EntropyReport rep;
    rep.model = 2;
    rep.k_sigma = ctx.k_sigma;
    rep.probs = probs_from_params(ctx.apparatus, ctx.g2);
    rep.r_total_cps = analytic_click_rates(ctx.apparatus, ctx.g2).total();
    const double g2_0 = ctx.g2.zero();
    if (g2_0 >= 1.0) {
        // no single-photon evidence left: discard everything
        rep.p_e = 1.0;
        rep.f_p = 1.0;
        return rep;
    }
    rep.p_e = 1.0 - std::sqrt(1.0 - g2_0);
    rep.delta_p_e = ctx.delta_g2_0 / (2.0 * std::sqrt(1.0 - g2_0));
    const double f = dominant_term(rep.probs);
    const double delta_f = propagate_sigma(
        [&](const ApparatusParams& ap) { return dominant_term(probs_from_params(ap, ctx.g2)); },
        ctx.apparatus, ctx.sigmas, PerturbSet::ClickParams);
    const double p_eq = rep.p_e + (1.0 - rep.p_e) * f;
    const double delta_peq = std::hypot((1.0 - f) * rep.delta_p_e, (1.0 - rep.p_e) * delta_f);
    rep.f_p = p_eq;
    rep.delta = delta_peq;
    rep.h_raw = -log2_safe(p_eq);
    rep.h_conservative = conservative_minentropy(p_eq, delta_peq, ctx.k_sigma);
    return rep;
}

namespace {

struct BoldBits {
    double p0 = 0.5;
    double p1 = 0.5;
};

// Normalized probabilities of the bold bits 0 = AB, 1 = BA. The second-order
// dead-time suppression uses pooled detector values (the parametric model
// assumes near-equal dead times), so it cancels in the normalization.
BoldBits bold_bit_probs(const ApparatusParams& ap, const G2Model& g2, double t_ns) {
    const ClickRates rates = analytic_click_rates(ap, g2);
    const double p_a = rates.r_a_cps / rates.total();
    const double p_b = rates.r_b_cps / rates.total();
    const double det_a = ap.eta_a * ap.t;
    const double det_b = ap.eta_b * ap.r;
    const double window = ap.i_in_cps * g2_integral(g2, 0.0, t_ns) * kNsToS;
    const double pooled_det = 0.5 * (det_a + det_b);
    const double pooled_half = 0.25 * (ap.tau_dead_a_ns + ap.tau_dead_b_ns);
    const double prev_hit = pooled_det * ap.i_in_cps * g2_integral(g2, 0.0, pooled_half) * kNsToS;

    double w0, w1;
    if (t_ns < pooled_half) {
        // window capped by t: weight = p(start) det_stop window (1 - prev_hit)
        w0 = p_a * det_b * window * (1.0 - prev_hit);
        w1 = p_b * det_a * window * (1.0 - prev_hit);
    } else {
        const double in_half = ap.i_in_cps * g2_integral(g2, 0.0, pooled_half) * kNsToS;
        w0 = p_a * det_b * (window - prev_hit * in_half);
        w1 = p_b * det_a * (window - prev_hit * in_half);
    }
    const double sum = w0 + w1;
    if (!(sum > 0.0)) return {0.5, 0.5};
    return {w0 / sum, w1 / sum};
}

double model3_pcq(const ApparatusParams& ap, const G2Model& g2, double t_ns) {
    const ClickRates rates = analytic_click_rates(ap, g2);
    const double w_s = 2.0 * g2_integral(g2, 0.0, t_ns) * kNsToS;
    const double r_rand = (1.0 - g2.zero()) * rates.r_a_cps * rates.r_b_cps * w_s;
    const double p_c = 1.0 - r_rand / rates.total();
    const BoldBits bb = bold_bit_probs(ap, g2, t_ns);
    const double p01 = bb.p0 * bb.p1;
    const double f = std::max({bb.p0, bb.p1, 2.0 * p01, 1.0 - 2.0 * p01});
    return p_c + (1.0 - p_c) * f;
}

}  // namespace

double quantum_area_rate(const ApparatusParams& apparatus, const G2Model& g2) {
    const ClassicalCrossing cross = classical_crossing(g2);
    if (!cross.found()) return 0.0;
    const ClickRates rates = analytic_click_rates(apparatus, g2);
    const double w_s = 2.0 * g2_integral(g2, 0.0, cross.t_ns) * kNsToS;
    return (1.0 - g2.zero()) * rates.r_a_cps * rates.r_b_cps * w_s;
}

EntropyReport model3_entropy(const EntropyContext& ctx) {
    EntropyReport rep;
    rep.model = 3;
    rep.k_sigma = ctx.k_sigma;
    rep.probs = probs_from_params(ctx.apparatus, ctx.g2);
    const ClickRates rates = analytic_click_rates(ctx.apparatus, ctx.g2);
    rep.r_total_cps = rates.total();

    const ClassicalCrossing cross = classical_crossing(ctx.g2);
    if (!cross.found() || ctx.g2.zero() >= 1.0) {
        rep.p_c = 1.0;
        rep.f_p = 1.0;
        return rep;  // no quantum area
    }
    const double t = cross.t_ns;
    rep.t_cross_ns = t;
    rep.r_rand_cps = quantum_area_rate(ctx.apparatus, ctx.g2);
    rep.p_c = 1.0 - rep.r_rand_cps / rep.r_total_cps;
    const BoldBits bb = bold_bit_probs(ctx.apparatus, ctx.g2, t);
    rep.p_bold0 = bb.p0;
    const double p01 = bb.p0 * bb.p1;
    rep.f_p = rep.p_c + (1.0 - rep.p_c) *
                            std::max({bb.p0, bb.p1, 2.0 * p01, 1.0 - 2.0 * p01});
    rep.h_raw = -log2_safe(rep.f_p);

    rep.delta = propagate_sigma(
        [&](const ApparatusParams& ap) { return model3_pcq(ap, ctx.g2, t); },
        ctx.apparatus, ctx.sigmas, PerturbSet::ClickParams);

    // Crossing shift induced by the classical-line band: t' solves
    // g2(t') = 1 - Delta_1. Reported for diagnostics; folding it into the
    // quadrature sum would overwhelm the bound (see README on model 3).
    if (ctx.delta_unit_line > 0.0) {
        const double target = 1.0 - ctx.delta_unit_line;
        double lo = 0.0, hi = t;
        if (ctx.g2.value(0.0) < target) {
            for (int i = 0; i < 200; ++i) {
                const double mid = 0.5 * (lo + hi);
                (ctx.g2.value(mid) < target ? lo : hi) = mid;
            }
            rep.delta_t_ns = t - 0.5 * (lo + hi);
        }
    }

    rep.h_conservative = conservative_minentropy(rep.f_p, rep.delta, ctx.k_sigma);
    return rep;
}

EntropyReport empirical_entropy(const BitString& bits, int model, const EntropyContext& ctx) {
    const TupleCounts counts = tuple_frequencies(bits);
    EntropyReport rep;
    rep.model = model;
    rep.k_sigma = ctx.k_sigma;
    rep.empirical = true;
    rep.raw_bits = bits.size();
    rep.probs = table_from_counts(counts);
    const double f = dominant_term(rep.probs);
    switch (model) {
        case 1:
            rep.f_p = f;
            break;
        case 2: {
            const double g2_0 = ctx.g2.zero();
            if (g2_0 >= 1.0) {
                rep.p_e = 1.0;
                rep.f_p = 1.0;
            } else {
                rep.p_e = 1.0 - std::sqrt(1.0 - g2_0);
                rep.f_p = rep.p_e + (1.0 - rep.p_e) * f;
            }
            break;
        }
        case 3: {
            // bits are bold bits here; the classical fraction comes from the
            // parametric context
            const EntropyReport par = model3_entropy(ctx);
            rep.p_c = par.p_c;
            rep.p_bold0 = rep.probs.p_a;
            const double p01 = rep.probs.p_a * rep.probs.p_b;
            rep.f_p = rep.p_c + (1.0 - rep.p_c) *
                                    std::max({rep.probs.p_a, rep.probs.p_b, 2.0 * p01,
                                              1.0 - 2.0 * p01});
            break;
        }
        default:
            throw DomainError("model must be 1, 2 or 3");
    }
    rep.h_raw = rep.f_p >= 1.0 ? 0.0 : -log2_safe(rep.f_p);
    rep.h_conservative = rep.h_raw;  // empirical reports carry no parametric band
    return rep;
}

void attach_extraction(EntropyReport& report, std::uint64_t n_raw_bits, double epsilon_total,
                       double duration_s) {
    report.raw_bits = n_raw_bits;
    const ExtractionPlan plan =
        plan_extraction(n_raw_bits, std::max(report.h_conservative, 0.0), epsilon_total);
    report.extractable_bits = plan.k_total;
    report.rate_bps = duration_s > 0.0 ? static_cast<double>(plan.k_total) / duration_s : 0.0;
}

}  // namespace qrng
