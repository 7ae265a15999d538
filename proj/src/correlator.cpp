#include "qrng/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "qrng/entropy.hpp"
#include "qrng/sim.hpp"

namespace qrng {

std::int64_t G2Histogram::total_counts() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

G2Accumulator::G2Accumulator(double tau_rs_ps, double max_lag_ns) {
    if (!(tau_rs_ps > 0.0)) throw DomainError("tau_rs must be > 0");
    if (!(max_lag_ns * 1e3 >= tau_rs_ps)) throw DomainError("max_lag must be >= tau_rs");
    hist_.tau_rs_ps = tau_rs_ps;
    hist_.max_lag_ns = max_lag_ns;
    const auto n_bins = static_cast<std::size_t>(std::llround(2.0 * max_lag_ns * 1e3 / tau_rs_ps));
    hist_.counts.assign(n_bins, 0);
    max_lag_ps_ = static_cast<std::int64_t>(max_lag_ns * 1e3);
}

void G2Accumulator::bin(std::int64_t dt_ps) {
    // dt = t_B - t_A in [-max_lag, max_lag)
    const double pos = (static_cast<double>(dt_ps) + static_cast<double>(max_lag_ps_)) /
                       hist_.tau_rs_ps;
    const auto j = static_cast<std::size_t>(pos);
    if (j < hist_.counts.size()) ++hist_.counts[j];
}

void G2Accumulator::feed(const TimeTag& tag) {
    if (first_ps_ < 0) first_ps_ = tag.t_ps;
    last_ps_ = tag.t_ps;
    if (tag.channel == Channel::A) {
        ++n_a_;
        while (head_b_ < window_b_.size() && tag.t_ps - window_b_[head_b_] > max_lag_ps_)
            ++head_b_;
        for (std::size_t i = head_b_; i < window_b_.size(); ++i)
            bin(window_b_[i] - tag.t_ps);
        window_a_.push_back(tag.t_ps);
    } else {
        ++n_b_;
        while (head_a_ < window_a_.size() && tag.t_ps - window_a_[head_a_] > max_lag_ps_)
            ++head_a_;
        for (std::size_t i = head_a_; i < window_a_.size(); ++i)
            bin(tag.t_ps - window_a_[i]);
        window_b_.push_back(tag.t_ps);
    }
    // keep the sliding windows compact
    if (head_a_ > 4096 && head_a_ * 2 > window_a_.size()) {
        window_a_.erase(window_a_.begin(), window_a_.begin() + static_cast<std::ptrdiff_t>(head_a_));
        head_a_ = 0;
    }
    if (head_b_ > 4096 && head_b_ * 2 > window_b_.size()) {
        window_b_.erase(window_b_.begin(), window_b_.begin() + static_cast<std::ptrdiff_t>(head_b_));
        head_b_ = 0;
    }
}

G2Histogram G2Accumulator::finish() {
    if (first_ps_ >= 0 && last_ps_ > first_ps_) {
        hist_.t_total_s = static_cast<double>(last_ps_ - first_ps_) * 1e-12;
        hist_.r_a_cps = static_cast<double>(n_a_) / hist_.t_total_s;
        hist_.r_b_cps = static_cast<double>(n_b_) / hist_.t_total_s;
    }
    return hist_;
}

G2Histogram g2_histogram(const std::vector<TimeTag>& tags, double tau_rs_ps,
                         double max_lag_ns) {
    G2Accumulator acc(tau_rs_ps, max_lag_ns);
    for (const auto& tag : tags) acc.feed(tag);
    return acc.finish();
}

NormalizedG2 normalize(const G2Histogram& hist) {
    if (!(hist.r_a_cps > 0.0) || !(hist.r_b_cps > 0.0) || !(hist.t_total_s > 0.0))
        throw ModelError("cannot normalize: zero singles rate or integration time");
    NormalizedG2 out;
    out.n_norm = hist.r_a_cps * hist.r_b_cps * hist.tau_rs_ps * 1e-12 * hist.t_total_s;
    out.tau_ns.resize(hist.n_bins());
    out.g2.resize(hist.n_bins());
    out.sigma.resize(hist.n_bins());
    for (std::size_t j = 0; j < hist.n_bins(); ++j) {
        out.tau_ns[j] = hist.bin_center_ns(j);
        out.g2[j] = static_cast<double>(hist.counts[j]) / out.n_norm;
        out.sigma[j] =
            std::sqrt(static_cast<double>(std::max<std::int64_t>(hist.counts[j], 1))) /
            out.n_norm;
    }
    return out;
}

namespace {

struct FitWork {
    const NormalizedG2& c;
    // residuals r_i = (model(tau_i) - g2_i) / sigma_i
    double chi2(const double* p) const {
        double s = 0.0;
        for (std::size_t i = 0; i < c.tau_ns.size(); ++i) {
            const double t = std::abs(c.tau_ns[i]);
            const double m = 1.0 - p[0] * std::exp(-p[1] * t) + p[2] * std::exp(-p[3] * t);
            const double r = (m - c.g2[i]) / c.sigma[i];
            s += r * r;
        }
        return s;
    }
};

}  // namespace

G2FitResult fit_g2(const NormalizedG2& curve) {
    const std::size_t n = curve.tau_ns.size();
    if (n < 4) throw DomainError("fit needs at least 4 bins");

    // initial guesses from the curve shape
    double g2_min = curve.g2[0];
    std::size_t i_min = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (curve.g2[i] < g2_min) { g2_min = curve.g2[i]; i_min = i; }
    double tail = 0.0;
    std::size_t n_tail = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(curve.tau_ns[i]) > 0.75 * std::abs(curve.tau_ns[0])) {
            tail += curve.g2[i];
            ++n_tail;
        }
    }
    tail = n_tail ? tail / static_cast<double>(n_tail) : 1.0;

    double b0 = std::max(tail - 1.0, 1e-3);
    double a0 = std::max(1.0 + b0 - std::max(g2_min, 0.0), 0.05);
    // dip width: first tau(>0) where the curve recovers to 1 - a0/e
    double l1_0 = 0.1;
    const double recover = 1.0 + b0 - a0 / M_E;
    for (std::size_t i = i_min; i < n; ++i) {
        if (curve.g2[i] >= recover && curve.tau_ns[i] > std::abs(curve.tau_ns[i_min])) {
            const double w = curve.tau_ns[i] - curve.tau_ns[i_min];
            if (w > 0) l1_0 = 1.0 / w;
            break;
        }
    }
    double l2_0 = l1_0 / 20.0;

    double p[4] = {a0, l1_0, b0, l2_0};
    FitWork work{curve};
    double lambda = 1e-3;
    double chi2 = work.chi2(p);
    const int max_iter = 200;
    int iter = 0;
    bool converged = false;
    double jtj_store[4][4] = {};

    for (; iter < max_iter; ++iter) {
        double jtj[4][4] = {};
        double jtr[4] = {};
        for (std::size_t i = 0; i < n; ++i) {
            const double t = std::abs(curve.tau_ns[i]);
            const double e1 = std::exp(-p[1] * t);
            const double e2 = std::exp(-p[3] * t);
            const double m = 1.0 - p[0] * e1 + p[2] * e2;
            const double inv_s = 1.0 / curve.sigma[i];
            const double r = (m - curve.g2[i]) * inv_s;
            const double J[4] = {-e1 * inv_s, p[0] * t * e1 * inv_s, e2 * inv_s,
                                 -p[2] * t * e2 * inv_s};
            for (int a = 0; a < 4; ++a) {
                jtr[a] += J[a] * r;
                for (int b = a; b < 4; ++b) jtj[a][b] += J[a] * J[b];
            }
        }
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < a; ++b) jtj[a][b] = jtj[b][a];
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) jtj_store[a][b] = jtj[a][b];

        // solve (JtJ + lambda diag(JtJ)) step = -Jtr by Gaussian elimination
        bool improved = false;
        for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
            double m4[4][5];
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) m4[a][b] = jtj[a][b];
                m4[a][a] *= 1.0 + lambda;
                m4[a][4] = -jtr[a];
            }
            bool singular = false;
            for (int col = 0; col < 4 && !singular; ++col) {
                int piv = col;
                for (int row = col + 1; row < 4; ++row)
                    if (std::abs(m4[row][col]) > std::abs(m4[piv][col])) piv = row;
                if (std::abs(m4[piv][col]) < 1e-300) { singular = true; break; }
                std::swap(m4[col], m4[piv]);
                for (int row = col + 1; row < 4; ++row) {
                    const double f = m4[row][col] / m4[col][col];
                    for (int b = col; b < 5; ++b) m4[row][b] -= f * m4[col][b];
                }
            }
            if (singular) { lambda *= 10.0; continue; }
            double step[4];
            for (int a = 3; a >= 0; --a) {
                double s = m4[a][4];
                for (int b = a + 1; b < 4; ++b) s -= m4[a][b] * step[b];
                step[a] = s / m4[a][a];
            }
            double trial[4];
            for (int a = 0; a < 4; ++a) trial[a] = p[a] + step[a];
            // keep the model in its admissible region
            trial[0] = std::max(trial[0], 0.0);
            trial[2] = std::max(trial[2], 1e-12);
            trial[1] = std::max(trial[1], 1e-9);
            trial[3] = std::clamp(trial[3], 1e-9, trial[1] * (1.0 - 1e-9));
            const double trial_chi2 = work.chi2(trial);
            if (trial_chi2 <= chi2) {
                double rel = 0.0;
                for (int a = 0; a < 4; ++a)
                    rel = std::max(rel, std::abs(trial[a] - p[a]) /
                                            std::max(std::abs(p[a]), 1e-12));
                for (int a = 0; a < 4; ++a) p[a] = trial[a];
                improved = true;
                lambda = std::max(lambda * 0.3, 1e-12);
                if (rel < 1e-10 || chi2 - trial_chi2 < 1e-14 * (1.0 + chi2))
                    converged = true;
                chi2 = trial_chi2;
            } else {
                lambda *= 10.0;
            }
        }
        if (!improved) converged = true;  // no downhill step within damping range
        if (converged) break;
    }

    G2FitResult result;
    result.model = G2Model{p[0], p[1], p[2], p[3]};
    result.residual_norm = std::sqrt(chi2);
    result.iterations = iter;
    result.converged = converged;

    // parameter standard errors from the unscaled (JtJ)^-1 diagonal
    double inv[4][4];
    {
        double m8[4][8];
        for (int a = 0; a < 4; ++a) {
            for (int b = 0; b < 4; ++b) m8[a][b] = jtj_store[a][b];
            for (int b = 0; b < 4; ++b) m8[a][4 + b] = a == b ? 1.0 : 0.0;
        }
        bool ok = true;
        for (int col = 0; col < 4 && ok; ++col) {
            int piv = col;
            for (int row = col + 1; row < 4; ++row)
                if (std::abs(m8[row][col]) > std::abs(m8[piv][col])) piv = row;
            if (std::abs(m8[piv][col]) < 1e-300) { ok = false; break; }
            std::swap(m8[col], m8[piv]);
            const double d = m8[col][col];
            for (int b = 0; b < 8; ++b) m8[col][b] /= d;
            for (int row = 0; row < 4; ++row) {
                if (row == col) continue;
                const double f = m8[row][col];
                for (int b = 0; b < 8; ++b) m8[row][b] -= f * m8[col][b];
            }
        }
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) inv[a][b] = ok ? m8[a][4 + b] : 0.0;
    }
    result.stderr_a = std::sqrt(std::max(inv[0][0], 0.0));
    result.stderr_lambda1 = std::sqrt(std::max(inv[1][1], 0.0));
    result.stderr_b = std::sqrt(std::max(inv[2][2], 0.0));
    result.stderr_lambda2 = std::sqrt(std::max(inv[3][3], 0.0));

    if (!converged) throw FitError("g2 fit did not converge", result);
    return result;
}

NormUncertainty norm_uncertainty(const ApparatusParams& apparatus,
                                 const ParamSigmas& sigmas, const HistogramMeta& meta,
                                 const G2Model& g2) {
    sigmas.validate();
    const auto n_norm_of = [&](const ApparatusParams& ap) {
        const ClickRates r = analytic_click_rates(ap, g2);
        return r.r_a_cps * r.r_b_cps * meta.tau_rs_ps * 1e-12 * meta.t_total_s;
    };
    NormUncertainty out;
    out.n_norm = n_norm_of(apparatus);
    const double d = propagate_sigma(n_norm_of, apparatus, sigmas, PerturbSet::NormFactor);
    out.delta_norm = d;
    out.delta_unit_line = out.n_norm > 0.0 ? d / out.n_norm : 0.0;
    out.delta_g2_0 = g2.zero() * out.delta_unit_line;
    return out;
}

void write_g2_csv(const NormalizedG2& curve, std::ostream& out) {
    out << "tau_ns,g2,sigma\n";
    char buf[160];
    for (std::size_t i = 0; i < curve.tau_ns.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", curve.tau_ns[i], curve.g2[i],
                      curve.sigma[i]);
        out << buf;
    }
    if (!out) throw IoError("failed writing g2 CSV");
}

}  // namespace qrng
