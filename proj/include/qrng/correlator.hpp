#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qrng/apparatus.hpp"
#include "qrng/g2model.hpp"
#include "qrng/tags.hpp"

namespace qrng {

// Start-multiple-stop coincidence histogram between the two channels.
// Lag tau = t_B - t_A, so negative bins hold B-before-A coincidences.
struct G2Histogram {
    double tau_rs_ps = 500.0;
    double max_lag_ns = 1500.0;
    std::vector<std::int64_t> counts;  // 2 * max_lag / tau_rs bins
    double t_total_s = 0.0;
    double r_a_cps = 0.0;
    double r_b_cps = 0.0;

    std::size_t n_bins() const { return counts.size(); }
    double bin_center_ns(std::size_t j) const {
        return -max_lag_ns + (static_cast<double>(j) + 0.5) * tau_rs_ps * 1e-3;
    }
    std::int64_t total_counts() const;
};

G2Histogram g2_histogram(const std::vector<TimeTag>& tags, double tau_rs_ps,
                         double max_lag_ns);

// Incremental accumulation for chunked streams.
class G2Accumulator {
  public:
    G2Accumulator(double tau_rs_ps, double max_lag_ns);
    void feed(const TimeTag& tag);
    G2Histogram finish();

  private:
    G2Histogram hist_;
    std::vector<std::int64_t> window_a_;  // recent A clicks within max_lag
    std::vector<std::int64_t> window_b_;
    std::size_t head_a_ = 0, head_b_ = 0;
    std::int64_t max_lag_ps_ = 0;
    std::int64_t first_ps_ = -1, last_ps_ = 0;
    std::uint64_t n_a_ = 0, n_b_ = 0;
    void bin(std::int64_t dt_ps);
};

struct NormalizedG2 {
    std::vector<double> tau_ns;
    std::vector<double> g2;
    std::vector<double> sigma;  // Poisson, sqrt(max(count,1)) / N_norm
    double n_norm = 0.0;        // expected flat-level counts per bin
};

// Divides by N_norm = r_A r_B tau_rs T_total.
NormalizedG2 normalize(const G2Histogram& hist);

struct G2FitResult {
    G2Model model;
    double stderr_a = 0.0;
    double stderr_lambda1 = 0.0;
    double stderr_b = 0.0;
    double stderr_lambda2 = 0.0;
    double residual_norm = 0.0;  // sqrt(chi2)
    int iterations = 0;
    bool converged = false;
};

// Damped Gauss-Newton least squares of the two-exponential model with
// analytic Jacobian; throws ModelError carrying the last iterate on
// non-convergence.
G2FitResult fit_g2(const NormalizedG2& curve);

struct FitError : ModelError {
    FitError(const std::string& what, const G2FitResult& last)
        : ModelError(what), last_iterate(last) {}
    G2FitResult last_iterate;
};

struct NormUncertainty {
    double n_norm = 0.0;
    double delta_norm = 0.0;     // absolute, same units as N_norm
    double delta_unit_line = 0.0;  // Delta_1 = delta_norm / N_norm
    double delta_g2_0 = 0.0;       // g2(0) * Delta_1
};

struct HistogramMeta {
    double tau_rs_ps = 500.0;
    double t_total_s = 0.0;
};

// Uncertainty of the normalization factor by quadrature over the partial
// derivatives in R, eta_A, eta_B, I_in and the two dead times.
NormUncertainty norm_uncertainty(const ApparatusParams& apparatus,
                                 const ParamSigmas& sigmas, const HistogramMeta& meta,
                                 const G2Model& g2);

void write_g2_csv(const NormalizedG2& curve, std::ostream& out);

}  // namespace qrng
