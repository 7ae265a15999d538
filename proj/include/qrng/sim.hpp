#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "qrng/apparatus.hpp"
#include "qrng/emitter.hpp"
#include "qrng/rng.hpp"
#include "qrng/tags.hpp"

namespace qrng {

// Emission timestamps of one stochastic emitter run.
struct EmissionStream {
    std::vector<std::int64_t> t_ps;  // strictly increasing
    std::int64_t duration_ps = 0;
    std::uint64_t seed = 0;
};

// Exact next-jump sampling of the three-state chain; emissions are the 2->1
// transitions. The sink receives timestamps in ps, strictly increasing.
// Returns the number of emissions.
std::uint64_t simulate_emitter(const ThreeLevelRates& rates, std::int64_t duration_ps,
                               std::uint64_t seed,
                               const std::function<void(std::int64_t)>& sink);

EmissionStream simulate_emitter(const ThreeLevelRates& rates, std::int64_t duration_ps,
                                std::uint64_t seed);

// Bernoulli thinning (collection losses upstream of the beam splitter).
EmissionStream thin_stream(const EmissionStream& stream, double keep_probability,
                           std::uint64_t seed);

// Adds a homogeneous Poisson background and re-sorts.
EmissionStream merge_background(const EmissionStream& stream, double bg_rate_cps,
                                std::uint64_t seed);

// Beam-splitter Bernoulli split (A = transmitted), per-detector efficiency
// thinning, then non-paralyzable dead-time suppression per channel.
std::vector<TimeTag> detect(const EmissionStream& stream, const ApparatusParams& apparatus,
                            std::uint64_t seed);

// Stateful single-photon detection chain for streaming use; feed() accepts
// beam-splitter-incident photons in time order and appends surviving clicks.
class DetectorChain {
  public:
    DetectorChain(const ApparatusParams& apparatus, std::uint64_t seed);
    void feed(std::int64_t t_ps, std::vector<TimeTag>& out);

  private:
    ApparatusParams ap_;
    Xoshiro256pp rng_;
    std::int64_t next_free_a_ps_;
    std::int64_t next_free_b_ps_;
};

// Per-detector non-paralyzable dead-time filter; clicks within the dead
// window of an accepted click on the same channel are dropped and do not
// extend the window. Idempotent.
std::vector<TimeTag> dead_time_filter(const std::vector<TimeTag>& tags,
                                      double tau_dead_a_ns, double tau_dead_b_ns);

struct ClickRates {
    double r_a_cps = 0.0;
    double r_b_cps = 0.0;
    double total() const { return r_a_cps + r_b_cps; }
};

// Dead-time-corrected click rates: r = eta X I - (eta X I)^2 * Int/4 with
// Int the g2-weighted dead-time window of that detector.
ClickRates analytic_click_rates(const ApparatusParams& apparatus, const G2Model& g2);

}  // namespace qrng
