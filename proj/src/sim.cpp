#include "qrng/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qrng/g2model.hpp"

namespace qrng {

namespace {
constexpr double kPsPerNs = 1e3;
constexpr double kPsPerS = 1e12;
}  // namespace

std::uint64_t simulate_emitter(const ThreeLevelRates& rates, std::int64_t duration_ps,
                               std::uint64_t seed,
                               const std::function<void(std::int64_t)>& sink) {
    rates.validate();
    if (duration_ps <= 0) throw DomainError("duration must be > 0");
    Xoshiro256pp rng(seed);
    std::uint64_t emitted = 0;
    if (rates.k12 == 0.0) return 0;  // never leaves the ground state

    const double duration_ns = static_cast<double>(duration_ps) / kPsPerNs;
    const double branch_emit = rates.k21 / (rates.k21 + rates.k23);
    double t_ns = 0.0;
    int state = 1;
    while (true) {
        switch (state) {
            case 1:
                t_ns += rng.exponential(rates.k12);
                if (t_ns >= duration_ns) return emitted;
                state = 2;
                break;
            case 2: {
                t_ns += rng.exponential(rates.k21 + rates.k23);
                if (t_ns >= duration_ns) return emitted;
                if (rng.uniform() <= branch_emit) {
                    sink(static_cast<std::int64_t>(t_ns * kPsPerNs));
                    ++emitted;
                    state = 1;
                } else {
                    state = 3;
                }
                break;
            }
            default:
                if (rates.k31 == 0.0) return emitted;  // shelved forever
                t_ns += rng.exponential(rates.k31);
                if (t_ns >= duration_ns) return emitted;
                state = 1;
                break;
        }
    }
}

EmissionStream simulate_emitter(const ThreeLevelRates& rates, std::int64_t duration_ps,
                                std::uint64_t seed) {
    EmissionStream out;
    out.duration_ps = duration_ps;
    out.seed = seed;
    simulate_emitter(rates, duration_ps, seed,
                     [&](std::int64_t t) { out.t_ps.push_back(t); });
    return out;
}

EmissionStream thin_stream(const EmissionStream& stream, double keep_probability,
                           std::uint64_t seed) {
    if (!(keep_probability >= 0.0 && keep_probability <= 1.0))
        throw DomainError("keep probability outside [0,1]");
    EmissionStream out;
    out.duration_ps = stream.duration_ps;
    out.seed = seed;
    Xoshiro256pp rng(seed);
    for (auto t : stream.t_ps)
        if (rng.bernoulli(keep_probability)) out.t_ps.push_back(t);
    return out;
}

EmissionStream merge_background(const EmissionStream& stream, double bg_rate_cps,
                                std::uint64_t seed) {
    if (bg_rate_cps < 0.0) throw DomainError("background rate must be >= 0");
    EmissionStream out;
    out.duration_ps = stream.duration_ps;
    out.seed = seed;
    if (bg_rate_cps == 0.0) {
        out.t_ps = stream.t_ps;
        return out;
    }
    Xoshiro256pp rng(seed);
    const double rate_per_ps = bg_rate_cps / kPsPerS;
    std::vector<std::int64_t> bg;
    double t = rng.exponential(rate_per_ps);
    while (t < static_cast<double>(stream.duration_ps)) {
        bg.push_back(static_cast<std::int64_t>(t));
        t += rng.exponential(rate_per_ps);
    }
    out.t_ps.resize(stream.t_ps.size() + bg.size());
    std::merge(stream.t_ps.begin(), stream.t_ps.end(), bg.begin(), bg.end(),
               out.t_ps.begin());
    return out;
}

DetectorChain::DetectorChain(const ApparatusParams& apparatus, std::uint64_t seed)
    : ap_(apparatus), rng_(seed), next_free_a_ps_(0), next_free_b_ps_(0) {
    ap_.validate();
}

void DetectorChain::feed(std::int64_t t_ps, std::vector<TimeTag>& out) {
    const bool to_a = rng_.uniform() <= ap_.t;  // transmitted
    if (to_a) {
        if (!rng_.bernoulli(ap_.eta_a)) return;
        if (t_ps < next_free_a_ps_) return;  // dead, dropped, window not extended
        next_free_a_ps_ = t_ps + static_cast<std::int64_t>(ap_.tau_dead_a_ns * kPsPerNs);
        out.push_back({Channel::A, t_ps});
    } else {
        if (!rng_.bernoulli(ap_.eta_b)) return;
        if (t_ps < next_free_b_ps_) return;
        next_free_b_ps_ = t_ps + static_cast<std::int64_t>(ap_.tau_dead_b_ns * kPsPerNs);
        out.push_back({Channel::B, t_ps});
    }
}

std::vector<TimeTag> detect(const EmissionStream& stream, const ApparatusParams& apparatus,
                            std::uint64_t seed) {
    DetectorChain chain(apparatus, seed);
    std::vector<TimeTag> out;
    for (auto t : stream.t_ps) chain.feed(t, out);
    return out;
}

std::vector<TimeTag> dead_time_filter(const std::vector<TimeTag>& tags,
                                      double tau_dead_a_ns, double tau_dead_b_ns) {
    if (tau_dead_a_ns < 0.0 || tau_dead_b_ns < 0.0)
        throw DomainError("negative dead time");
    const std::int64_t dead_a = static_cast<std::int64_t>(tau_dead_a_ns * kPsPerNs);
    const std::int64_t dead_b = static_cast<std::int64_t>(tau_dead_b_ns * kPsPerNs);
    std::vector<TimeTag> out;
    out.reserve(tags.size());
    std::int64_t free_a = std::numeric_limits<std::int64_t>::min();
    std::int64_t free_b = free_a;
    for (const auto& tag : tags) {
        auto& next_free = tag.channel == Channel::A ? free_a : free_b;
        if (tag.t_ps < next_free) continue;
        next_free = tag.t_ps + (tag.channel == Channel::A ? dead_a : dead_b);
        out.push_back(tag);
    }
    return out;
}

ClickRates analytic_click_rates(const ApparatusParams& apparatus, const G2Model& g2) {
    apparatus.validate();
    const auto rate = [&](double eta, double coeff, double tau_dead_ns) {
        const double base = eta * coeff * apparatus.i_in_cps;
        const double window_s = g2_integral(g2, 0.0, tau_dead_ns) * 1e-9;
        const double correction = base * base * window_s / 4.0;
        if (correction > base)
            throw ModelError("dead-time correction exceeds first-order click rate");
        return base - correction;
    };
    return {rate(apparatus.eta_a, apparatus.t, apparatus.tau_dead_a_ns),
            rate(apparatus.eta_b, apparatus.r, apparatus.tau_dead_b_ns)};
}

}  // namespace qrng
