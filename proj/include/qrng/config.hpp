#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "qrng/apparatus.hpp"
#include "qrng/emitter.hpp"
#include "qrng/extractor.hpp"

namespace qrng {

// Flat dotted-key configuration; all defaults equal the reference device
// parameters the library is calibrated against.
struct PipelineConfig {
    PowerModel power;
    ApparatusParams apparatus;
    ParamSigmas sigmas;

    double sim_power_mw = 0.026;
    double sim_duration_s = 60.0;
    std::uint64_t sim_seed = 20260809;
    double sim_bg_rate_override_cps = -1.0;  // negative: from the power model

    double hist_tau_rs_ps = 500.0;
    double hist_max_lag_ns = 1500.0;
    double rates_window_s = 1.0;

    double k_sigma = 11.5;
    double epsilon = 0x1p-100;
    std::string model = "all";  // 1 | 2 | 3 | all

    std::uint64_t extract_n_block = 8192;
    HashSeed extract_seed = seed_from_hex(
        "0123456789abcdef0123456789abcdef0123456789abcdef0123456789abcdef");

    double curve_power_max_mw = 0.3;
    int curve_points = 50;

    void validate() const;
};

// "key = value" lines with '#' comments; unknown keys are an error.
PipelineConfig load_config(std::istream& in);
PipelineConfig load_config_file(const std::string& path);

// "2^-100" or a plain floating literal
double parse_epsilon(const std::string& text);

}  // namespace qrng
