#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bandsim/banding.hpp"
#include "bandsim/isp.hpp"
#include "bandsim/specband.hpp"
#include "bandsim/traj.hpp"

namespace bandsim {

// Parameter ranges the synth command samples BandingSpecs from. These are
// tunable configuration, not contract; the defaults span the stripe
// morphologies the mask generator covers.
struct SynthRanges {
    std::vector<BandPattern> patterns{BandPattern::Simple, BandPattern::Diamond, BandPattern::Curve,
                                      BandPattern::Cracked, BandPattern::Complex};
    double period_min_px = 24.0; // sampled log-uniform
    double period_max_px = 220.0;
    double duty_min = 0.25, duty_max = 0.6;
    double darkness_min = 0.2, darkness_max = 0.7;
    double jitter_min = 0.0, jitter_max = 0.35;
    double feather_min_px = 1.0;
    double feather_max_frac = 0.25; // of the sampled period
    double orientation_min_deg = -20.0, orientation_max_deg = 20.0;
    double curve_amp_min_px = 2.0, curve_amp_max_px = 12.0;
    double curve_wavelength_min_px = 48.0, curve_wavelength_max_px = 256.0;
    double crack_density_min = 0.2, crack_density_max = 0.6;
    double gain_floor = 0.05;
};

struct SpecbandConfig {
    double rho1 = 0.08;
    double rho2 = 0.45;
    int order_n = 4;
    double eps = 1e-6;
    int ref_size_m0 = 512;
    BandWeights weights{1.0, 0.35, 1.0};
};

struct RunConfig {
    std::string input_dir;
    std::string output_dir;
    std::string ref_dir; // evaluate: ground-truth directory
    std::uint64_t master_seed = 0;
    int workers = 0; // 0 = hardware concurrency
    bool crop512 = false;
    int png_bit_depth = 8;

    IspParams isp;
    bool randomize_isp = false;
    SynthRanges ranges;
    SpecbandConfig specband;

    double ta_gamma = 1.0;
    double ta_eps = 1e-8;
    std::map<std::string, double> ta_layer_weights; // empty entry -> default weight
    double ta_default_layer_weight = 1.0;
};

// Config file is a JSON document mirroring RunConfig; missing keys keep their
// defaults. save_config writes the resolved snapshot (workers excluded: an
// execution detail that never affects outputs).
RunConfig load_config(const std::string& path);
void save_config_snapshot(const RunConfig& cfg, const std::string& path);
std::string config_to_json(const RunConfig& cfg, bool include_workers);
RunConfig config_from_json(const std::string& json_text);

// Per-file seed: every derived quantity for one input flows from this.
std::uint64_t file_seed(std::uint64_t master_seed, const std::string& filename);

// Deterministic BandingSpec draw for one input file.
BandingSpec draw_banding_spec(const SynthRanges& ranges, std::uint64_t seed);

// Subcommand bodies; return process exit codes (0 = no per-item failures).
int run_synth(const RunConfig& cfg);
int run_decompose(const RunConfig& cfg);
int run_taloss(const RunConfig& cfg);
int run_evaluate(const RunConfig& cfg);

} // namespace bandsim
