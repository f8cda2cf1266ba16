#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tubal/solver.hpp"

namespace tubal::io {

/// Scalar run configuration. Defaults are the desk-scale reference
/// configuration (n = 10, k = 4, r = 3, m = 254, R = 200, alpha = 1e-7,
/// 3500 iterations). See README for the stepsize defaults.
struct RunConfig {
    int n = 10;
    int k = 4;
    int r = 3;
    int R = 200;
    int m = 254;
    double mu = 0.036;
    double alpha = 1e-7;
    long iters = 3500;
    int stride = 10;
    std::uint64_t seed = 1;
    solver::Normalization normalization = solver::Normalization::kSpectral;
    std::string out_dir = ".";

    // experiment thresholds and grids
    double tau = 0.1;                 // iterations-to-threshold target
    double alpha_grid_max = 1e-3;     // alpha sweep: log grid from max down to min
    double alpha_grid_min = 1e-9;
    int alpha_grid_points = 7;
    int alpha_sweep_seeds = 5;
    double alpha_sweep_mu = 0.16;     // sweep-specific stepsize, see README
    std::string rank_grid = "10,50,100,200,400";
    int rank_sweep_seeds = 20;
    int alignment_window = 500;
    double alignment_band = 0.05;
    int knee_window = 51;             // strides per moving-average window
    int knee_consecutive = 10;        // consecutive decreasing windows
    bool track_power = false;
    bool record_spectra = false;
    int rip_rank = 1;
    int rip_trials = 500;
    int stat_trials = 500;

    std::vector<int> rank_grid_values() const;

    /// Every field as key=value in a fixed order; the provenance block and
    /// the resolved-config printout both come from here.
    std::vector<std::pair<std::string, std::string>> to_pairs() const;
};

/// Parse `key = value` lines ('#' comments, blank lines allowed). Unknown
/// and duplicate keys are rejected. Values are validated after parsing.
RunConfig parse_config(const std::string& text);

/// parse_config over a whole file.
RunConfig load_config(const std::string& path);

/// Re-assemble a config from provenance pairs (the inverse of to_pairs).
RunConfig config_from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs);

void validate(const RunConfig& c);

std::string format_double(double v);  // 17 significant digits, round-trip exact

}  // namespace tubal::io
