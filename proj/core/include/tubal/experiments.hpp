#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubal/config.hpp"
#include "tubal/solver.hpp"

namespace tubal::experiments {

/// Stage boundaries detected from the emitted trace. t_knee is the first
/// recorded iteration where the smoothed test error decreases for
/// `knee_consecutive` consecutive moving-average windows.
struct StageReport {
    bool determined = false;
    long t_knee = -1;
    long t_angle_min = -1;
    double angle_min = 0.0;
};

struct TwoStageResult {
    std::vector<solver::IterateMetrics> trace;
    StageReport stage;
};

TwoStageResult exp_two_stage(const io::RunConfig& c);

struct AlignmentRow {
    long t = 0;
    double angle_Lt_L = 0.0;
    double angle_Ltilde_L = 0.0;
    double power_gap = 0.0;
};

struct AlignmentResult {
    std::vector<AlignmentRow> trace;
    double max_band = 0.0;      // max |angle(L_t,L) - angle(Ltilde_t,L)| over the window
    double max_power_gap = 0.0;
    bool within_band = false;
};

AlignmentResult exp_alignment(const io::RunConfig& c);

struct SweepRow {
    double value = 0.0;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    double final_test_err = 0.0;
    std::optional<long> iters_to_threshold;
};

struct SweepAggregate {
    double value = 0.0;
    double mean_err = 0.0, min_err = 0.0, max_err = 0.0;
    double mean_iters = 0.0;  // missing cells counted at the iteration cap
    int missing = 0;
    int count = 0;
};

struct SweepResult {
    std::string parameter;
    long iters_cap = 0;
    std::vector<SweepRow> rows;
};

/// Aggregates recomputed from the rows, one entry per distinct value in
/// first-appearance order.
std::vector<SweepAggregate> aggregate(const SweepResult& s);

SweepResult exp_alpha_sweep(const io::RunConfig& c);
SweepResult exp_rank_sweep(const io::RunConfig& c);

/// Least-squares slope of log(final_test_err) against log(value) over all
/// rows; empty when fewer than two distinct values exist.
std::optional<double> loglog_slope(const SweepResult& s);

/// Spearman rank correlation between value and mean final error.
double spearman_value_vs_mean_err(const std::vector<SweepAggregate>& agg);

struct StatReport {
    int trials = 0;
    double norm_bound = 0.0;        // 3 sqrt(k max(n,R)/R)
    double align_lo = 0.5, align_hi = 2.0;
    double sigma_min_bound = 0.0;   // epsilon = 0.1 lower bound
    double freq_norm = 0.0;
    double freq_align = 0.0;
    double freq_sigma_min = 0.0;
};

/// Frequencies of the three random-tensor events over `trials` draws:
/// spectral-norm bound, fixed-column alignment bracket, per-slice smallest
/// singular value lower bound.
StatReport stat_random_tensor_checks(const io::RunConfig& c, int trials, std::uint64_t seed);

// --- trace verdict helpers (all computed from emitted rows only) ---

/// Centered moving average; window must be odd. Shorter inputs give an
/// empty result.
std::vector<double> moving_average(const std::vector<double>& v, int window);

StageReport detect_stages(const std::vector<solver::IterateMetrics>& trace, int window,
                          int consecutive);

/// True when the smoothed sequence decreases to its minimum and rises after
/// it, allowing a small fraction of tolerance-sized violations.
bool unimodal(const std::vector<double>& values, int window, double tol,
              double max_violation_frac);

/// alpha grid used by exp_alpha_sweep: log-spaced from max down to min.
std::vector<double> alpha_grid(const io::RunConfig& c);

/// Re-run an experiment from the provenance header of its own CSV and
/// return the regenerated CSV bytes. `kind` selects the experiment.
std::string replay_csv(const std::string& csv_text, const std::string& kind);

/// CSV emission for each experiment (identical bytes under identical config).
std::string two_stage_csv(const io::RunConfig& c, const TwoStageResult& r);
std::string alignment_csv(const io::RunConfig& c, const AlignmentResult& r);
std::string sweep_csv(const io::RunConfig& c, const SweepResult& r);

}  // namespace tubal::experiments
