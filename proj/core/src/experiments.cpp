#include "tubal/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "tubal/trace.hpp"

namespace tubal::experiments {

using io::RunConfig;
using solver::GDState;
using solver::IterateMetrics;
using solver::MetricsConfig;
using solver::ProblemInstance;

namespace {

ProblemInstance instance_from(const RunConfig& c, double alpha, double mu, int R,
                              std::uint64_t seed) {
    return solver::make_instance(c.n, c.r, c.k, R, c.m, alpha, mu, seed, c.normalization);
}

void parallel_for(int cells, const std::function<void(int)>& body) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(cells));
    if (workers <= 1) {
        for (int i = 0; i < cells; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= cells) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

std::vector<double> moving_average(const std::vector<double>& v, int window) {
    if (window < 1 || window % 2 == 0) throw InvalidDims("moving_average: window must be odd");
    const int half = window / 2;
    std::vector<double> out;
    if (static_cast<int>(v.size()) < window) return out;
    out.reserve(v.size() - static_cast<size_t>(window) + 1);
    double acc = std::accumulate(v.begin(), v.begin() + window, 0.0);
    out.push_back(acc / window);
    for (size_t i = static_cast<size_t>(window); i < v.size(); ++i) {
        acc += v[i] - v[i - static_cast<size_t>(window)];
        out.push_back(acc / window);
    }
    (void)half;
    return out;
}

StageReport detect_stages(const std::vector<IterateMetrics>& trace, int window,
                          int consecutive) {
    StageReport rep;
    if (trace.empty()) return rep;
    std::vector<double> err, angle;
    err.reserve(trace.size());
    for (const auto& m : trace) {
        err.push_back(m.test_err);
        angle.push_back(m.angle_L_Lt);
    }
    const std::vector<double> ma_err = moving_average(err, window);
    const std::vector<double> ma_angle = moving_average(angle, window);
    if (ma_err.empty()) return rep;
    const int half = window / 2;

    // smallest window index whose moving average decreases for `consecutive`
    // consecutive steps
    long knee_idx = -1;
    for (size_t i = 0; i + static_cast<size_t>(consecutive) < ma_err.size(); ++i) {
        bool ok = true;
        for (int j = 0; j < consecutive; ++j) {
            if (!(ma_err[i + static_cast<size_t>(j) + 1] < ma_err[i + static_cast<size_t>(j)])) {
                ok = false;
                break;
            }
        }
        if (ok) {
            knee_idx = static_cast<long>(i);
            break;
        }
    }
    if (knee_idx >= 0) {
        rep.determined = true;
        rep.t_knee = trace[static_cast<size_t>(knee_idx + half)].t;
    }
    const auto min_it = std::min_element(ma_angle.begin(), ma_angle.end());
    if (min_it != ma_angle.end()) {
        const long idx = static_cast<long>(min_it - ma_angle.begin());
        rep.t_angle_min = trace[static_cast<size_t>(idx + half)].t;
        rep.angle_min = *min_it;
    }
    return rep;
}

bool unimodal(const std::vector<double>& values, int window, double tol,
              double max_violation_frac) {
    std::vector<double> ma = moving_average(values, window);
    if (ma.size() < 3) return false;
    const size_t min_idx =
        static_cast<size_t>(std::min_element(ma.begin(), ma.end()) - ma.begin());
    size_t bad_prefix = 0, bad_suffix = 0;
    for (size_t i = 0; i + 1 <= min_idx; ++i) {
        if (ma[i + 1] > ma[i] + tol) ++bad_prefix;
    }
    for (size_t i = min_idx; i + 1 < ma.size(); ++i) {
        if (ma[i + 1] < ma[i] - tol) ++bad_suffix;
    }
    const double nprefix = std::max<size_t>(1, min_idx);
    const double nsuffix = std::max<size_t>(1, ma.size() - 1 - min_idx);
    // both legs must exist for "decreases to a minimum, later increases"
    if (min_idx == 0 || min_idx + 1 == ma.size()) return false;
    return bad_prefix / nprefix <= max_violation_frac &&
           bad_suffix / nsuffix <= max_violation_frac;
}

TwoStageResult exp_two_stage(const RunConfig& c) {
    ProblemInstance p = instance_from(c, c.alpha, c.mu, c.R, c.seed);
    MetricsConfig mc;
    mc.stride = c.stride;
    mc.track_power = c.track_power;
    mc.record_slice_spectra = c.record_spectra;
    TwoStageResult out;
    out.trace = solver::run_gd(p, c.iters, mc);
    out.stage = detect_stages(out.trace, c.knee_window, c.knee_consecutive);
    return out;
}

AlignmentResult exp_alignment(const RunConfig& c) {
    ProblemInstance p = instance_from(c, c.alpha, c.mu, c.R, c.seed);
    solver::MetricsContext ctx = solver::make_metrics_context(p);
    GDState s = solver::init_state(p);
    TubalTensor u_tilde = s.U;

    AlignmentResult out;
    auto record = [&](long t) {
        AlignmentRow row;
        row.t = t;
        TubalTensor lt = solver::take_columns(tsvd(s.U, true).U, p.r);
        TubalTensor ltt = solver::take_columns(tsvd(u_tilde, true).U, p.r);
        row.angle_Lt_L = principal_angle(ctx.L, lt);
        row.angle_Ltilde_L = principal_angle(ctx.L, ltt);
        const double denom = spectral_norm(u_tilde);
        row.power_gap = denom > 0.0 ? spectral_norm(s.U - u_tilde) / denom : 0.0;
        out.trace.push_back(row);
        out.max_band = std::max(out.max_band, std::abs(row.angle_Lt_L - row.angle_Ltilde_L));
        out.max_power_gap = std::max(out.max_power_gap, row.power_gap);
    };

    record(0);
    for (long t = 1; t <= c.alignment_window; ++t) {
        s = solver::gd_step(p, s);
        u_tilde = solver::power_step(p, ctx.M, u_tilde);
        if (t % c.stride == 0 || t == c.alignment_window) record(t);
    }
    out.within_band = out.max_band <= c.alignment_band;
    return out;
}

namespace {

// Sweep cells are paired across the grid: replicate i solves the same
// problem instance at every parameter value (common random numbers), so the
// aggregate isolates the parameter's effect instead of instance variance.
// For the alpha sweep this reproduces the U_0 = alpha * U setup exactly: the
// same unit draw is rescaled by each alpha.
std::uint64_t cell_seed(std::uint64_t master, int replicate) {
    return mix_seed(master, 0x9d5ull + static_cast<std::uint64_t>(replicate));
}

SweepRow run_cell(const RunConfig& c, double value, double alpha, double mu, int R,
                  std::uint64_t seed) {
    ProblemInstance p = instance_from(c, alpha, mu, R, seed);
    GDState s = solver::init_state(p);
    TubalTensor xxt = tprod(p.X, ttranspose(p.X));
    const double norm_xxt = fro_norm(xxt);

    SweepRow row;
    row.value = value;
    row.seed = seed;
    for (long t = 1; t <= c.iters; ++t) {
        s = solver::gd_step(p, s);
        if (!row.iters_to_threshold && (t % c.stride == 0 || t == c.iters)) {
            const double err = fro_norm(tprod(s.U, ttranspose(s.U)) - xxt) / norm_xxt;
            if (err <= c.tau) row.iters_to_threshold = t;
        }
    }
    row.final_loss = s.residual.squaredNorm();
    row.final_test_err = fro_norm(tprod(s.U, ttranspose(s.U)) - xxt) / norm_xxt;
    return row;
}

}  // namespace

std::vector<double> alpha_grid(const RunConfig& c) {
    std::vector<double> grid;
    if (c.alpha_grid_points == 1) {
        grid.push_back(c.alpha_grid_max);
        return grid;
    }
    const double la = std::log(c.alpha_grid_max);
    const double lb = std::log(c.alpha_grid_min);
    for (int i = 0; i < c.alpha_grid_points; ++i) {
        grid.push_back(std::exp(la + (lb - la) * i / (c.alpha_grid_points - 1)));
    }
    return grid;
}

SweepResult exp_alpha_sweep(const RunConfig& c) {
    const std::vector<double> grid = alpha_grid(c);
    SweepResult out;
    out.parameter = "alpha";
    out.iters_cap = c.iters;
    const int cells = static_cast<int>(grid.size()) * c.alpha_sweep_seeds;
    out.rows.resize(static_cast<size_t>(cells));
    parallel_for(cells, [&](int i) {
        const int gi = i / c.alpha_sweep_seeds;
        const int rep = i % c.alpha_sweep_seeds;
        const double a = grid[static_cast<size_t>(gi)];
        out.rows[static_cast<size_t>(i)] =
            run_cell(c, a, a, c.alpha_sweep_mu, c.R, cell_seed(c.seed, rep));
    });
    return out;
}

SweepResult exp_rank_sweep(const RunConfig& c) {
    const std::vector<int> grid = c.rank_grid_values();
    SweepResult out;
    out.parameter = "R";
    out.iters_cap = c.iters;
    const int cells = static_cast<int>(grid.size()) * c.rank_sweep_seeds;
    out.rows.resize(static_cast<size_t>(cells));
    parallel_for(cells, [&](int i) {
        const int gi = i / c.rank_sweep_seeds;
        const int rep = i % c.rank_sweep_seeds;
        const int R = grid[static_cast<size_t>(gi)];
        out.rows[static_cast<size_t>(i)] = run_cell(c, static_cast<double>(R), c.alpha, c.mu,
                                                    R, cell_seed(c.seed, rep));
    });
    return out;
}

std::vector<SweepAggregate> aggregate(const SweepResult& s) {
    std::vector<SweepAggregate> agg;
    std::map<double, size_t> index;
    for (const auto& row : s.rows) {
        if (!index.count(row.value)) {
            index[row.value] = agg.size();
            SweepAggregate a;
            a.value = row.value;
            a.min_err = row.final_test_err;
            a.max_err = row.final_test_err;
            agg.push_back(a);
        }
        SweepAggregate& a = agg[index[row.value]];
        a.mean_err += row.final_test_err;
        a.min_err = std::min(a.min_err, row.final_test_err);
        a.max_err = std::max(a.max_err, row.final_test_err);
        if (row.iters_to_threshold) {
            a.mean_iters += static_cast<double>(*row.iters_to_threshold);
        } else {
            a.mean_iters += static_cast<double>(s.iters_cap);
            ++a.missing;
        }
        ++a.count;
    }
    for (auto& a : agg) {
        a.mean_err /= a.count;
        a.mean_iters /= a.count;
    }
    return agg;
}

std::optional<double> loglog_slope(const SweepResult& s) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    std::map<double, int> distinct;
    for (const auto& row : s.rows) {
        if (!(row.value > 0.0) || !(row.final_test_err > 0.0)) continue;
        ++distinct[row.value];
        const double x = std::log(row.value);
        const double y = std::log(row.final_test_err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (distinct.size() < 2) return std::nullopt;
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::nullopt;
    return (n * sxy - sx * sy) / denom;
}

namespace {

std::vector<double> ranks(std::vector<double> v) {
    std::vector<size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    size_t i = 0;
    while (i < order.size()) {
        size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t u = i; u <= j; ++u) rank[order[u]] = avg;
        i = j + 1;
    }
    return rank;
}

}  // namespace

double spearman_value_vs_mean_err(const std::vector<SweepAggregate>& agg) {
    if (agg.size() < 2) return 0.0;
    std::vector<double> vals, errs;
    for (const auto& a : agg) {
        vals.push_back(a.value);
        errs.push_back(a.mean_err);
    }
    const std::vector<double> rv = ranks(vals);
    const std::vector<double> re = ranks(errs);
    const double n = static_cast<double>(agg.size());
    double mv = 0, me = 0;
    for (size_t i = 0; i < agg.size(); ++i) {
        mv += rv[i];
        me += re[i];
    }
    mv /= n;
    me /= n;
    double num = 0, dv = 0, de = 0;
    for (size_t i = 0; i < agg.size(); ++i) {
        num += (rv[i] - mv) * (re[i] - me);
        dv += (rv[i] - mv) * (rv[i] - mv);
        de += (re[i] - me) * (re[i] - me);
    }
    if (dv == 0.0 || de == 0.0) return 0.0;
    return num / std::sqrt(dv * de);
}

StatReport stat_random_tensor_checks(const RunConfig& c, int trials, std::uint64_t seed) {
    StatReport rep;
    rep.trials = trials;
    const int n = c.n, R = c.R, r = c.r, k = c.k;
    rep.norm_bound = 3.0 * std::sqrt(static_cast<double>(k) * std::max(n, R) / R);
    if (R > 2 * r) {
        rep.sigma_min_bound = 0.1 * std::sqrt(static_cast<double>(k)) *
                              (std::sqrt(static_cast<double>(R)) - std::sqrt(2.0 * r - 1.0)) /
                              std::sqrt(static_cast<double>(R));
    } else {
        rep.sigma_min_bound =
            0.1 * std::sqrt(static_cast<double>(k)) / std::sqrt(static_cast<double>(r) * R);
    }
    if (trials == 0) return rep;

    // fixed unit tensor-column: e1 in every Fourier slice
    TubalTensor v1(n, 1, k);
    v1(0, 0, 0) = 1.0;

    const double inv_sqrt_R = 1.0 / std::sqrt(static_cast<double>(R));
    int ok_norm = 0, ok_align = 0, ok_smin = 0;
    for (int t = 0; t < trials; ++t) {
        TubalTensor u = random_gaussian(n, R, k, inv_sqrt_R, mix_seed(seed, 3 * t));
        if (spectral_norm(u) <= rep.norm_bound) ++ok_norm;
        const double a = fro_norm(tprod(ttranspose(u), v1)) / std::sqrt(static_cast<double>(k));
        if (a >= rep.align_lo && a <= rep.align_hi) ++ok_align;
        TubalTensor g = random_gaussian(r, R, k, inv_sqrt_R, mix_seed(seed, 3 * t + 1));
        if (sigma_min_tensor(g) >= rep.sigma_min_bound) ++ok_smin;
    }
    rep.freq_norm = static_cast<double>(ok_norm) / trials;
    rep.freq_align = static_cast<double>(ok_align) / trials;
    rep.freq_sigma_min = static_cast<double>(ok_smin) / trials;
    return rep;
}

std::string two_stage_csv(const RunConfig& c, const TwoStageResult& r) {
    std::string out = io::trace_csv_string(c, r.trace);
    out += "# stage_determined=" + std::string(r.stage.determined ? "1" : "0") + "\n";
    out += "# t_knee=" + std::to_string(r.stage.t_knee) + "\n";
    out += "# t_angle_min=" + std::to_string(r.stage.t_angle_min) + "\n";
    out += "# angle_min=" + io::format_double(r.stage.angle_min) + "\n";
    return out;
}

std::string alignment_csv(const RunConfig& c, const AlignmentResult& r) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(r.trace.size());
    for (const auto& row : r.trace) {
        rows.push_back({std::to_string(row.t), io::format_double(row.angle_Lt_L),
                        io::format_double(row.angle_Ltilde_L),
                        io::format_double(row.power_gap)});
    }
    std::string out = io::table_csv_string(
        c, {"t", "angle_Lt_L", "angle_Ltilde_L", "power_gap"}, rows);
    out += "# max_band=" + io::format_double(r.max_band) + "\n";
    out += "# max_power_gap=" + io::format_double(r.max_power_gap) + "\n";
    out += "# within_band=" + std::string(r.within_band ? "1" : "0") + "\n";
    return out;
}

std::string sweep_csv(const RunConfig& c, const SweepResult& r) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(r.rows.size());
    for (const auto& row : r.rows) {
        rows.push_back({r.parameter, io::format_double(row.value), std::to_string(row.seed),
                        io::format_double(row.final_loss),
                        io::format_double(row.final_test_err),
                        row.iters_to_threshold ? std::to_string(*row.iters_to_threshold)
                                               : std::string()});
    }
    return io::table_csv_string(
        c, {"parameter", "value", "seed", "final_loss", "final_test_err", "iters_to_threshold"},
        rows);
}

std::string replay_csv(const std::string& csv_text, const std::string& kind) {
    io::CsvData data = io::parse_csv(csv_text);
    // keep only real config keys (verdict comments are appended after rows)
    std::vector<std::pair<std::string, std::string>> pairs;
    const RunConfig probe;
    std::vector<std::string> known;
    for (const auto& [key, value] : probe.to_pairs()) known.push_back(key);
    for (const auto& kv : data.provenance) {
        if (std::find(known.begin(), known.end(), kv.first) != known.end()) {
            pairs.push_back(kv);
        }
    }
    RunConfig c = io::config_from_pairs(pairs);
    if (kind == "two-stage") return two_stage_csv(c, exp_two_stage(c));
    if (kind == "power") return alignment_csv(c, exp_alignment(c));
    if (kind == "sweep-alpha") return sweep_csv(c, exp_alpha_sweep(c));
    if (kind == "sweep-rank") return sweep_csv(c, exp_rank_sweep(c));
    if (kind == "run") {
        solver::MetricsConfig mc;
        mc.stride = c.stride;
        mc.track_power = c.track_power;
        mc.record_slice_spectra = c.record_spectra;
        ProblemInstance p = instance_from(c, c.alpha, c.mu, c.R, c.seed);
        return io::trace_csv_string(c, solver::run_gd(p, c.iters, mc));
    }
    throw ValidationError("replay_csv: unknown experiment kind '" + kind + "'");
}

}  // namespace tubal::experiments
