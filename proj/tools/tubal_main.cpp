// tubal: t-product tensor algebra, sensing, and factorized gradient-descent
// recovery from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "tubal/chart.hpp"
#include "tubal/config.hpp"
#include "tubal/container.hpp"
#include "tubal/experiments.hpp"
#include "tubal/selftest.hpp"
#include "tubal/sensing.hpp"
#include "tubal/solver.hpp"
#include "tubal/trace.hpp"
#include "tubal/tsvd.hpp"

namespace fs = std::filesystem;
using namespace tubal;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumerical = 4;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> rip_rank;
    std::optional<int> rip_trials;
};

io::RunConfig resolve_config(const CommonOpts& opts) {
    io::RunConfig c = opts.config_path.empty() ? io::RunConfig{}
                                               : io::load_config(opts.config_path);
    if (opts.seed) c.seed = *opts.seed;
    if (opts.out_dir) c.out_dir = *opts.out_dir;
    if (opts.rip_rank) c.rip_rank = *opts.rip_rank;
    if (opts.rip_trials) c.rip_trials = *opts.rip_trials;
    io::validate(c);
    return c;
}

void print_resolved(const io::RunConfig& c) {
    std::cout << "resolved configuration:\n";
    for (const auto& [key, value] : c.to_pairs()) {
        std::cout << "  " << key << " = " << value << "\n";
    }
}

fs::path out_path(const io::RunConfig& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return fs::path(c.out_dir) / name;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
    out << text;
}

void chart_trace(const io::RunConfig& c, const std::vector<solver::IterateMetrics>& trace,
                 const fs::path& path) {
    io::Series err, tube, angle_l, angle_x;
    err.name = "test_err";
    tube.name = "sig_tube_err";
    angle_l.name = "angle_L_Lt";
    angle_x.name = "angle_X_Lt";
    for (const auto& m : trace) {
        const double t = static_cast<double>(m.t);
        if (m.test_err > 0.0) {
            err.x.push_back(t);
            err.y.push_back(m.test_err);
        }
        if (m.sig_tube_err > 0.0) {
            tube.x.push_back(t);
            tube.y.push_back(m.sig_tube_err);
        }
        angle_l.x.push_back(t);
        angle_l.y.push_back(m.angle_L_Lt);
        angle_x.x.push_back(t);
        angle_x.y.push_back(m.angle_X_Lt);
    }
    io::ChartSpec err_spec;
    err_spec.title = "recovery errors (seed " + std::to_string(c.seed) + ")";
    err_spec.x_label = "iteration";
    err_spec.y_label = "relative error";
    err_spec.log_y = true;
    io::emit_chart_svg(path.string(), err_spec, {err, tube});

    io::ChartSpec ang_spec;
    ang_spec.title = "subspace angles (seed " + std::to_string(c.seed) + ")";
    ang_spec.x_label = "iteration";
    ang_spec.y_label = "principal angle";
    fs::path ang_path = path;
    ang_path.replace_filename("angles_" + path.filename().string());
    io::emit_chart_svg(ang_path.string(), ang_spec, {angle_l, angle_x});
}

int cmd_gen(const io::RunConfig& c) {
    solver::ProblemInstance p =
        solver::make_instance(c.n, c.r, c.k, c.R, c.m, c.alpha, c.mu, c.seed, c.normalization);
    const fs::path xp = out_path(c, "ground_truth.tbl");
    io::write_tensors(xp.string(), {p.X}, c.seed);
    const fs::path ep = out_path(c, "ensemble.tbl");
    io::write_tensors(ep.string(), p.ensemble.tensors(), p.ensemble.seed());
    std::cout << "wrote " << xp.string() << " (X, " << p.n << "x" << p.r << "x" << p.k
              << ") and " << ep.string() << " (" << p.m << " sensing tensors)\n";
    return 0;
}

int cmd_run(const io::RunConfig& c) {
    solver::ProblemInstance p =
        solver::make_instance(c.n, c.r, c.k, c.R, c.m, c.alpha, c.mu, c.seed, c.normalization);
    solver::MetricsConfig mc;
    mc.stride = c.stride;
    mc.track_power = c.track_power;
    mc.record_slice_spectra = c.record_spectra;
    solver::GDState final_state;
    std::vector<solver::IterateMetrics> trace = solver::run_gd(p, c.iters, mc, &final_state);
    const fs::path csv = out_path(c, "trace.csv");
    io::write_trace_csv(csv.string(), c, trace);
    chart_trace(c, trace, out_path(c, "chart.svg"));
    io::write_checkpoint(out_path(c, "checkpoint.tbl").string(), final_state.t, final_state.U);

    std::printf("final: t=%ld loss=%.6g test_err=%.6g angle_L_Lt=%.6g\n", trace.back().t,
                trace.back().loss, trace.back().test_err, trace.back().angle_L_Lt);
    std::cout << "wrote " << csv.string() << ", charts, checkpoint.tbl\n";
    return 0;
}

int cmd_power(const io::RunConfig& c) {
    experiments::AlignmentResult r = experiments::exp_alignment(c);
    const fs::path csv = out_path(c, "alignment.csv");
    write_text(csv, experiments::alignment_csv(c, r));

    io::Series a1, a2, gap;
    a1.name = "angle_Lt_L";
    a2.name = "angle_Ltilde_L";
    gap.name = "power_gap";
    for (const auto& row : r.trace) {
        const double t = static_cast<double>(row.t);
        a1.x.push_back(t);
        a1.y.push_back(row.angle_Lt_L);
        a2.x.push_back(t);
        a2.y.push_back(row.angle_Ltilde_L);
        gap.x.push_back(t);
        gap.y.push_back(row.power_gap);
    }
    io::ChartSpec spec;
    spec.title = "gradient descent vs tensor power method";
    spec.x_label = "iteration";
    spec.y_label = "angle / gap";
    io::emit_chart_svg(out_path(c, "alignment.svg").string(), spec, {a1, a2, gap});

    std::printf("alignment over first %d iterations: max band %.6g (limit %.6g) %s, max power_gap %.6g\n",
                c.alignment_window, r.max_band, c.alignment_band,
                r.within_band ? "WITHIN" : "OUTSIDE", r.max_power_gap);
    std::cout << "wrote " << csv.string() << " and alignment.svg\n";
    return 0;
}

int cmd_two_stage(const io::RunConfig& c) {
    experiments::TwoStageResult r = experiments::exp_two_stage(c);
    const fs::path csv = out_path(c, "two_stage.csv");
    write_text(csv, experiments::two_stage_csv(c, r));
    chart_trace(c, r.trace, out_path(c, "two_stage.svg"));
    if (r.stage.determined) {
        std::printf("stage report: t_knee=%ld t_angle_min=%ld angle_min=%.6g\n", r.stage.t_knee,
                    r.stage.t_angle_min, r.stage.angle_min);
    } else {
        std::cout << "stage report: undetermined (trace too short for the smoothing window)\n";
    }
    std::cout << "wrote " << csv.string() << " and charts\n";
    return 0;
}

void print_sweep(const io::RunConfig& c, const experiments::SweepResult& r) {
    std::vector<experiments::SweepAggregate> agg = experiments::aggregate(r);
    std::printf("%-12s %14s %14s %14s %12s %8s\n", r.parameter.c_str(), "mean_err",
                "min_err", "max_err", "mean_iters", "missing");
    for (const auto& a : agg) {
        std::printf("%-12.6g %14.6g %14.6g %14.6g %12.1f %8d\n", a.value, a.mean_err,
                    a.min_err, a.max_err, a.mean_iters, a.missing);
    }
    std::optional<double> slope = experiments::loglog_slope(r);
    if (slope) {
        std::printf("log-log slope of final test_err vs %s: %.6g\n", r.parameter.c_str(),
                    *slope);
    } else {
        std::cout << "log-log slope: undefined (single grid point)\n";
    }
    std::printf("spearman(value, mean_err) = %.4f\n",
                experiments::spearman_value_vs_mean_err(agg));
    (void)c;
}

int cmd_sweep_alpha(const io::RunConfig& c) {
    experiments::SweepResult r = experiments::exp_alpha_sweep(c);
    const fs::path csv = out_path(c, "alpha_sweep.csv");
    write_text(csv, experiments::sweep_csv(c, r));

    std::vector<experiments::SweepAggregate> agg = experiments::aggregate(r);
    io::Series mean;
    mean.name = "mean final test_err";
    for (const auto& a : agg) {
        mean.x.push_back(a.value);
        mean.y.push_back(a.mean_err);
    }
    io::ChartSpec spec;
    spec.title = "final test error vs initialization scale";
    spec.x_label = "alpha";
    spec.y_label = "test error";
    spec.log_x = true;
    spec.log_y = true;
    io::emit_chart_svg(out_path(c, "alpha_sweep.svg").string(), spec, {mean});

    print_sweep(c, r);
    std::cout << "wrote " << csv.string() << " and alpha_sweep.svg\n";
    return 0;
}

int cmd_sweep_rank(const io::RunConfig& c) {
    experiments::SweepResult r = experiments::exp_rank_sweep(c);
    const fs::path csv = out_path(c, "rank_sweep.csv");
    write_text(csv, experiments::sweep_csv(c, r));

    std::vector<experiments::SweepAggregate> agg = experiments::aggregate(r);
    io::Series iters;
    iters.name = "mean iterations to tau";
    for (const auto& a : agg) {
        iters.x.push_back(a.value);
        iters.y.push_back(a.mean_iters);
    }
    io::ChartSpec spec;
    spec.title = "iterations to reach test_err <= tau vs overparametrization";
    spec.x_label = "R";
    spec.y_label = "iterations";
    spec.log_x = true;
    io::emit_chart_svg(out_path(c, "rank_sweep.svg").string(), spec, {iters});

    print_sweep(c, r);
    std::cout << "wrote " << csv.string() << " and rank_sweep.svg\n";
    return 0;
}

int cmd_rip_check(const io::RunConfig& c) {
    sensing::MeasurementEnsemble e =
        sensing::sample_ensemble(c.n, c.k, c.m, mix_seed(c.seed, 0x41));
    sensing::RipEstimate d = rip_estimate(e, c.rip_rank, c.rip_trials, mix_seed(c.seed, 0x52));
    std::printf("rip estimate (rank %d, %d trials): delta_lo=%.10g delta_hi=%.10g\n",
                c.rip_rank, c.rip_trials, d.delta_lo, d.delta_hi);
    std::cout << "note: Monte-Carlo lower bound on the true restricted-isometry constant\n";
    return 0;
}

int cmd_stats(const io::RunConfig& c) {
    experiments::StatReport rep =
        experiments::stat_random_tensor_checks(c, c.stat_trials, c.seed);
    if (rep.trials == 0) {
        std::cout << "stat report: empty (0 trials)\n";
        return 0;
    }
    std::printf("random tubal tensor statistics over %d trials (n=%d R=%d r=%d k=%d):\n",
                rep.trials, c.n, c.R, c.r, c.k);
    std::printf("  spectral norm <= %.6g        : %.4f\n", rep.norm_bound, rep.freq_norm);
    std::printf("  ||U^T*V1||_F/sqrt(k) in [%.6g, %.6g] : %.4f\n", rep.align_lo, rep.align_hi,
                rep.freq_align);
    std::printf("  sigma_min >= %.6g            : %.4f\n", rep.sigma_min_bound,
                rep.freq_sigma_min);
    return 0;
}

int cmd_selftest(const io::RunConfig&) {
    std::vector<SelftestResult> results = run_selftest();
    int failures = 0;
    for (const auto& r : results) {
        std::printf("[%s] %s%s%s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.detail.empty() ? "" : ": ", r.detail.c_str());
        if (!r.passed) ++failures;
    }
    std::printf("selftest: %zu checks, %d failures\n", results.size(), failures);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tubal tensor algebra, t-SVD, Gaussian tubal sensing, and overparametrized "
                 "factorized gradient-descent recovery"};
    app.require_subcommand(1);

    CommonOpts opts;
    int (*handler)(const io::RunConfig&) = nullptr;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "key = value configuration file");
        sub->add_option("--seed", opts.seed, "override the master seed");
        sub->add_option("--out", opts.out_dir, "output directory");
    };

    struct SubDef {
        const char* name;
        const char* help;
        int (*fn)(const io::RunConfig&);
    };
    const SubDef subs[] = {
        {"gen", "generate a problem instance (ground truth + sensing ensemble)", cmd_gen},
        {"run", "run factorized gradient descent, write trace.csv + charts", cmd_run},
        {"power", "compare gradient descent to the tensor power method", cmd_power},
        {"two-stage", "reproduce the two-stage dynamics and report the knee", cmd_two_stage},
        {"sweep-alpha", "final errors across initialization scales", cmd_sweep_alpha},
        {"sweep-rank", "iterations-to-threshold across overparametrization widths",
         cmd_sweep_rank},
        {"rip-check", "Monte-Carlo restricted isometry estimate", cmd_rip_check},
        {"stats", "random tubal tensor statistics", cmd_stats},
        {"selftest", "run the library invariant suite", cmd_selftest},
    };
    for (const auto& def : subs) {
        CLI::App* sub = app.add_subcommand(def.name, def.help);
        add_common(sub);
        if (std::string(def.name) == "rip-check") {
            sub->add_option("--rank", opts.rip_rank, "probe rank for the isometry estimate");
            sub->add_option("--trials", opts.rip_trials, "Monte-Carlo trials");
        }
        sub->callback([&handler, &def] { handler = def.fn; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        io::RunConfig c = resolve_config(opts);
        print_resolved(c);
        return handler(c);
    } catch (const ParseError& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvalidDims& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const InvalidRank& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ShapeMismatch& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
