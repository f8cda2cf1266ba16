#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "tubal/experiments.hpp"
#include "tubal/trace.hpp"

using namespace tubal;
using namespace tubal::experiments;
using io::RunConfig;

namespace {

// Small, fast configuration with visible dynamics.
RunConfig mini_config() {
    RunConfig c;
    c.n = 6;
    c.r = 2;
    c.k = 3;
    c.R = 20;
    c.m = 130;
    c.mu = 0.08;
    c.alpha = 1e-6;
    c.iters = 600;
    c.stride = 5;
    c.seed = 3;
    c.knee_window = 11;
    c.knee_consecutive = 5;
    c.alignment_window = 100;
    c.rank_grid = "4,8,16";
    c.rank_sweep_seeds = 3;
    c.alpha_sweep_seeds = 2;
    c.alpha_grid_points = 3;
    c.alpha_grid_max = 1e-4;
    c.alpha_grid_min = 1e-8;
    c.alpha_sweep_mu = 0.3;
    c.tau = 0.2;
    return c;
}

}  // namespace

TEST_CASE("moving_average and unimodal helpers") {
    std::vector<double> v = {5, 4, 3, 2, 1, 2, 3, 4, 5};
    std::vector<double> ma = moving_average(v, 3);
    REQUIRE(ma.size() == 7);
    CHECK(ma[0] == doctest::Approx(4.0));
    CHECK(ma[3] == doctest::Approx(5.0 / 3.0));
    CHECK(unimodal(v, 3, 1e-9, 0.0));

    std::vector<double> rising = {1, 2, 3, 4, 5, 6, 7};
    CHECK_FALSE(unimodal(rising, 3, 1e-9, 0.0));
    CHECK_THROWS_AS(moving_average(v, 4), InvalidDims);
    CHECK(moving_average({1.0, 2.0}, 5).empty());
}

TEST_CASE("detect_stages: undetermined on degenerate runs") {
    RunConfig c = mini_config();
    c.iters = 0;
    TwoStageResult r = exp_two_stage(c);
    CHECK_FALSE(r.stage.determined);
    CHECK(r.stage.t_knee == -1);
}

TEST_CASE("exp_two_stage: dynamics, knee, csv recomputation") {
    RunConfig c = mini_config();
    TwoStageResult r = exp_two_stage(c);
    REQUIRE(r.trace.size() > 20);
    CHECK(r.trace.back().test_err < r.trace.front().test_err);
    CHECK(r.stage.determined);
    CHECK(r.stage.t_knee >= 0);
    CHECK(r.stage.t_knee <= c.iters);

    // the knee recomputed from the emitted CSV equals the report's value
    std::string csv = two_stage_csv(c, r);
    io::CsvData parsed = io::parse_csv(csv);
    std::vector<solver::IterateMetrics> rows;
    for (size_t i = 0; i < parsed.rows.size(); ++i) {
        solver::IterateMetrics m;
        m.t = static_cast<long>(*parsed.value(i, "t"));
        m.test_err = *parsed.value(i, "test_err");
        m.angle_L_Lt = *parsed.value(i, "angle_L_Lt");
        rows.push_back(m);
    }
    StageReport again = detect_stages(rows, c.knee_window, c.knee_consecutive);
    CHECK(again.determined == r.stage.determined);
    CHECK(again.t_knee == r.stage.t_knee);
    CHECK(again.t_angle_min == r.stage.t_angle_min);

    bool found_knee_comment = csv.find("# t_knee=" + std::to_string(r.stage.t_knee)) !=
                              std::string::npos;
    CHECK(found_knee_comment);
}

TEST_CASE("exp_two_stage: identical reruns produce identical csv bytes") {
    RunConfig c = mini_config();
    c.iters = 120;
    TwoStageResult a = exp_two_stage(c);
    TwoStageResult b = exp_two_stage(c);
    CHECK(two_stage_csv(c, a) == two_stage_csv(c, b));
}

TEST_CASE("exp_alignment: t=0 angles equal, gap small early") {
    RunConfig c = mini_config();
    AlignmentResult r = exp_alignment(c);
    REQUIRE_FALSE(r.trace.empty());
    CHECK(r.trace.front().t == 0);
    CHECK(r.trace.front().angle_Lt_L == r.trace.front().angle_Ltilde_L);
    CHECK(r.trace.front().power_gap == 0.0);
    for (const auto& row : r.trace) {
        CHECK(std::isfinite(row.angle_Lt_L));
        CHECK(std::isfinite(row.angle_Ltilde_L));
    }
    CHECK(r.max_band >= 0.0);
    // alignment csv replays byte-identically
    std::string csv = alignment_csv(c, r);
    CHECK(replay_csv(csv, "power") == csv);
}

TEST_CASE("exp_alpha_sweep: rows, aggregates, slope recomputation") {
    RunConfig c = mini_config();
    c.iters = 400;
    SweepResult s = exp_alpha_sweep(c);
    CHECK(s.parameter == "alpha");
    CHECK(s.rows.size() == static_cast<size_t>(c.alpha_grid_points * c.alpha_sweep_seeds));

    std::vector<SweepAggregate> agg = aggregate(s);
    REQUIRE(agg.size() == 3);
    for (const auto& a : agg) CHECK(a.count == c.alpha_sweep_seeds);

    // aggregates recomputable from rows exactly
    for (const auto& a : agg) {
        double acc = 0.0;
        int cnt = 0;
        for (const auto& row : s.rows) {
            if (row.value == a.value) {
                acc += row.final_test_err;
                ++cnt;
            }
        }
        CHECK(cnt == a.count);
        CHECK(a.mean_err == doctest::Approx(acc / cnt).epsilon(1e-15));
    }

    // slope recomputed from the emitted CSV matches within 1e-12
    std::optional<double> slope = loglog_slope(s);
    REQUIRE(slope.has_value());
    io::CsvData parsed = io::parse_csv(sweep_csv(c, s));
    SweepResult from_csv;
    from_csv.parameter = "alpha";
    from_csv.iters_cap = c.iters;
    for (size_t i = 0; i < parsed.rows.size(); ++i) {
        SweepRow row;
        row.value = *parsed.value(i, "value");
        row.final_test_err = *parsed.value(i, "final_test_err");
        row.final_loss = *parsed.value(i, "final_loss");
        if (auto it = parsed.value(i, "iters_to_threshold")) {
            row.iters_to_threshold = static_cast<long>(*it);
        }
        from_csv.rows.push_back(row);
    }
    std::optional<double> slope2 = loglog_slope(from_csv);
    REQUIRE(slope2.has_value());
    CHECK(std::abs(*slope - *slope2) <= 1e-12);

    // single grid point: slope undefined, flagged
    RunConfig c1 = mini_config();
    c1.alpha_grid_points = 1;
    c1.iters = 50;
    c1.alpha_sweep_seeds = 2;
    SweepResult s1 = exp_alpha_sweep(c1);
    CHECK_FALSE(loglog_slope(s1).has_value());
}

TEST_CASE("exp_rank_sweep: row counts and R=r baseline completes") {
    RunConfig c = mini_config();
    c.iters = 300;
    SweepResult s = exp_rank_sweep(c);
    CHECK(s.parameter == "R");
    std::vector<SweepAggregate> agg = aggregate(s);
    REQUIRE(agg.size() == 3);
    for (const auto& a : agg) CHECK(a.count == c.rank_sweep_seeds);

    RunConfig cr = mini_config();
    cr.rank_grid = "2";  // R = r exactly
    cr.rank_sweep_seeds = 2;
    cr.iters = 100;
    SweepResult sr = exp_rank_sweep(cr);
    CHECK(sr.rows.size() == 2);
    for (const auto& row : sr.rows) CHECK(std::isfinite(row.final_test_err));
}

TEST_CASE("sweeps are deterministic under identical config") {
    RunConfig c = mini_config();
    c.iters = 150;
    std::string a = sweep_csv(c, exp_rank_sweep(c));
    std::string b = sweep_csv(c, exp_rank_sweep(c));
    CHECK(a == b);
    CHECK(replay_csv(a, "sweep-rank") == a);
}

TEST_CASE("spearman helper: exact monotone ranks") {
    std::vector<SweepAggregate> agg(4);
    agg[0].value = 1e-3;
    agg[0].mean_err = 0.1;
    agg[1].value = 1e-4;
    agg[1].mean_err = 0.01;
    agg[2].value = 1e-5;
    agg[2].mean_err = 0.001;
    agg[3].value = 1e-6;
    agg[3].mean_err = 0.0001;
    CHECK(spearman_value_vs_mean_err(agg) == doctest::Approx(1.0));
    agg[3].mean_err = 1.0;  // break monotonicity
    CHECK(spearman_value_vs_mean_err(agg) < 1.0);
}

TEST_CASE("stat_random_tensor_checks: determinism, k=1 sanity, empty report") {
    RunConfig c;
    c.n = 10;
    c.R = 200;
    c.r = 3;
    c.k = 1;
    StatReport a = stat_random_tensor_checks(c, 100, 5);
    StatReport b = stat_random_tensor_checks(c, 100, 5);
    CHECK(a.freq_norm == b.freq_norm);
    CHECK(a.freq_align == b.freq_align);
    CHECK(a.freq_sigma_min == b.freq_sigma_min);
    // classical matrix regime: all three events should be near-certain
    CHECK(a.freq_norm >= 0.99);
    CHECK(a.freq_align >= 0.99);
    CHECK(a.freq_sigma_min >= 0.95);

    StatReport empty = stat_random_tensor_checks(c, 0, 5);
    CHECK(empty.trials == 0);
    CHECK(empty.freq_norm == 0.0);
}

TEST_CASE("alpha_grid spans max to min inclusive") {
    RunConfig c = mini_config();
    std::vector<double> g = alpha_grid(c);
    REQUIRE(g.size() == 3);
    CHECK(g.front() == doctest::Approx(1e-4));
    CHECK(g.back() == doctest::Approx(1e-8));
    CHECK(g[1] == doctest::Approx(1e-6).epsilon(1e-9));
}
