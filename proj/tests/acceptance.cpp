// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every threshold is fixed here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "tubal/config.hpp"
#include "tubal/experiments.hpp"
#include "tubal/selftest.hpp"
#include "tubal/sensing.hpp"
#include "tubal/solver.hpp"
#include "tubal/trace.hpp"
#include "tubal/tsvd.hpp"

using namespace tubal;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool passed, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %2d: %-28s %s (%.1fs)\n", passed ? "PASS" : "FAIL", criterion,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!passed) ++g_failures;
}

void report_aux(const std::string& name, bool passed, const std::string& detail) {
    std::printf("[%s] property:     %-28s %s\n", passed ? "PASS" : "FAIL", name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!passed) ++g_failures;
}

double elapsed(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

TubalTensor symmetrize(const TubalTensor& a) {
    TubalTensor s = ttranspose(a);
    s += a;
    s *= 0.5;
    return s;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------------------------------------------------------------- criterion 1
void criterion_1() {
    const auto t0 = Clock::now();
    const int ks[] = {1, 3, 4, 8};
    int bad = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint64_t s = mix_seed(0xACC1, trial);
        const int k = ks[trial % 4];
        const int n1 = 1 + static_cast<int>(mix_seed(s, 0) % 8);
        const int q = 1 + static_cast<int>(mix_seed(s, 1) % 8);
        const int n2 = 1 + static_cast<int>(mix_seed(s, 2) % 8);
        TubalTensor a = random_gaussian(n1, q, k, 1.0, mix_seed(s, 3));
        TubalTensor b = random_gaussian(q, n2, k, 1.0, mix_seed(s, 4));
        const double err = fro_norm(tprod(a, b) - tprod_naive(a, b));
        const double bound = 1e-11 * (1.0 + fro_norm(a) * fro_norm(b));
        worst = std::max(worst, err / bound);
        if (err > bound) ++bad;
    }
    report(1, "algebra oracle equivalence", bad == 0,
           "200 pairs, worst err/bound " + fmt(worst), elapsed(t0));
}

// ---------------------------------------------------------------- criterion 2
void criterion_2() {
    const auto t0 = Clock::now();
    int bad = 0;
    double worst_rec = 0.0, worst_orth = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::uint64_t s = mix_seed(0xACC2, trial);
        const int n1 = 2 + static_cast<int>(mix_seed(s, 0) % 7);
        const int n2 = 2 + static_cast<int>(mix_seed(s, 1) % 7);
        const int k = 1 + static_cast<int>(mix_seed(s, 2) % 8);
        TubalTensor t = random_gaussian(n1, n2, k, 1.0, mix_seed(s, 3));
        TSvd f = tsvd(t);
        const double rec = fro_norm(tprod(f.U, tprod(f.S, ttranspose(f.V))) - t) / fro_norm(t);
        const double orth = std::max(detail::orthonormality_residual(f.U),
                                     detail::orthonormality_residual(f.V));
        worst_rec = std::max(worst_rec, rec);
        worst_orth = std::max(worst_orth, orth);
        if (rec > 1e-9 || orth > 1e-9) ++bad;
        SliceSpectrum sp = slice_spectrum(t);
        for (int j = 0; j < k; ++j) {
            for (int i = 1; i < sp.count(); ++i) {
                if (sp.values(j, i) > sp.values(j, i - 1) + 1e-12) ++bad;
            }
        }
    }
    int bad_rank = 0;
    for (int trial = 0; trial < 100; ++trial) {
        TubalTensor x = random_gaussian(10, 3, 4, 1.0, mix_seed(0xACC2B, trial));
        if (tubal_rank(tprod(x, ttranspose(x))) != 3) ++bad_rank;
    }
    report(2, "t-SVD contract", bad == 0 && bad_rank == 0,
           "worst rec " + fmt(worst_rec) + ", worst orth " + fmt(worst_orth) +
               ", rank misses " + std::to_string(bad_rank),
           elapsed(t0));
}

// ---------------------------------------------------------------- criterion 3
void criterion_3() {
    const auto t0 = Clock::now();
    sensing::MeasurementEnsemble e = sensing::sample_ensemble(10, 4, 254, 0xACC3);

    int bad_adj = 0;
    double worst_adj = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        TubalTensor z = symmetrize(random_gaussian(10, 10, 4, 1.0, mix_seed(0xACC3A, trial)));
        GaussianStream g(mix_seed(0xACC3B, trial));
        Eigen::VectorXd y(e.m());
        for (int i = 0; i < e.m(); ++i) y(i) = g.next();
        const double lhs = sensing::forward(e, z).dot(y);
        const double rhs = inner(z, sensing::adjoint(e, y));
        const double scaled = std::abs(lhs - rhs) / (fro_norm(z) * y.norm());
        worst_adj = std::max(worst_adj, scaled);
        if (scaled > 1e-10) ++bad_adj;
    }

    int bad_na = 0;
    for (int trial = 0; trial < 20; ++trial) {
        TubalTensor z1 = symmetrize(random_gaussian(10, 10, 4, 1.0, mix_seed(0xACC3C, trial)));
        TubalTensor z2 = symmetrize(random_gaussian(10, 10, 4, 1.0, mix_seed(0xACC3D, trial)));
        const double a = inner(sensing::normal_op(e, z1), z2);
        const double b = inner(z1, sensing::normal_op(e, z2));
        if (std::abs(a - b) > 1e-10 * (1.0 + std::abs(a))) ++bad_na;
        if (inner(z1, sensing::normal_op(e, z1)) < -1e-10) ++bad_na;
    }

    // Lemma H.2 / H.3 style one-sided bounds with 2x slack
    sensing::RipEstimate d2 = sensing::rip_estimate(e, 2, 200, 0xACC3E);
    sensing::RipEstimate d4 = sensing::rip_estimate(e, 4, 200, 0xACC3F);
    const double dhat2 = std::max(std::abs(d2.delta_lo), std::abs(d2.delta_hi));
    const double dhat4 = std::max(std::abs(d4.delta_lo), std::abs(d4.delta_hi));
    int ok_h2_r1 = 0, ok_h3 = 0, ok_h2_r3 = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        TubalTensor g1 = random_gaussian(10, 1, 4, 1.0, mix_seed(0xACC30, t));
        TubalTensor z1 = tprod(g1, ttranspose(g1));
        const double dn1 = spectral_norm(z1 - sensing::normal_op(e, z1));
        if (dn1 <= 2.0 * std::sqrt(4.0 * 1.0) * dhat2 * spectral_norm(z1)) ++ok_h2_r1;
        if (dn1 <= 2.0 * std::sqrt(4.0) * dhat2 * nuclear_norm(z1)) ++ok_h3;
        TubalTensor g3 = random_gaussian(10, 3, 4, 1.0, mix_seed(0xACC31, t));
        TubalTensor z3 = tprod(g3, ttranspose(g3));
        if (spectral_norm(z3 - sensing::normal_op(e, z3)) <=
            2.0 * std::sqrt(4.0 * 3.0) * dhat4 * spectral_norm(z3))
            ++ok_h2_r3;
    }
    const bool pass = bad_adj == 0 && bad_na == 0 && ok_h2_r1 >= 190 && ok_h3 >= 190 &&
                      ok_h2_r3 >= 190;
    report(3, "sensing identities", pass,
           "worst adjoint " + fmt(worst_adj) + ", H.2r1 " + std::to_string(ok_h2_r1) +
               "/200, H.3 " + std::to_string(ok_h3) + "/200, H.2r3 " +
               std::to_string(ok_h2_r3) + "/200",
           elapsed(t0));
}

// ---------------------------------------------------------------- criterion 4
void criterion_4() {
    const auto t0 = Clock::now();
    io::RunConfig c;
    solver::ProblemInstance p =
        solver::make_instance(c.n, c.r, c.k, c.R, c.m, c.alpha, c.mu, 0xACC4,
                              solver::Normalization::kSpectral);
    int bad = 0;
    double worst = 0.0;
    for (int state = 0; state < 5; ++state) {
        TubalTensor u = random_gaussian(p.n, p.R, p.k, 0.3, mix_seed(0xACC4A, state));
        TubalTensor g = solver::gradient(p, u);
        const double h = 1e-6 * (1.0 + fro_norm(u));
        for (int dir = 0; dir < 20; ++dir) {
            TubalTensor d =
                random_gaussian(p.n, p.R, p.k, 1.0, mix_seed(0xACC4B, 100 * state + dir));
            d *= 1.0 / fro_norm(d);
            TubalTensor up = u, dn = u;
            up += h * d;
            dn += (-h) * d;
            const double fd = (solver::loss(p, up) - solver::loss(p, dn)) / (2.0 * h);
            const double an = inner(g, d);
            const double rel = std::abs(fd - an) / (1.0 + std::abs(an));
            worst = std::max(worst, rel);
            if (rel > 1e-5) ++bad;
        }
    }
    report(4, "gradient correctness", bad == 0, "100 directions, worst rel " + fmt(worst),
           elapsed(t0));
}

// ---------------------------------------------------------------- criterion 5
void criterion_5() {
    const auto t0 = Clock::now();
    io::RunConfig c;
    c.seed = 1;
    experiments::TwoStageResult r = experiments::exp_two_stage(c);
    int missing = 0, bad = 0;
    double worst = 0.0;
    for (const auto& m : r.trace) {
        if (!m.decomp_resid) {
            ++missing;
            continue;
        }
        const double bound = 1e-8 * m.u_spec_norm;
        worst = std::max(worst, *m.decomp_resid / bound);
        if (*m.decomp_resid > bound) ++bad;
    }
    report(5, "decomposition orthogonality", missing == 0 && bad == 0,
           std::to_string(r.trace.size()) + " strides, worst resid/bound " + fmt(worst) +
               ", missing " + std::to_string(missing),
           elapsed(t0));
}

// ---------------------------------------------------------------- criterion 6
void criterion_6() {
    const auto t0 = Clock::now();
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        io::RunConfig c;
        c.seed = seed;
        experiments::AlignmentResult r = experiments::exp_alignment(c);
        const bool ok = r.max_power_gap < 1.0 && r.max_band <= 0.05;
        pass = pass && ok;
        detail += "s" + std::to_string(seed) + ": gap " + fmt(r.max_power_gap) + " band " +
                  fmt(r.max_band) + (seed < 3 ? "; " : "");
    }
    report(6, "spectral-stage proximity", pass, detail, elapsed(t0));
}

// ---------------------------------------------------------------- criterion 7
void criterion_7() {
    const auto t0 = Clock::now();
    int passed = 0;
    int mono_ok = 0;
    std::string detail;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        io::RunConfig c;
        c.seed = seed;
        experiments::TwoStageResult r = experiments::exp_two_stage(c);
        std::vector<double> angle;
        bool early_high = true;
        for (const auto& m : r.trace) {
            angle.push_back(m.angle_L_Lt);
            if (m.t <= 500 && m.test_err <= 0.5) early_high = false;
        }
        const bool uni = experiments::unimodal(angle, c.knee_window, 1e-3, 0.02);
        const double final_err = r.trace.back().test_err;
        const bool ok = uni && early_high && final_err < 0.1;
        if (ok) ++passed;
        detail += "s" + std::to_string(seed) + (ok ? "+" : "-");

        // auxiliary audit: loss non-increasing between recorded strides
        // after the first 10 iterations
        long total = 0, decreasing = 0;
        for (size_t i = 1; i + 1 < r.trace.size(); ++i) {
            if (r.trace[i].t < 10) continue;
            ++total;
            if (r.trace[i + 1].loss <= r.trace[i].loss * (1.0 + 1e-12)) ++decreasing;
        }
        if (total > 0 && decreasing >= static_cast<long>(0.99 * static_cast<double>(total))) {
            ++mono_ok;
        }
    }
    report(7, "two-stage dynamics", passed >= 4,
           detail + " (" + std::to_string(passed) + "/5)", elapsed(t0));
    report_aux("loss monotonicity audit", mono_ok == 5,
               std::to_string(mono_ok) + "/5 seeds with >=99% non-increasing strides");
}

// ---------------------------------------------------------------- criterion 8
void criterion_8() {
    const auto t0 = Clock::now();
    io::RunConfig c;
    c.seed = 1;
    experiments::SweepResult s = experiments::exp_alpha_sweep(c);
    std::vector<experiments::SweepAggregate> agg = experiments::aggregate(s);
    const double rho = experiments::spearman_value_vs_mean_err(agg);
    std::optional<double> slope = experiments::loglog_slope(s);
    const bool pass = rho >= 0.9 && slope && *slope > 0.0;
    report(8, "alpha-sweep trend", pass,
           "spearman " + fmt(rho) + ", log-log slope " + (slope ? fmt(*slope) : "undefined"),
           elapsed(t0));
}

// ---------------------------------------------------------------- criterion 9
void criterion_9() {
    const auto t0 = Clock::now();
    io::RunConfig c;
    c.seed = 1;
    experiments::SweepResult s = experiments::exp_rank_sweep(c);
    std::vector<experiments::SweepAggregate> agg = experiments::aggregate(s);
    int inversions = 0;
    std::string means;
    for (size_t i = 0; i < agg.size(); ++i) {
        if (i > 0 && agg[i].mean_iters > agg[i - 1].mean_iters) ++inversions;
        means += fmt(agg[i].mean_iters) + (i + 1 < agg.size() ? " " : "");
    }
    report(9, "R-sweep trend", inversions <= 1,
           "mean iters [" + means + "], adjacent inversions " + std::to_string(inversions),
           elapsed(t0));
}

// --------------------------------------------------------------- criterion 10
void criterion_10() {
    const auto t0 = Clock::now();
    io::RunConfig c;
    experiments::StatReport rep = experiments::stat_random_tensor_checks(c, 500, 0xACC10);
    const bool pass =
        rep.freq_norm >= 0.99 && rep.freq_align >= 0.99 && rep.freq_sigma_min >= 0.95;
    report(10, "random tensor statistics", pass,
           "norm " + fmt(rep.freq_norm) + ", align " + fmt(rep.freq_align) + ", sigma_min " +
               fmt(rep.freq_sigma_min),
           elapsed(t0));
}

// --------------------------------------------------------------- criterion 11
void criterion_11() {
    const auto t0 = Clock::now();
    std::vector<SelftestResult> st = run_selftest();
    int st_failures = 0;
    for (const auto& r : st) {
        if (!r.passed) ++st_failures;
    }

    // replay each experiment kind from its own provenance header
    io::RunConfig small;
    small.iters = 400;
    small.seed = 11;
    small.rank_grid = "10,50";
    small.rank_sweep_seeds = 2;
    small.alpha_grid_points = 2;
    small.alpha_sweep_seeds = 2;
    const std::string two =
        experiments::two_stage_csv(small, experiments::exp_two_stage(small));
    const std::string pow_csv =
        experiments::alignment_csv(small, experiments::exp_alignment(small));
    const std::string rank = experiments::sweep_csv(small, experiments::exp_rank_sweep(small));
    const std::string alpha =
        experiments::sweep_csv(small, experiments::exp_alpha_sweep(small));
    const bool replay_ok = experiments::replay_csv(two, "two-stage") == two &&
                           experiments::replay_csv(pow_csv, "power") == pow_csv &&
                           experiments::replay_csv(rank, "sweep-rank") == rank &&
                           experiments::replay_csv(alpha, "sweep-alpha") == alpha;

    report(11, "determinism and provenance", st_failures == 0 && replay_ok,
           "selftest " + std::to_string(st.size() - st_failures) + "/" +
               std::to_string(st.size()) + ", csv replays " +
               (replay_ok ? "identical" : "DIFFER"),
           elapsed(t0));
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    std::printf("tubal acceptance suite\n");
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    criterion_11();
    std::printf("%d failure(s), total %.1fs\n", g_failures, elapsed(t0));
    return g_failures == 0 ? 0 : 1;
}
