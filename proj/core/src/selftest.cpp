#include "tubal/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "tubal/chart.hpp"
#include "tubal/config.hpp"
#include "tubal/container.hpp"
#include "tubal/experiments.hpp"
#include "tubal/sensing.hpp"
#include "tubal/solver.hpp"
#include "tubal/trace.hpp"
#include "tubal/tsvd.hpp"

namespace tubal {

namespace {

struct Harness {
    std::vector<SelftestResult> results;

    void check(const std::string& name, bool ok, const std::string& detail = "") {
        results.push_back({name, ok, detail});
    }

    void check_le(const std::string& name, double got, double bound) {
        check(name, got <= bound,
              "value " + io::format_double(got) + " vs bound " + io::format_double(bound));
    }
};

TubalTensor symmetrize(const TubalTensor& a) {
    TubalTensor s = ttranspose(a);
    s += a;
    s *= 0.5;
    return s;
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
    Harness h;

    // algebra oracle equivalence
    {
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const std::uint64_t s = mix_seed(1001, trial);
            const int k = std::vector<int>{1, 3, 4, 8}[trial % 4];
            const int n1 = 2 + static_cast<int>(mix_seed(s, 0) % 5);
            const int q = 2 + static_cast<int>(mix_seed(s, 1) % 5);
            const int n2 = 2 + static_cast<int>(mix_seed(s, 2) % 5);
            TubalTensor a = random_gaussian(n1, q, k, 1.0, mix_seed(s, 3));
            TubalTensor b = random_gaussian(q, n2, k, 1.0, mix_seed(s, 4));
            worst = std::max(worst, fro_norm(tprod(a, b) - tprod_naive(a, b)) /
                                        (1.0 + fro_norm(a) * fro_norm(b)));
        }
        h.check_le("tprod matches tprod_naive", worst, 1e-11);
    }

    // Parseval + transpose Fourier property
    {
        TubalTensor t = random_gaussian(5, 4, 4, 1.0, 1002);
        FourierBlocks f = dft_tubes(t);
        double fs = 0.0;
        for (const auto& m : f.slices) fs += m.squaredNorm();
        h.check_le("Parseval identity", std::abs(fro_norm(t) * fro_norm(t) - fs / 4.0),
                   1e-10 * fro_norm(t) * fro_norm(t));
        FourierBlocks ftt = dft_tubes(ttranspose(t));
        double worst = 0.0;
        for (int j = 0; j < 4; ++j) {
            worst = std::max(worst, (ftt.slices[j] - f.slices[j].adjoint()).norm());
        }
        h.check_le("transpose maps to slice adjoints", worst, 1e-12 * (1.0 + fro_norm(t)));
    }

    // nuclear norm of Gram tensors
    {
        TubalTensor u = random_gaussian(5, 3, 4, 1.0, 1003);
        const double want = fro_norm(u) * fro_norm(u);
        h.check_le("nuclear_norm(U U^T) = ||U||_F^2",
                   std::abs(nuclear_norm(tprod(u, ttranspose(u))) - want), 1e-9 * want);
    }

    // t-SVD contract
    {
        double worst_rec = 0.0, worst_orth = 0.0;
        for (int trial = 0; trial < 8; ++trial) {
            TubalTensor t = random_gaussian(6, 4, 4, 1.0, mix_seed(1004, trial));
            TSvd f = tsvd(t);
            worst_rec = std::max(
                worst_rec, fro_norm(tprod(f.U, tprod(f.S, ttranspose(f.V))) - t) / fro_norm(t));
            worst_orth = std::max(worst_orth, detail::orthonormality_residual(f.U));
        }
        h.check_le("t-SVD reconstruction", worst_rec, 1e-9);
        h.check_le("t-SVD factor orthogonality", worst_orth, 1e-9);
        TubalTensor x = random_gaussian(10, 3, 4, 1.0, 1005);
        h.check("tubal_rank(X X^T) = 3", tubal_rank(tprod(x, ttranspose(x))) == 3);
    }

    // sensing identities
    {
        sensing::MeasurementEnsemble e = sensing::sample_ensemble(6, 4, 60, 1006);
        TubalTensor z = symmetrize(random_gaussian(6, 6, 4, 1.0, 1007));
        GaussianStream g(1008);
        Eigen::VectorXd y(60);
        for (int i = 0; i < 60; ++i) y(i) = g.next();
        const double lhs = sensing::forward(e, z).dot(y);
        const double rhs = inner(z, sensing::adjoint(e, y));
        h.check_le("adjoint identity", std::abs(lhs - rhs), 1e-10 * fro_norm(z) * y.norm());
        h.check("normal_op PSD", inner(z, sensing::normal_op(e, z)) >= -1e-10);
    }

    // gradient finite differences + dual-form step
    {
        solver::ProblemInstance p = solver::make_instance(6, 2, 3, 12, 80, 1e-4, 1e-2, 1009);
        TubalTensor u = random_gaussian(6, 12, 3, 0.4, 1010);
        TubalTensor grad = solver::gradient(p, u);
        const double hstep = 1e-6 * (1.0 + fro_norm(u));
        double worst = 0.0;
        for (int d = 0; d < 5; ++d) {
            TubalTensor dir = random_gaussian(6, 12, 3, 1.0, mix_seed(1011, d));
            dir *= 1.0 / fro_norm(dir);
            TubalTensor up = u, dn = u;
            up += hstep * dir;
            dn += (-hstep) * dir;
            const double fd = (solver::loss(p, up) - solver::loss(p, dn)) / (2.0 * hstep);
            const double an = inner(grad, dir);
            worst = std::max(worst, std::abs(fd - an) / (1.0 + std::abs(an)));
        }
        h.check_le("gradient finite differences", worst, 1e-5);

        solver::GDState s;
        s.t = 0;
        s.U = u;
        s.residual = p.y - sensing::forward(p.ensemble, tprod(u, ttranspose(u)));
        solver::GDState s1 = solver::gd_step(p, s);
        TubalTensor diff = tprod(p.X, ttranspose(p.X)) - tprod(u, ttranspose(u));
        TubalTensor mu_m = sensing::normal_op(p.ensemble, diff);
        mu_m *= p.mu;
        TubalTensor via_normal = u + tprod(mu_m, u);
        h.check_le("gd_step dual-form agreement", fro_norm(s1.U - via_normal) / fro_norm(s1.U),
                   1e-10);

        solver::Decomposition d = solver::signal_noise_decompose(p, u);
        h.check_le("decomposition sums to U", fro_norm(d.signal + d.noise - u) / fro_norm(u),
                   1e-9);
        TubalTensor vx = tsvd(p.X, true).U;
        h.check_le("noise orthogonal to V_X",
                   spectral_norm(tprod(ttranspose(vx), d.noise)), 1e-8 * spectral_norm(u));
    }

    // power map homogeneity
    {
        solver::ProblemInstance p = solver::make_instance(6, 2, 3, 12, 80, 1e-4, 1e-2, 1012);
        solver::GDState s = solver::init_state(p);
        TubalTensor a = solver::power_iterates(p, 2.0 * s.U, 5);
        TubalTensor b = 2.0 * solver::power_iterates(p, s.U, 5);
        h.check_le("power map degree-1 homogeneity", fro_norm(a - b) / (1.0 + fro_norm(b)),
                   1e-10);
    }

    // container + csv round trips
    {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() / "tubal_selftest";
        fs::create_directories(dir);
        const std::string path = (dir / "roundtrip.tbl").string();
        std::vector<TubalTensor> ts = {random_gaussian(4, 3, 2, 1.0, 1013),
                                       random_gaussian(4, 3, 2, 1.0, 1014)};
        io::write_tensors(path, ts, 99);
        io::TensorFile f = io::read_tensors(path);
        h.check("container round trip",
                f.seed == 99 && f.tensors.size() == 2 && f.tensors[0].data() == ts[0].data() &&
                    f.tensors[1].data() == ts[1].data());
        fs::remove(path);

        io::RunConfig c;
        io::CsvData parsed = io::parse_csv(io::trace_csv_string(c, {}));
        h.check("csv provenance round trip",
                io::config_from_pairs(parsed.provenance).to_pairs() == c.to_pairs());
    }

    // chart parse-back
    {
        io::Series s;
        s.name = "probe";
        s.x = {1.0, 2.0, 3.0, 4.0};
        s.y = {0.5, 0.25, 0.125, 0.0625};
        io::ChartSpec spec;
        spec.title = "selftest";
        spec.log_y = true;
        const std::string svg = io::chart_svg_string(spec, {s});
        io::Series back = io::parse_series_from_svg(svg, "probe");
        double worst = 0.0;
        for (size_t i = 0; i < s.x.size(); ++i) {
            worst = std::max(worst, std::abs(back.y[i] - s.y[i]) / s.y[i]);
        }
        h.check_le("svg parse-back", worst, 1e-2);
    }

    return h.results;
}

}  // namespace tubal
