#include "doctest.h"

#include <cmath>

#include "test_support.hpp"
#include "tubal/sensing.hpp"

using namespace tubal;
using namespace tubal::sensing;
using tubal::test::symmetrize;

namespace {

// Orthonormal basis of the tubal-symmetric space for small n, k under the
// entrywise inner product; forward() with it is an exact isometry.
MeasurementEnsemble exact_isometry_ensemble(int n, int k) {
    std::vector<TubalTensor> basis;
    auto sigma = [k](int j) { return j == 0 ? 0 : k - j; };
    // Entry classes: (i, ip, j) paired with (ip, i, sigma(j)).
    std::vector<std::vector<char>> used(
        static_cast<size_t>(k), std::vector<char>(static_cast<size_t>(n) * n, 0));
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < k; ++j) {
        for (int ip = 0; ip < n; ++ip) {
            for (int i = 0; i < n; ++i) {
                if (used[static_cast<size_t>(j)][static_cast<size_t>(ip) * n + i]) continue;
                const int mi = ip, mip = i, mj = sigma(j);
                used[static_cast<size_t>(j)][static_cast<size_t>(ip) * n + i] = 1;
                TubalTensor b(n, n, k);
                if (mi == i && mip == ip && mj == j) {
                    b(i, ip, j) = 1.0;
                } else {
                    used[static_cast<size_t>(mj)][static_cast<size_t>(mip) * n + mi] = 1;
                    b(i, ip, j) = inv_sqrt2;
                    b(mi, mip, mj) = inv_sqrt2;
                }
                basis.push_back(std::move(b));
            }
        }
    }
    return MeasurementEnsemble(std::move(basis), 0);
}

}  // namespace

TEST_CASE("sample_ensemble: exact symmetry and reproducibility") {
    MeasurementEnsemble e = sample_ensemble(4, 3, 1, 9);
    const TubalTensor& a = e.tensor(0);
    CHECK(fro_norm(a - ttranspose(a)) == 0.0);

    MeasurementEnsemble e1 = sample_ensemble(4, 3, 5, 10);
    MeasurementEnsemble e2 = sample_ensemble(4, 3, 5, 10);
    for (int i = 0; i < 5; ++i) CHECK(e1.tensor(i).data() == e2.tensor(i).data());
    CHECK(e1.seed() == 10);

    CHECK_THROWS_AS(sample_ensemble(0, 3, 5, 1), InvalidDims);
}

TEST_CASE("sample_ensemble: measurement variance matches the covariance oracle") {
    // For the symmetrized ensemble, Cov(A(u), A(v)) =
    // (1/2m) (delta_{uv} + delta_{u, transpose(v)}). The empirical variance of
    // <A_i, Z> over the ensemble must sit near the oracle value.
    const int n = 10, k = 4, m = 254;
    TubalTensor z = symmetrize(random_gaussian(n, n, k, 1.0, 123));
    z *= 1.0 / fro_norm(z);

    TubalTensor zt = ttranspose(z);
    double oracle = 0.0;
    for (size_t u = 0; u < z.data().size(); ++u) {
        oracle += z.data()[u] * (z.data()[u] + zt.data()[u]) / (2.0 * m);
    }
    // symmetric Z: oracle reduces to ||Z||_F^2 / m = 1/m
    CHECK(oracle == doctest::Approx(1.0 / m).epsilon(1e-12));

    MeasurementEnsemble e = sample_ensemble(n, k, m, 2024);
    Eigen::VectorXd y = forward(e, z);
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / m;
    CHECK(var > 0.8 * oracle);
    CHECK(var < 1.2 * oracle);
}

TEST_CASE("forward: zero input, linearity, adjoint identity") {
    MeasurementEnsemble e = sample_ensemble(5, 4, 20, 3);
    CHECK(forward(e, TubalTensor(5, 5, 4)).norm() == 0.0);

    TubalTensor z1 = symmetrize(random_gaussian(5, 5, 4, 1.0, 4));
    TubalTensor z2 = symmetrize(random_gaussian(5, 5, 4, 1.0, 5));
    Eigen::VectorXd lhs = forward(e, 2.0 * z1 + (-3.0) * z2);
    Eigen::VectorXd rhs = 2.0 * forward(e, z1) - 3.0 * forward(e, z2);
    CHECK((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));

    GaussianStream g(77);
    Eigen::VectorXd y(20);
    for (int i = 0; i < 20; ++i) y(i) = g.next();
    const double a = forward(e, z1).dot(y);
    const double b = inner(z1, adjoint(e, y));
    CHECK(std::abs(a - b) <= 1e-10 * fro_norm(z1) * y.norm());

    CHECK_THROWS_AS(forward(e, TubalTensor(4, 4, 4)), ShapeMismatch);
}

TEST_CASE("adjoint: unit vector picks one tensor, zero gives zero") {
    MeasurementEnsemble e = sample_ensemble(4, 3, 6, 8);
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(6);
    e1(0) = 1.0;
    CHECK(fro_norm(adjoint(e, e1) - e.tensor(0)) == 0.0);
    CHECK(fro_norm(adjoint(e, Eigen::VectorXd::Zero(6))) == 0.0);
    CHECK(fro_norm(adjoint(e, e1) - ttranspose(adjoint(e, e1))) <= 1e-14);
    CHECK_THROWS_AS(adjoint(e, Eigen::VectorXd::Zero(5)), ShapeMismatch);
}

TEST_CASE("normal_op: composition, self-adjointness, positive semidefiniteness") {
    MeasurementEnsemble e = sample_ensemble(5, 4, 30, 11);
    CHECK(fro_norm(normal_op(e, TubalTensor(5, 5, 4))) == 0.0);

    TubalTensor z1 = symmetrize(random_gaussian(5, 5, 4, 1.0, 12));
    TubalTensor z2 = symmetrize(random_gaussian(5, 5, 4, 1.0, 13));
    CHECK(normal_op(e, z1).data() == adjoint(e, forward(e, z1)).data());

    const double a = inner(normal_op(e, z1), z2);
    const double b = inner(z1, normal_op(e, z2));
    CHECK(std::abs(a - b) <= 1e-10 * (1.0 + std::abs(a)));
    CHECK(inner(z1, normal_op(e, z1)) >= -1e-10);
}

TEST_CASE("rip_estimate: exact isometry ensemble reports delta ~ 0") {
    MeasurementEnsemble e = exact_isometry_ensemble(3, 2);
    // sanity: it really is an isometry on symmetric tensors
    TubalTensor z = symmetrize(random_gaussian(3, 3, 2, 1.0, 21));
    CHECK(forward(e, z).squaredNorm() ==
          doctest::Approx(fro_norm(z) * fro_norm(z)).epsilon(1e-12));

    RipEstimate d = rip_estimate(e, 2, 50, 5);
    CHECK(std::abs(d.delta_lo) <= 1e-8);
    CHECK(std::abs(d.delta_hi) <= 1e-8);
}

TEST_CASE("rip_estimate: invariant under ensemble rewriting") {
    const int n = 5, k = 3, m = 12;
    MeasurementEnsemble e = sample_ensemble(n, k, m, 31);
    std::vector<TubalTensor> doubled;
    const double scale = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < m; ++i) {
        TubalTensor half = e.tensor(i);
        half *= scale;
        doubled.push_back(half);
        doubled.push_back(half);
    }
    MeasurementEnsemble e2(std::move(doubled), 31);
    RipEstimate d1 = rip_estimate(e, 2, 40, 7);
    RipEstimate d2 = rip_estimate(e2, 2, 40, 7);
    CHECK(std::abs(d1.delta_lo - d2.delta_lo) <= 1e-10);
    CHECK(std::abs(d1.delta_hi - d2.delta_hi) <= 1e-10);
}

TEST_CASE("rip_estimate: paper-scale sanity envelope") {
    MeasurementEnsemble e = sample_ensemble(10, 4, 254, 41);
    RipEstimate d = rip_estimate(e, 1, 500, 42);
    CHECK(d.delta_hi < 0.9);
    CHECK(d.delta_lo > -0.9);
    CHECK(d.delta_lo <= d.delta_hi);
    CHECK_THROWS_AS(rip_estimate(e, 11, 10, 1), InvalidRank);
    CHECK_THROWS_AS(rip_estimate(e, 1, 0, 1), InvalidDims);
}

TEST_CASE("s2s/s2n residuals: exact isometry and zero input") {
    MeasurementEnsemble iso = exact_isometry_ensemble(3, 2);
    TubalTensor g = random_gaussian(3, 1, 2, 1.0, 51);
    TubalTensor z = tprod(g, ttranspose(g));
    CHECK(s2s_residual(iso, z) <= 1e-10);
    CHECK(s2n_residual(iso, z) <= 1e-10);
    CHECK_THROWS_AS(s2s_residual(iso, TubalTensor(3, 3, 2)), DivisionByZero);
    CHECK_THROWS_AS(s2n_residual(iso, TubalTensor(3, 3, 2)), DivisionByZero);
}

TEST_CASE("Lemma H.2 / H.3 style bounds hold statistically") {
    const int n = 10, k = 4, m = 254;
    MeasurementEnsemble e = sample_ensemble(n, k, m, 61);
    RipEstimate d2 = rip_estimate(e, 2, 200, 62);
    const double dhat = std::max(std::abs(d2.delta_lo), std::abs(d2.delta_hi));
    int ok_s2s = 0, ok_s2n = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        TubalTensor g = random_gaussian(n, 1, k, 1.0, mix_seed(63, t));
        TubalTensor z = tprod(g, ttranspose(g));
        if (s2s_residual(e, z) <= std::sqrt(k * 1.0) * dhat * 2.0) ++ok_s2s;
        if (s2n_residual(e, z) * nuclear_norm(z) <=
            std::sqrt(static_cast<double>(k)) * dhat * nuclear_norm(z) * 2.0)
            ++ok_s2n;
    }
    CHECK(ok_s2s >= 95);
    CHECK(ok_s2n >= 95);
}

TEST_CASE("fourier cache is behaviorally invisible") {
    MeasurementEnsemble e = sample_ensemble(4, 3, 10, 71);
    TubalTensor z = symmetrize(random_gaussian(4, 4, 3, 1.0, 72));
    Eigen::VectorXd before = forward(e, z);
    CHECK_FALSE(e.fourier_cached());
    e.precompute_fourier();
    CHECK(e.fourier_cached());
    Eigen::VectorXd after = forward(e, z);
    CHECK(before == after);
    CHECK(e.fourier(0).slices.size() == 3);
}
