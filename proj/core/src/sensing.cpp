#include "tubal/sensing.hpp"

#include <cmath>
#include <string>

namespace tubal::sensing {

MeasurementEnsemble::MeasurementEnsemble(std::vector<TubalTensor> tensors, std::uint64_t seed)
    : seed_(seed), tensors_(std::move(tensors)) {
    if (tensors_.empty()) throw InvalidDims("ensemble needs at least one tensor");
    n_ = tensors_[0].n1();
    k_ = tensors_[0].k();
    for (size_t i = 0; i < tensors_.size(); ++i) {
        const TubalTensor& a = tensors_[i];
        if (a.n1() != n_ || a.n2() != n_ || a.k() != k_) {
            throw ShapeMismatch("ensemble tensor " + std::to_string(i) +
                                " does not share the common n x n x k shape");
        }
        const double resid = fro_norm(a - ttranspose(a));
        if (resid > 1e-12 * fro_norm(a)) {
            throw ShapeMismatch("ensemble tensor " + std::to_string(i) +
                                " is not tubal-symmetric (residual " +
                                std::to_string(resid) + ")");
        }
    }
}

void MeasurementEnsemble::precompute_fourier() const {
    if (cache_) return;
    std::vector<FourierBlocks> c;
    c.reserve(tensors_.size());
    for (const auto& a : tensors_) c.push_back(dft_tubes(a));
    cache_ = std::move(c);
}

const FourierBlocks& MeasurementEnsemble::fourier(int i) const {
    precompute_fourier();
    return (*cache_)[static_cast<size_t>(i)];
}

MeasurementEnsemble sample_ensemble(int n, int k, int m, std::uint64_t seed) {
    if (n <= 0 || k <= 0 || m <= 0) {
        throw InvalidDims("sample_ensemble: n, k, m must be positive");
    }
    const double sd = 1.0 / std::sqrt(static_cast<double>(m));
    std::vector<TubalTensor> tensors;
    tensors.reserve(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        TubalTensor raw = random_gaussian(n, n, k, sd, mix_seed(seed, static_cast<std::uint64_t>(i)));
        TubalTensor sym = ttranspose(raw);
        sym += raw;
        sym *= 0.5;
        tensors.push_back(std::move(sym));
    }
    return MeasurementEnsemble(std::move(tensors), seed);
}

Eigen::VectorXd forward(const MeasurementEnsemble& e, const TubalTensor& z) {
    if (z.n1() != e.n() || z.n2() != e.n() || z.k() != e.k()) {
        throw ShapeMismatch("forward: Z shape does not match ensemble");
    }
    Eigen::VectorXd y(e.m());
    for (int i = 0; i < e.m(); ++i) y(i) = inner(e.tensor(i), z);
    return y;
}

TubalTensor adjoint(const MeasurementEnsemble& e, const Eigen::VectorXd& y) {
    if (y.size() != e.m()) {
        throw ShapeMismatch("adjoint: vector length " + std::to_string(y.size()) +
                            " != m = " + std::to_string(e.m()));
    }
    TubalTensor out(e.n(), e.n(), e.k());
    auto& data = out.data();
    for (int i = 0; i < e.m(); ++i) {
        const double w = y(i);
        const auto& src = e.tensor(i).data();
        for (size_t u = 0; u < data.size(); ++u) data[u] += w * src[u];
    }
    return out;
}

TubalTensor normal_op(const MeasurementEnsemble& e, const TubalTensor& z) {
    return adjoint(e, forward(e, z));
}

RipEstimate rip_estimate(const MeasurementEnsemble& e, int rank, int trials,
                         std::uint64_t seed) {
    if (rank < 1 || rank > e.n()) {
        throw InvalidRank("rip_estimate: rank must be in [1, n]");
    }
    if (trials < 1) throw InvalidDims("rip_estimate: trials must be >= 1");
    const int w = (rank + 1) / 2;
    RipEstimate out{std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
    for (int t = 0; t < trials; ++t) {
        TubalTensor g = random_gaussian(e.n(), w, e.k(), 1.0, mix_seed(seed, 2 * t));
        TubalTensor h = random_gaussian(e.n(), w, e.k(), 1.0, mix_seed(seed, 2 * t + 1));
        TubalTensor z = tprod(g, ttranspose(g)) - tprod(h, ttranspose(h));
        const double denom = fro_norm(z);
        if (denom == 0.0) continue;
        const double v = forward(e, z).squaredNorm() / (denom * denom) - 1.0;
        out.delta_lo = std::min(out.delta_lo, v);
        out.delta_hi = std::max(out.delta_hi, v);
    }
    return out;
}

namespace {

double deviation_norm(const MeasurementEnsemble& e, const TubalTensor& z) {
    return spectral_norm(z - normal_op(e, z));
}

}  // namespace

double s2s_residual(const MeasurementEnsemble& e, const TubalTensor& z) {
    const double denom = spectral_norm(z);
    if (denom == 0.0) throw DivisionByZero("s2s_residual: zero spectral norm");
    return deviation_norm(e, z) / denom;
}

double s2n_residual(const MeasurementEnsemble& e, const TubalTensor& z) {
    const double denom = nuclear_norm(z);
    if (denom == 0.0) throw DivisionByZero("s2n_residual: zero nuclear norm");
    return deviation_norm(e, z) / denom;
}

}  // namespace tubal::sensing
