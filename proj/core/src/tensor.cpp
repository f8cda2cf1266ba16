#include "tubal/tensor.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <string>

namespace tubal {

namespace {

// n1/n2 may be zero: orthonormal complements of square tensors have width 0.
void check_dims(int n1, int n2, int k) {
    if (n1 < 0 || n2 < 0 || k <= 0) {
        throw InvalidDims("bad tensor dimensions " + std::to_string(n1) + "x" +
                          std::to_string(n2) + "x" + std::to_string(k));
    }
}

}  // namespace

TubalTensor::TubalTensor(int n1, int n2, int k) : n1_(n1), n2_(n2), k_(k) {
    check_dims(n1, n2, k);
    data_.assign(static_cast<size_t>(n1) * n2 * k, 0.0);
}

TubalTensor::TubalTensor(int n1, int n2, int k, std::vector<double> data)
    : n1_(n1), n2_(n2), k_(k), data_(std::move(data)) {
    check_dims(n1, n2, k);
    if (data_.size() != static_cast<size_t>(n1) * n2 * k) {
        throw InvalidDims("data length " + std::to_string(data_.size()) +
                          " does not match shape " + std::to_string(n1) + "x" +
                          std::to_string(n2) + "x" + std::to_string(k));
    }
    validate_finite();
}

void TubalTensor::validate_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) {
            throw NumericalFailure("tensor contains a non-finite entry");
        }
    }
}

Eigen::Map<const Eigen::MatrixXd> TubalTensor::slice(int j) const {
    return Eigen::Map<const Eigen::MatrixXd>(
        data_.data() + static_cast<size_t>(j) * n1_ * n2_, n1_, n2_);
}

Eigen::Map<Eigen::MatrixXd> TubalTensor::slice(int j) {
    return Eigen::Map<Eigen::MatrixXd>(
        data_.data() + static_cast<size_t>(j) * n1_ * n2_, n1_, n2_);
}

TubalTensor& TubalTensor::operator+=(const TubalTensor& o) {
    if (!same_shape(o)) throw ShapeMismatch("operator+=: shape mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
}

TubalTensor& TubalTensor::operator-=(const TubalTensor& o) {
    if (!same_shape(o)) throw ShapeMismatch("operator-=: shape mismatch");
    for (size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
}

TubalTensor& TubalTensor::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double FourierBlocks::fro_norm() const {
    double s = 0.0;
    for (const auto& m : slices) s += m.squaredNorm();
    return std::sqrt(s);
}

FourierBlocks dft_tubes(const TubalTensor& t) {
    const int n1 = t.n1(), n2 = t.n2(), k = t.k();
    FourierBlocks f(n1, n2, k);
    if (k == 1) {
        f.slices[0] = t.slice(0).cast<std::complex<double>>();
        return f;
    }
    Eigen::FFT<double> fft;
    Eigen::VectorXcd tube(k), spec(k);
    for (int ip = 0; ip < n2; ++ip) {
        for (int i = 0; i < n1; ++i) {
            for (int j = 0; j < k; ++j) tube[j] = t(i, ip, j);
            fft.fwd(spec, tube);
            for (int j = 0; j < k; ++j) f.slices[j](i, ip) = spec[j];
        }
    }
    return f;
}

TubalTensor idft_tubes(const FourierBlocks& f) {
    const int n1 = f.n1, n2 = f.n2, k = f.k;
    check_dims(n1, n2, k);
    if (static_cast<int>(f.slices.size()) != k) {
        throw ShapeMismatch("FourierBlocks slice count does not match k");
    }
    TubalTensor out(n1, n2, k);
    double imag_sq = 0.0;
    if (k == 1) {
        for (int ip = 0; ip < n2; ++ip)
            for (int i = 0; i < n1; ++i) {
                out(i, ip, 0) = f.slices[0](i, ip).real();
                imag_sq += std::norm(std::complex<double>(0.0, f.slices[0](i, ip).imag()));
            }
    } else {
        Eigen::FFT<double> fft;
        Eigen::VectorXcd spec(k), tube(k);
        for (int ip = 0; ip < n2; ++ip) {
            for (int i = 0; i < n1; ++i) {
                for (int j = 0; j < k; ++j) spec[j] = f.slices[j](i, ip);
                fft.inv(tube, spec);  // Eigen applies the 1/k scaling
                for (int j = 0; j < k; ++j) {
                    out(i, ip, j) = tube[j].real();
                    imag_sq += tube[j].imag() * tube[j].imag();
                }
            }
        }
    }
    const double ref = f.fro_norm();
    if (std::sqrt(imag_sq) > 1e-8 * (ref > 0.0 ? ref : 1.0)) {
        throw SymmetryViolation(
            "idft_tubes: imaginary residue " + std::to_string(std::sqrt(imag_sq)) +
            " exceeds 1e-8 * ||F|| = " + std::to_string(1e-8 * ref));
    }
    return out;
}

TubalTensor tprod(const TubalTensor& a, const TubalTensor& b) {
    if (a.n2() != b.n1() || a.k() != b.k()) {
        throw ShapeMismatch("tprod: inner dimensions or tube lengths differ");
    }
    FourierBlocks fa = dft_tubes(a);
    FourierBlocks fb = dft_tubes(b);
    FourierBlocks fc(a.n1(), b.n2(), a.k());
    for (int j = 0; j < a.k(); ++j) fc.slices[j].noalias() = fa.slices[j] * fb.slices[j];
    return idft_tubes(fc);
}

TubalTensor tprod_naive(const TubalTensor& a, const TubalTensor& b) {
    if (a.n2() != b.n1() || a.k() != b.k()) {
        throw ShapeMismatch("tprod_naive: inner dimensions or tube lengths differ");
    }
    const int n1 = a.n1(), q = a.n2(), n2 = b.n2(), k = a.k();
    TubalTensor c(n1, n2, k);
    // (A*B)(i,i',:) = sum_p  A(i,p,:) circ B(p,i',:)
    for (int i = 0; i < n1; ++i) {
        for (int ip = 0; ip < n2; ++ip) {
            for (int p = 0; p < q; ++p) {
                for (int j = 0; j < k; ++j) {
                    double s = 0.0;
                    for (int jp = 0; jp < k; ++jp) {
                        const int jq = (j - jp + k) % k;
                        s += a(i, p, jp) * b(p, ip, jq);
                    }
                    c(i, ip, j) += s;
                }
            }
        }
    }
    return c;
}

TubalTensor ttranspose(const TubalTensor& t) {
    const int n1 = t.n1(), n2 = t.n2(), k = t.k();
    TubalTensor out(n2, n1, k);
    out.slice(0) = t.slice(0).transpose();
    for (int j = 1; j < k; ++j) out.slice(j) = t.slice(k - j).transpose();
    return out;
}

TubalTensor tidentity(int n, int k) {
    if (n <= 0) throw InvalidDims("tidentity: n must be positive");
    TubalTensor out(n, n, k);
    out.slice(0).setIdentity();
    return out;
}

double inner(const TubalTensor& a, const TubalTensor& b) {
    if (!a.same_shape(b)) throw ShapeMismatch("inner: shape mismatch");
    double s = 0.0;
    const auto& da = a.data();
    const auto& db = b.data();
    for (size_t i = 0; i < da.size(); ++i) s += da[i] * db[i];
    return s;
}

double fro_norm(const TubalTensor& t) {
    double s = 0.0;
    for (double v : t.data()) s += v * v;
    return std::sqrt(s);
}

double spectral_norm(const TubalTensor& t) {
    FourierBlocks f = dft_tubes(t);
    double best = 0.0;
    for (const auto& m : f.slices) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        if (svd.singularValues().size() > 0) best = std::max(best, svd.singularValues()(0));
    }
    return best;
}

double nuclear_norm(const TubalTensor& t) {
    FourierBlocks f = dft_tubes(t);
    double s = 0.0;
    for (const auto& m : f.slices) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        s += svd.singularValues().sum();
    }
    return s / t.k();
}

double sigma_min_tensor(const TubalTensor& t) {
    FourierBlocks f = dft_tubes(t);
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& m : f.slices) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
        const auto& sv = svd.singularValues();
        worst = std::min(worst, sv.size() > 0 ? sv(sv.size() - 1) : 0.0);
    }
    return worst;
}

double GaussianStream::uniform01() {
    // Top 53 bits -> [0,1), flipped to (0,1] so log() below is safe.
    const std::uint64_t r = gen_();
    return 1.0 - static_cast<double>(r >> 11) * 0x1.0p-53;
}

double GaussianStream::next() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method.
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
}

TubalTensor random_gaussian(int n1, int n2, int k, double stddev, std::uint64_t seed) {
    check_dims(n1, n2, k);
    if (stddev < 0.0 || !std::isfinite(stddev)) {
        throw InvalidDims("random_gaussian: stddev must be finite and >= 0");
    }
    TubalTensor out(n1, n2, k);
    if (stddev == 0.0) return out;
    GaussianStream g(seed);
    for (double& v : out.data()) v = stddev * g.next();
    return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
    // splitmix64 finalizer over seed + golden-ratio * tag
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace tubal
