#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "tubal/errors.hpp"

namespace tubal {

/// Real order-3 tensor with dimensions n1 x n2 x k.
///
/// Storage is slice-major with column-major frontal slices: entry (i, i', j)
/// (0-based) lives at offset j*n1*n2 + i'*n1 + i. This layout is part of the
/// on-disk container format contract and must not change.
class TubalTensor {
public:
    TubalTensor() : n1_(0), n2_(0), k_(0) {}
    TubalTensor(int n1, int n2, int k);
    TubalTensor(int n1, int n2, int k, std::vector<double> data);

    int n1() const { return n1_; }
    int n2() const { return n2_; }
    int k() const { return k_; }

    double operator()(int i, int ip, int j) const {
        return data_[static_cast<size_t>(j) * n1_ * n2_ + static_cast<size_t>(ip) * n1_ + i];
    }
    double& operator()(int i, int ip, int j) {
        return data_[static_cast<size_t>(j) * n1_ * n2_ + static_cast<size_t>(ip) * n1_ + i];
    }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    /// Frontal slice j as a column-major Eigen view.
    Eigen::Map<const Eigen::MatrixXd> slice(int j) const;
    Eigen::Map<Eigen::MatrixXd> slice(int j);

    bool same_shape(const TubalTensor& o) const {
        return n1_ == o.n1_ && n2_ == o.n2_ && k_ == o.k_;
    }

    TubalTensor& operator+=(const TubalTensor& o);
    TubalTensor& operator-=(const TubalTensor& o);
    TubalTensor& operator*=(double s);

    friend TubalTensor operator+(TubalTensor a, const TubalTensor& b) { return a += b; }
    friend TubalTensor operator-(TubalTensor a, const TubalTensor& b) { return a -= b; }
    friend TubalTensor operator*(double s, TubalTensor t) { return t *= s; }

    /// Throws if any entry is NaN/Inf.
    void validate_finite() const;

private:
    int n1_, n2_, k_;
    std::vector<double> data_;
};

/// Complex per-slice stack: the block-diagonal Fourier representation of a
/// tubal tensor. slices[j] is the j-th DFT frontal slice.
struct FourierBlocks {
    int n1 = 0, n2 = 0, k = 0;
    std::vector<Eigen::MatrixXcd> slices;

    FourierBlocks() = default;
    FourierBlocks(int n1_, int n2_, int k_)
        : n1(n1_), n2(n2_), k(k_),
          slices(static_cast<size_t>(k_), Eigen::MatrixXcd::Zero(n1_, n2_)) {}

    double fro_norm() const;
};

/// Unnormalized forward DFT along the tubes (mode 3).
FourierBlocks dft_tubes(const TubalTensor& t);

/// Inverse of dft_tubes (1/k-scaled). Throws SymmetryViolation when the
/// imaginary residue after inversion exceeds 1e-8 * ||f|| (Frobenius).
TubalTensor idft_tubes(const FourierBlocks& f);

/// t-product via slicewise products in the Fourier domain.
TubalTensor tprod(const TubalTensor& a, const TubalTensor& b);

/// Definitional t-product: sums of circular convolutions of tubes, O(k^2) per
/// tube. Reference oracle for tprod; do not use in hot paths.
TubalTensor tprod_naive(const TubalTensor& a, const TubalTensor& b);

/// Tubal transpose: transpose each frontal slice and reverse slices 2..k.
TubalTensor ttranspose(const TubalTensor& t);

/// Identity tensor: slice 1 is I_n, remaining slices zero.
TubalTensor tidentity(int n, int k);

/// Entrywise inner product (equals (1/k) Re sum_j <A_j, B_j> in Fourier).
double inner(const TubalTensor& a, const TubalTensor& b);

double fro_norm(const TubalTensor& t);

/// max over slices of the largest singular value of the Fourier slice.
double spectral_norm(const TubalTensor& t);

/// (1/k) * sum over slices of the slice nuclear norm. This scaling makes
/// nuclear_norm(U * U^T) == fro_norm(U)^2.
double nuclear_norm(const TubalTensor& t);

/// min over slices of the smallest singular value of the Fourier slice.
double sigma_min_tensor(const TubalTensor& t);

/// i.i.d. N(0, stddev^2) entries from a portable generator (mt19937_64 +
/// Box-Muller, entries filled in memory layout order). Same seed, same tensor.
TubalTensor random_gaussian(int n1, int n2, int k, double stddev, std::uint64_t seed);

/// Stream of standard normals: std::mt19937_64 raw output (pinned by the
/// standard) mapped to (0,1] and fed through the Marsaglia polar method.
/// Same seed gives the same sequence on every conforming platform.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}
    double next();

private:
    double uniform01();  // in (0,1]
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// splitmix64-style mix for deriving independent substream seeds from
/// (master seed, tags).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace tubal
