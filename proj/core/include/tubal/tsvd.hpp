#pragma once

#include <Eigen/Dense>

#include "tubal/tensor.hpp"

namespace tubal {

/// t-SVD triple T = U * S * V^T with orthonormal tensor-columns in U, V and
/// f-diagonal S. Reduced form has p = min(n1, n2); full form carries square
/// U (n1 x n1) and V (n2 x n2) with S of shape n1 x n2.
struct TSvd {
    TubalTensor U;
    TubalTensor S;
    TubalTensor V;
    bool reduced = true;
};

/// Singular values of every Fourier slice: row j holds the nonincreasing
/// spectrum of the j-th slice.
struct SliceSpectrum {
    Eigen::MatrixXd values;  // k rows, min(n1,n2) columns

    double sigma(int slice, int i) const { return values(slice, i); }
    int k() const { return static_cast<int>(values.rows()); }
    int count() const { return static_cast<int>(values.cols()); }
};

/// Per-slice complex SVD in the Fourier domain, assembled back to real
/// factors. Slices j = 0..floor(k/2) are factored; the rest are filled by
/// conjugation of their mirror partners so the output is exactly real.
/// Singular-vector phases are fixed (largest-magnitude entry of each left
/// vector made real-positive) so the output is deterministic.
TSvd tsvd(const TubalTensor& t, bool reduced = true);

/// Number of singular tubes with euclidean norm above tol. Negative tol
/// selects the default 1e-9 * spectral_norm(t).
int tubal_rank(const TubalTensor& t, double tol = -1.0);

/// i-th diagonal tube of S from tsvd(t), length k (0-based index).
std::vector<double> singular_tube(const TubalTensor& t, int i);

/// max over slices of sigma_1 divided by min over slices of sigma_min.
double condition_number(const TubalTensor& t);

SliceSpectrum slice_spectrum(const TubalTensor& t);

/// Orthonormal complement of an orthonormal-column tensor: W_perp with
/// W_perp^T * W_perp = I, W_perp^T * W = 0 and W*W^T + W_perp*W_perp^T = I.
TubalTensor orth_complement(const TubalTensor& w);

/// Largest principal angle measure between two orthonormal-column tensors:
/// max over Fourier slices of || (I - V1 V1^H) V2 ||_2, a value in [0, 1].
double principal_angle(const TubalTensor& v1, const TubalTensor& v2);

/// Detects slices where a singular value is below tol while the
/// corresponding singular tube norm is above it (non-invertible tube:
/// range and kernel share generators). Returns indices (tube, slice).
std::vector<std::pair<int, int>> noninvertible_tubes(const TubalTensor& t, double tol = -1.0);

namespace detail {
/// Orthonormality residual spectral_norm(W^T * W - I); used for preflight
/// checks in orth_complement / principal_angle.
double orthonormality_residual(const TubalTensor& w);
}  // namespace detail

}  // namespace tubal
