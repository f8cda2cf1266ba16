#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "tubal/tensor.hpp"

namespace tubal::sensing {

/// m tubal-symmetric sensing tensors A_i of shape n x n x k. Immutable after
/// construction; all operations over it are pure.
class MeasurementEnsemble {
public:
    /// Takes ownership of already-symmetric tensors (residual checked
    /// against 1e-12 * ||A_i||_F). seed records provenance (0 if n/a).
    MeasurementEnsemble(std::vector<TubalTensor> tensors, std::uint64_t seed);

    int n() const { return n_; }
    int k() const { return k_; }
    int m() const { return static_cast<int>(tensors_.size()); }
    std::uint64_t seed() const { return seed_; }
    const std::vector<TubalTensor>& tensors() const { return tensors_; }
    const TubalTensor& tensor(int i) const { return tensors_[static_cast<size_t>(i)]; }

    /// Optional per-tensor Fourier forms. Purely a cache: no operation
    /// changes behavior based on its presence.
    void precompute_fourier() const;
    bool fourier_cached() const { return cache_.has_value(); }
    const FourierBlocks& fourier(int i) const;

private:
    int n_, k_;
    std::uint64_t seed_;
    std::vector<TubalTensor> tensors_;
    mutable std::optional<std::vector<FourierBlocks>> cache_;
};

/// Draw A_i with i.i.d. N(0, 1/m) entries, then symmetrize (A + A^T)/2.
MeasurementEnsemble sample_ensemble(int n, int k, int m, std::uint64_t seed);

/// y_i = <A_i, Z>.
Eigen::VectorXd forward(const MeasurementEnsemble& e, const TubalTensor& z);

/// sum_i y_i A_i; tubal-symmetric by construction.
TubalTensor adjoint(const MeasurementEnsemble& e, const Eigen::VectorXd& y);

/// adjoint(forward(Z)); self-adjoint and positive semidefinite as a map.
TubalTensor normal_op(const MeasurementEnsemble& e, const TubalTensor& z);

struct RipEstimate {
    double delta_lo;
    double delta_hi;
};

/// Monte-Carlo probe of the restricted isometry constant: min/max of
/// ||A(Z)||^2 / ||Z||_F^2 - 1 over random signed low-tubal-rank symmetric
/// Z = G*G^T - H*H^T with G, H of width ceil(rank/2). This is a lower bound
/// on the true delta, not a certificate.
RipEstimate rip_estimate(const MeasurementEnsemble& e, int rank, int trials,
                         std::uint64_t seed);

/// spectral_norm(Z - A*A(Z)) / spectral_norm(Z).
double s2s_residual(const MeasurementEnsemble& e, const TubalTensor& z);

/// spectral_norm(Z - A*A(Z)) / nuclear_norm(Z).
double s2n_residual(const MeasurementEnsemble& e, const TubalTensor& z);

}  // namespace tubal::sensing
