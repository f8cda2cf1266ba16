#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "tubal/sensing.hpp"
#include "tubal/tensor.hpp"
#include "tubal/tsvd.hpp"

namespace tubal::solver {

enum class Normalization { kSpectral, kFrobenius };

const char* to_string(Normalization n);
Normalization normalization_from_string(const std::string& s);

/// Ground truth, measurements, and the hyperparameters of one recovery run.
struct ProblemInstance {
    TubalTensor X;  // n x r x k factor, normalized per `normalization`
    sensing::MeasurementEnsemble ensemble;
    Eigen::VectorXd y;  // forward(X * X^T)
    int n = 0, r = 0, k = 0, R = 0, m = 0;
    double alpha = 0.0;
    double mu = 0.0;
    std::uint64_t seed = 0;
    Normalization normalization = Normalization::kSpectral;
};

struct GDState {
    long t = 0;
    TubalTensor U;              // n x R x k
    Eigen::VectorXd residual;   // y - forward(U * U^T), kept in sync by gd_step
};

/// Signal/noise split of an iterate along the ground-truth column space.
struct Decomposition {
    TubalTensor Wt;      // R x r x k, right factors of tsvd(V_X^T * U)
    TubalTensor Wperp;   // R x (R - r) x k
    TubalTensor signal;  // U * Wt * Wt^T
    TubalTensor noise;   // U * Wperp * Wperp^T
};

/// One row of the per-iteration trace. Optional fields are missing when the
/// quantity was not tracked (power_gap) or not computable at this state
/// (signal factor rank-deficient).
struct IterateMetrics {
    long t = 0;
    double loss = 0.0;
    double test_err = 0.0;
    double sig_tube_err = 0.0;
    double u_spec_norm = 0.0;  // spectral_norm(U_t)
    double angle_L_Lt = 0.0;
    double angle_X_Lt = 0.0;
    std::optional<double> angle_X_UW;
    std::optional<double> noise_spec_norm;
    std::optional<double> decomp_resid;  // spectral_norm(V_X^T * noise)
    std::vector<double> sigma_r_slices;    // sigma_r of each Fourier slice of U_t
    std::vector<double> sigma_r1_slices;   // sigma_{r+1}, empty if r = min(n,R)
    std::optional<double> power_gap;       // ||U_t - Utilde_t|| / ||Utilde_t||
    std::optional<Eigen::MatrixXd> full_spectrum;  // k x min(n,R), on request
};

struct MetricsConfig {
    int stride = 10;
    bool track_power = false;
    bool record_slice_spectra = false;
};

/// Quantities shared by every metrics evaluation of one instance.
struct MetricsContext {
    TubalTensor VX;  // tensor-column basis of X (left factor of tsvd(X))
    TubalTensor M;   // normal_op(X * X^T)
    TubalTensor L;   // first r tensor-columns of V from tsvd(M)
    std::vector<double> sigma_r_X;  // r-th singular tube of X
    double norm_XXt = 0.0;          // fro_norm(X * X^T)
    TubalTensor XXt;
};

MetricsContext make_metrics_context(const ProblemInstance& p);

ProblemInstance make_instance(int n, int r, int k, int R, int m, double alpha, double mu,
                              std::uint64_t seed,
                              Normalization normalization = Normalization::kSpectral);

/// U_0 with i.i.d. N(0, alpha^2 / R) entries.
GDState init_state(const ProblemInstance& p);

double loss(const ProblemInstance& p, const TubalTensor& u);

/// Gradient of loss: 4 * adjoint(forward(U*U^T) - y) * U. The gd_step update
/// is U - (mu/4) * gradient, i.e. the update absorbs the constant into mu.
TubalTensor gradient(const ProblemInstance& p, const TubalTensor& u);

/// One update U <- U + mu * adjoint(y - forward(U*U^T)) * U. Throws
/// Divergence once spectral_norm(U) exceeds 1e6 * spectral_norm(X).
GDState gd_step(const ProblemInstance& p, const GDState& s);

/// Full run with metric capture every `stride` iterations (t = 0 and the
/// final iterate always included). `final_state`, when given, receives the
/// last iterate for checkpointing.
std::vector<IterateMetrics> run_gd(const ProblemInstance& p, long iters,
                                   const MetricsConfig& cfg,
                                   GDState* final_state = nullptr);

/// One application of the power map: U <- U + mu * M * U.
TubalTensor power_step(const ProblemInstance& p, const TubalTensor& m,
                       const TubalTensor& u);

/// Utilde_t = (I + mu * normal_op(X*X^T))^{*t} * U0 by repeated application.
TubalTensor power_iterates(const ProblemInstance& p, const TubalTensor& u0, long t);

/// Split U into signal and noise along V_X. Throws RankDeficientSignal when
/// some slice of V_X^T * U has sigma_r <= 1e-12 * spectral_norm(U).
Decomposition signal_noise_decompose(const ProblemInstance& p, const TubalTensor& u);
Decomposition signal_noise_decompose(const MetricsContext& ctx, const TubalTensor& u);

struct MetricsExtras {
    const TubalTensor* power_iterate = nullptr;  // Utilde_t when tracked
    bool record_slice_spectra = false;
};

IterateMetrics compute_metrics(const ProblemInstance& p, const MetricsContext& ctx,
                               const GDState& s, const MetricsExtras& extras = {});

/// Per-slice evaluation of the two singular-value inequalities and the
/// principal-angle bound that relate U_t to the power iterates, using
/// E_t = U_t - Utilde_t computed by direct subtraction.
struct Lemma82SliceReport {
    int slice = 0;
    double sigma_r_Ut = 0.0;
    double sigma_r1_Ut = 0.0;
    double sigma_r_Zt = 0.0;
    double sigma_r1_Zt = 0.0;
    double lower_bound = 0.0;   // alpha
                                // * sigma_r(Z_t^j) * sigma_min(V_L^T * U) - ||E||
    double upper_bound = 0.0;   // alpha * sigma_{r+1}(Z_t^j) * ||U|| + ||E||
    bool hypothesis_ok = false;
    bool ineq1_ok = false;
    bool ineq2_ok = false;
};

struct Lemma82Report {
    long t = 0;
    double E_norm = 0.0;        // ||U_t - Utilde_t||
    double Utilde_norm = 0.0;   // ||Utilde_t||
    bool past_t_star = false;   // ||E_t|| > ||Utilde_t||: hypothesis regime left
    double sigma_min_VL_U = 0.0;
    double U_unit_norm = 0.0;   // ||U_0 / alpha||
    std::vector<Lemma82SliceReport> slices;
    double angle_bound = 0.0;    // max over slices of the lemma's bound
    double angle_measured = 0.0; // principal_angle(L, L_t)
    bool angle_ok = false;
};

Lemma82Report lemma82_diagnostic(const ProblemInstance& p, const MetricsContext& ctx,
                                 const GDState& s, const TubalTensor& u0);

/// First `count` tensor-columns of t.
TubalTensor take_columns(const TubalTensor& t, int count);

}  // namespace tubal::solver
