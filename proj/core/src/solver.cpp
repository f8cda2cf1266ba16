#include "tubal/solver.hpp"

#include <cmath>
#include <string>

namespace tubal::solver {

namespace {

constexpr std::uint64_t kTagX = 0x58;         // 'X'
constexpr std::uint64_t kTagEnsemble = 0x41;  // 'A'
constexpr std::uint64_t kTagInit = 0x55;      // 'U'

TubalTensor gram(const TubalTensor& u) { return tprod(u, ttranspose(u)); }

}  // namespace

const char* to_string(Normalization n) {
    return n == Normalization::kSpectral ? "spectral" : "frobenius";
}

Normalization normalization_from_string(const std::string& s) {
    if (s == "spectral") return Normalization::kSpectral;
    if (s == "frobenius") return Normalization::kFrobenius;
    throw ValidationError("normalization must be 'spectral' or 'frobenius', got '" + s + "'");
}

TubalTensor take_columns(const TubalTensor& t, int count) {
    if (count < 0 || count > t.n2()) throw IndexOutOfRange("take_columns: bad count");
    TubalTensor out(t.n1(), count, t.k());
    for (int j = 0; j < t.k(); ++j) out.slice(j) = t.slice(j).leftCols(count);
    return out;
}

ProblemInstance make_instance(int n, int r, int k, int R, int m, double alpha, double mu,
                              std::uint64_t seed, Normalization normalization) {
    if (n <= 0 || r <= 0 || k <= 0 || R <= 0 || m <= 0) {
        throw InvalidDims("make_instance: dimensions must be positive");
    }
    if (r > n) throw InvalidDims("make_instance: r > n");
    if (R < r) throw InvalidDims("make_instance: R < r");
    if (!(alpha > 0.0)) throw InvalidDims("make_instance: alpha must be positive");
    if (!(mu > 0.0)) throw InvalidDims("make_instance: mu must be positive");

    TubalTensor x = random_gaussian(n, r, k, 1.0, mix_seed(seed, kTagX));
    const double scale = normalization == Normalization::kSpectral
                             ? spectral_norm(x)
                             : fro_norm(x);
    if (scale <= 0.0) throw NumericalFailure("make_instance: degenerate ground truth draw");
    x *= 1.0 / scale;

    sensing::MeasurementEnsemble ensemble =
        sensing::sample_ensemble(n, k, m, mix_seed(seed, kTagEnsemble));
    Eigen::VectorXd y = sensing::forward(ensemble, gram(x));

    ProblemInstance p{std::move(x), std::move(ensemble), std::move(y),
                      n, r, k, R, m, alpha, mu, seed, normalization};
    return p;
}

GDState init_state(const ProblemInstance& p) {
    GDState s;
    s.t = 0;
    s.U = random_gaussian(p.n, p.R, p.k, p.alpha / std::sqrt(static_cast<double>(p.R)),
                          mix_seed(p.seed, kTagInit));
    s.residual = p.y - sensing::forward(p.ensemble, gram(s.U));
    return s;
}

double loss(const ProblemInstance& p, const TubalTensor& u) {
    return (sensing::forward(p.ensemble, gram(u)) - p.y).squaredNorm();
}

TubalTensor gradient(const ProblemInstance& p, const TubalTensor& u) {
    Eigen::VectorXd resid = sensing::forward(p.ensemble, gram(u)) - p.y;
    TubalTensor g = tprod(sensing::adjoint(p.ensemble, resid), u);
    g *= 4.0;
    return g;
}

GDState gd_step(const ProblemInstance& p, const GDState& s) {
    GDState next;
    next.t = s.t + 1;
    TubalTensor step = tprod(sensing::adjoint(p.ensemble, s.residual), s.U);
    step *= p.mu;
    next.U = s.U + step;
    // Cheap guard first; the exact spectral comparison only runs near the
    // threshold, which a healthy run never reaches.
    const double limit = 1e6 * spectral_norm(p.X);
    if (fro_norm(next.U) > limit && spectral_norm(next.U) > limit) {
        throw Divergence("gd_step: spectral_norm(U) exceeded 1e6 * spectral_norm(X) at t=" +
                             std::to_string(next.t),
                         next.t);
    }
    next.residual = p.y - sensing::forward(p.ensemble, gram(next.U));
    return next;
}

TubalTensor power_step(const ProblemInstance& p, const TubalTensor& m, const TubalTensor& u) {
    TubalTensor step = tprod(m, u);
    step *= p.mu;
    return u + step;
}

TubalTensor power_iterates(const ProblemInstance& p, const TubalTensor& u0, long t) {
    if (t < 0) throw InvalidDims("power_iterates: negative iteration count");
    TubalTensor m = sensing::normal_op(p.ensemble, gram(p.X));
    TubalTensor u = u0;
    for (long i = 0; i < t; ++i) u = power_step(p, m, u);
    return u;
}

MetricsContext make_metrics_context(const ProblemInstance& p) {
    MetricsContext ctx;
    ctx.VX = tsvd(p.X, true).U;
    ctx.XXt = gram(p.X);
    ctx.M = sensing::normal_op(p.ensemble, ctx.XXt);
    ctx.L = take_columns(tsvd(ctx.M, true).V, p.r);
    ctx.sigma_r_X = singular_tube(p.X, p.r - 1);
    ctx.norm_XXt = fro_norm(ctx.XXt);
    return ctx;
}

namespace {

Decomposition decompose_impl(const TubalTensor& vx, const TubalTensor& u, int r) {
    const int R = u.n2();
    TubalTensor b = tprod(ttranspose(vx), u);  // r x R x k
    SliceSpectrum sp = slice_spectrum(b);
    const double floor = 1e-12 * spectral_norm(u);
    for (int j = 0; j < b.k(); ++j) {
        const double sr = sp.values(j, r - 1);
        if (sr <= floor) {
            throw RankDeficientSignal(
                "signal factor V_X^T * U rank-deficient: slice " + std::to_string(j) +
                    " has sigma_r = " + std::to_string(sr),
                j, sr);
        }
    }
    Decomposition d;
    d.Wt = tsvd(b, true).V;  // R x r x k
    d.Wperp = orth_complement(d.Wt);
    d.signal = tprod(u, tprod(d.Wt, ttranspose(d.Wt)));
    if (R > r) {
        d.noise = tprod(u, tprod(d.Wperp, ttranspose(d.Wperp)));
    } else {
        d.noise = TubalTensor(u.n1(), u.n2(), u.k());
    }
    return d;
}

}  // namespace

Decomposition signal_noise_decompose(const ProblemInstance& p, const TubalTensor& u) {
    TubalTensor vx = tsvd(p.X, true).U;
    return decompose_impl(vx, u, p.r);
}

Decomposition signal_noise_decompose(const MetricsContext& ctx, const TubalTensor& u) {
    return decompose_impl(ctx.VX, u, static_cast<int>(ctx.VX.n2()));
}

IterateMetrics compute_metrics(const ProblemInstance& p, const MetricsContext& ctx,
                               const GDState& s, const MetricsExtras& extras) {
    IterateMetrics m;
    m.t = s.t;
    m.loss = s.residual.squaredNorm();

    TubalTensor uut = gram(s.U);
    m.test_err = fro_norm(uut - ctx.XXt) / ctx.norm_XXt;

    TSvd fu = tsvd(s.U, true);
    const int p_min = std::min(p.n, p.R);

    // sigma_r tube error against the ground truth factor
    double tube_diff = 0.0, tube_ref = 0.0;
    for (int j = 0; j < p.k; ++j) {
        const double d = fu.S(p.r - 1, p.r - 1, j) - ctx.sigma_r_X[static_cast<size_t>(j)];
        tube_diff += d * d;
        tube_ref += ctx.sigma_r_X[static_cast<size_t>(j)] * ctx.sigma_r_X[static_cast<size_t>(j)];
    }
    m.sig_tube_err = std::sqrt(tube_diff) / std::sqrt(tube_ref);

    TubalTensor lt = take_columns(fu.U, p.r);
    m.angle_L_Lt = principal_angle(ctx.L, lt);
    m.angle_X_Lt = principal_angle(ctx.VX, lt);

    SliceSpectrum sp = slice_spectrum(s.U);
    m.u_spec_norm = sp.values.maxCoeff();
    m.sigma_r_slices.resize(static_cast<size_t>(p.k));
    for (int j = 0; j < p.k; ++j) m.sigma_r_slices[static_cast<size_t>(j)] = sp.values(j, p.r - 1);
    if (p.r < p_min) {
        m.sigma_r1_slices.resize(static_cast<size_t>(p.k));
        for (int j = 0; j < p.k; ++j) {
            m.sigma_r1_slices[static_cast<size_t>(j)] = sp.values(j, p.r);
        }
    }
    if (extras.record_slice_spectra) m.full_spectrum = sp.values;

    // Signal/noise split; emitted as missing when the signal factor is
    // rank-deficient at this state.
    try {
        TubalTensor b = tprod(ttranspose(ctx.VX), s.U);
        SliceSpectrum bsp = slice_spectrum(b);
        const double floor = 1e-12 * sp.values.maxCoeff();
        for (int j = 0; j < p.k; ++j) {
            if (bsp.values(j, p.r - 1) <= floor) {
                throw RankDeficientSignal("rank-deficient", j, bsp.values(j, p.r - 1));
            }
        }
        TubalTensor w = tsvd(b, true).V;  // R x r x k
        TubalTensor uw = tprod(s.U, w);   // n x r x k
        // noise = U - U*W*W^T; its column space is measured against V_X.
        TubalTensor noise = s.U - tprod(uw, ttranspose(w));
        m.noise_spec_norm = spectral_norm(noise);
        m.decomp_resid = spectral_norm(tprod(ttranspose(ctx.VX), noise));
        m.angle_X_UW = principal_angle(ctx.VX, tsvd(uw, true).U);
    } catch (const RankDeficientSignal&) {
        // leave the optional fields empty
    }

    if (extras.power_iterate != nullptr) {
        const double denom = spectral_norm(*extras.power_iterate);
        m.power_gap = denom > 0.0 ? spectral_norm(s.U - *extras.power_iterate) / denom : 0.0;
    }
    return m;
}

std::vector<IterateMetrics> run_gd(const ProblemInstance& p, long iters,
                                   const MetricsConfig& cfg, GDState* final_state) {
    if (iters < 0) throw InvalidDims("run_gd: negative iteration count");
    if (cfg.stride < 1) throw InvalidDims("run_gd: stride must be >= 1");
    MetricsContext ctx = make_metrics_context(p);
    GDState s = init_state(p);
    TubalTensor u_tilde = s.U;

    std::vector<IterateMetrics> trace;
    trace.reserve(static_cast<size_t>(iters / cfg.stride + 2));
    MetricsExtras extras;
    extras.record_slice_spectra = cfg.record_slice_spectra;
    if (cfg.track_power) extras.power_iterate = &u_tilde;
    trace.push_back(compute_metrics(p, ctx, s, extras));
    for (long t = 1; t <= iters; ++t) {
        s = gd_step(p, s);
        if (cfg.track_power) u_tilde = power_step(p, ctx.M, u_tilde);
        if (t % cfg.stride == 0 || t == iters) {
            trace.push_back(compute_metrics(p, ctx, s, extras));
        }
    }
    if (final_state != nullptr) *final_state = std::move(s);
    return trace;
}

Lemma82Report lemma82_diagnostic(const ProblemInstance& p, const MetricsContext& ctx,
                                 const GDState& s, const TubalTensor& u0) {
    Lemma82Report rep;
    rep.t = s.t;

    TubalTensor u_tilde = power_iterates(p, u0, s.t);
    rep.E_norm = spectral_norm(s.U - u_tilde);
    rep.Utilde_norm = spectral_norm(u_tilde);
    rep.past_t_star = rep.E_norm > rep.Utilde_norm;

    TubalTensor u_unit = (1.0 / p.alpha) * u0;
    rep.U_unit_norm = spectral_norm(u_unit);
    rep.sigma_min_VL_U = sigma_min_tensor(tprod(ttranspose(ctx.L), u_unit));

    // Per-slice spectra of Z_t = (I + mu M)^{*t} via Hermitian eigenvalues.
    FourierBlocks fm = dft_tubes(ctx.M);
    SliceSpectrum sp_u = slice_spectrum(s.U);
    const int p_min = std::min(p.n, p.R);
    for (int j = 0; j < p.k; ++j) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(fm.slices[j]);
        if (eig.info() != Eigen::Success) {
            throw NumericalFailure("lemma82_diagnostic: slice eigendecomposition failed");
        }
        Eigen::VectorXd z = eig.eigenvalues();  // ascending
        std::vector<double> zt(static_cast<size_t>(p.n));
        for (int i = 0; i < p.n; ++i) {
            zt[static_cast<size_t>(i)] =
                std::abs(std::pow(1.0 + p.mu * z(p.n - 1 - i), static_cast<double>(s.t)));
        }
        std::sort(zt.begin(), zt.end(), std::greater<double>());

        Lemma82SliceReport sr;
        sr.slice = j;
        sr.sigma_r_Zt = zt[static_cast<size_t>(p.r - 1)];
        sr.sigma_r1_Zt = p.r < p.n ? zt[static_cast<size_t>(p.r)] : 0.0;
        sr.sigma_r_Ut = sp_u.values(j, p.r - 1);
        sr.sigma_r1_Ut = p.r < p_min ? sp_u.values(j, p.r) : 0.0;
        sr.lower_bound = p.alpha * sr.sigma_r_Zt * rep.sigma_min_VL_U - rep.E_norm;
        sr.upper_bound = p.alpha * sr.sigma_r1_Zt * rep.U_unit_norm + rep.E_norm;
        sr.hypothesis_ok =
            sr.sigma_r1_Zt * rep.U_unit_norm + rep.E_norm / p.alpha <
            sr.sigma_r_Zt * rep.sigma_min_VL_U;
        sr.ineq1_ok = sr.sigma_r_Ut >= sr.lower_bound - 1e-12;
        sr.ineq2_ok = sr.sigma_r1_Ut <= sr.upper_bound + 1e-12;
        rep.slices.push_back(sr);
    }

    double bound = 0.0;
    bool bound_valid = true;
    for (const auto& sr : rep.slices) {
        // Wedin gap with U_0 = alpha * U: both leading terms carry alpha.
        const double denom = p.alpha * sr.sigma_r_Zt * rep.sigma_min_VL_U -
                             p.alpha * sr.sigma_r1_Zt * rep.U_unit_norm - rep.E_norm;
        if (denom <= 0.0) {
            bound_valid = false;
            continue;
        }
        bound = std::max(bound, (p.alpha * sr.sigma_r1_Zt * rep.U_unit_norm + rep.E_norm) / denom);
    }
    rep.angle_bound = bound_valid ? bound : std::numeric_limits<double>::infinity();
    TubalTensor lt = take_columns(tsvd(s.U, true).U, p.r);
    rep.angle_measured = principal_angle(ctx.L, lt);
    rep.angle_ok = rep.angle_measured <= rep.angle_bound + 1e-12;
    return rep;
}

}  // namespace tubal::solver
