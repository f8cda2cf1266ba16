#include "tubal/tsvd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tubal {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using std::complex;

// Make the largest-magnitude entry of each column of U real-positive and
// apply the same unit phase to the matching column of V, preserving U S V^H.
void fix_phases(MatrixXcd& u, MatrixXcd& v) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index idx = 0;
        u.col(c).cwiseAbs().maxCoeff(&idx);
        const complex<double> entry = u(idx, c);
        const double mag = std::abs(entry);
        if (mag == 0.0) continue;
        const complex<double> ph = std::conj(entry) / mag;
        u.col(c) *= ph;
        if (c < v.cols()) v.col(c) *= ph;
    }
}

void fix_signs(MatrixXd& u, MatrixXd& v) {
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
        Eigen::Index idx = 0;
        u.col(c).cwiseAbs().maxCoeff(&idx);
        if (u(idx, c) < 0.0) {
            u.col(c) = -u.col(c);
            if (c < v.cols()) v.col(c) = -v.col(c);
        }
    }
}

struct SliceFactors {
    MatrixXcd u;
    Eigen::VectorXd s;
    MatrixXcd v;
};

// True for the slices whose Fourier coefficients of a real tensor are real:
// the DC slice and, for even k, the Nyquist slice.
bool real_slice(int j, int k) { return j == 0 || (k % 2 == 0 && j == k / 2); }

SliceFactors slice_svd(const MatrixXcd& m, bool force_real, bool full) {
    SliceFactors out;
    const unsigned opts = full ? (Eigen::ComputeFullU | Eigen::ComputeFullV)
                               : (Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (force_real) {
        MatrixXd mr = m.real();
        Eigen::JacobiSVD<MatrixXd> svd(mr, opts);
        if (svd.info() != Eigen::Success) throw NumericalFailure("slice SVD did not converge");
        MatrixXd u = svd.matrixU(), v = svd.matrixV();
        fix_signs(u, v);
        out.u = u.cast<complex<double>>();
        out.v = v.cast<complex<double>>();
        out.s = svd.singularValues();
    } else {
        Eigen::JacobiSVD<MatrixXcd> svd(m, opts);
        if (svd.info() != Eigen::Success) throw NumericalFailure("slice SVD did not converge");
        MatrixXcd u = svd.matrixU(), v = svd.matrixV();
        fix_phases(u, v);
        out.u = std::move(u);
        out.v = std::move(v);
        out.s = svd.singularValues();
    }
    return out;
}

}  // namespace

TSvd tsvd(const TubalTensor& t, bool reduced) {
    const int n1 = t.n1(), n2 = t.n2(), k = t.k();
    const int p = std::min(n1, n2);
    const int pu = reduced ? p : n1;
    const int pv = reduced ? p : n2;
    const int sr = reduced ? p : n1;
    const int sc = reduced ? p : n2;

    FourierBlocks fu(n1, pu, k), fs(sr, sc, k), fv(n2, pv, k);
    FourierBlocks ft = dft_tubes(t);
    const int half = k / 2;
    for (int j = 0; j <= half; ++j) {
        SliceFactors f = slice_svd(ft.slices[j], real_slice(j, k), !reduced);
        MatrixXcd u = f.u.leftCols(pu);
        MatrixXcd v = f.v.leftCols(pv);
        MatrixXcd s = MatrixXcd::Zero(sr, sc);
        for (int i = 0; i < std::min<int>(p, f.s.size()); ++i) s(i, i) = f.s(i);
        fu.slices[j] = u;
        fs.slices[j] = s;
        fv.slices[j] = v;
        const int mirror = (k - j) % k;
        if (mirror != j) {
            fu.slices[mirror] = u.conjugate();
            fs.slices[mirror] = s;  // singular values are real
            fv.slices[mirror] = v.conjugate();
        }
    }
    TSvd out;
    out.U = idft_tubes(fu);
    out.S = idft_tubes(fs);
    out.V = idft_tubes(fv);
    out.reduced = reduced;
    return out;
}

SliceSpectrum slice_spectrum(const TubalTensor& t) {
    const int k = t.k();
    const int p = std::min(t.n1(), t.n2());
    SliceSpectrum out;
    out.values.resize(k, p);
    FourierBlocks f = dft_tubes(t);
    for (int j = 0; j < k; ++j) {
        Eigen::JacobiSVD<MatrixXcd> svd(f.slices[j]);
        out.values.row(j) = svd.singularValues().transpose();
    }
    return out;
}

int tubal_rank(const TubalTensor& t, double tol) {
    if (tol < 0.0) tol = 1e-9 * spectral_norm(t);
    const int p = std::min(t.n1(), t.n2());
    if (p == 0) return 0;
    TSvd f = tsvd(t, true);
    int rank = 0;
    for (int i = 0; i < p; ++i) {
        double tube_sq = 0.0;
        for (int j = 0; j < t.k(); ++j) tube_sq += f.S(i, i, j) * f.S(i, i, j);
        if (std::sqrt(tube_sq) > tol) ++rank;
    }
    return rank;
}

std::vector<double> singular_tube(const TubalTensor& t, int i) {
    const int p = std::min(t.n1(), t.n2());
    if (i < 0 || i >= p) {
        throw IndexOutOfRange("singular_tube: index " + std::to_string(i) +
                              " out of range [0, " + std::to_string(p) + ")");
    }
    TSvd f = tsvd(t, true);
    std::vector<double> tube(t.k());
    for (int j = 0; j < t.k(); ++j) tube[j] = f.S(i, i, j);
    return tube;
}

double condition_number(const TubalTensor& t) {
    SliceSpectrum sp = slice_spectrum(t);
    const double top = sp.values.maxCoeff();
    const double bottom = sp.values.col(sp.count() - 1).minCoeff();
    if (bottom < 1e-300) {
        throw SingularInput("condition_number: smallest slice singular value below 1e-300");
    }
    return top / bottom;
}

namespace detail {

double orthonormality_residual(const TubalTensor& w) {
    if (w.n2() == 0) return 0.0;
    TubalTensor g = tprod(ttranspose(w), w);
    return spectral_norm(g - tidentity(w.n2(), w.k()));
}

}  // namespace detail

TubalTensor orth_complement(const TubalTensor& w) {
    const int n = w.n1(), p = w.n2(), k = w.k();
    if (p > n) throw ShapeMismatch("orth_complement: more columns than rows");
    const double resid = detail::orthonormality_residual(w);
    if (resid > 1e-8) {
        throw NotOrthonormal("orth_complement: W^T*W - I has spectral norm " +
                             std::to_string(resid));
    }
    const int q = n - p;
    TubalTensor out(n, q, k);
    if (q == 0) return out;

    FourierBlocks fw = dft_tubes(w);
    FourierBlocks fc(n, q, k);
    const int half = k / 2;
    for (int j = 0; j <= half; ++j) {
        // Full unitary factor of the slice; its trailing columns span the
        // orthogonal complement of range(W_j).
        SliceFactors f = slice_svd(fw.slices[j], real_slice(j, k), true);
        MatrixXcd comp = f.u.rightCols(q);
        // Phase-fix complement columns for determinism.
        for (Eigen::Index c = 0; c < comp.cols(); ++c) {
            Eigen::Index idx = 0;
            comp.col(c).cwiseAbs().maxCoeff(&idx);
            const complex<double> entry = comp(idx, c);
            const double mag = std::abs(entry);
            if (mag > 0.0) comp.col(c) *= std::conj(entry) / mag;
        }
        fc.slices[j] = comp;
        const int mirror = (k - j) % k;
        if (mirror != j) fc.slices[mirror] = comp.conjugate();
    }
    return idft_tubes(fc);
}

double principal_angle(const TubalTensor& v1, const TubalTensor& v2) {
    if (v1.n1() != v2.n1() || v1.k() != v2.k()) {
        throw ShapeMismatch("principal_angle: ambient dimension or tube length differ");
    }
    for (const TubalTensor* v : {&v1, &v2}) {
        const double resid = detail::orthonormality_residual(*v);
        if (resid > 1e-8) {
            throw NotOrthonormal("principal_angle: input not orthonormal, residual " +
                                 std::to_string(resid));
        }
    }
    if (v1.n2() == 0 || v2.n2() == 0) return 0.0;
    FourierBlocks f1 = dft_tubes(v1);
    FourierBlocks f2 = dft_tubes(v2);
    double best = 0.0;
    for (int j = 0; j < v1.k(); ++j) {
        const MatrixXcd& q = f1.slices[j];
        // ||V1perp^H V2|| == ||(I - V1 V1^H) V2|| since V1perp has
        // orthonormal columns spanning the complement.
        MatrixXcd proj = f2.slices[j] - q * (q.adjoint() * f2.slices[j]);
        Eigen::JacobiSVD<MatrixXcd> svd(proj);
        if (svd.singularValues().size() > 0) best = std::max(best, svd.singularValues()(0));
    }
    return best;
}

std::vector<std::pair<int, int>> noninvertible_tubes(const TubalTensor& t, double tol) {
    if (tol < 0.0) tol = 1e-9 * spectral_norm(t);
    SliceSpectrum sp = slice_spectrum(t);
    TSvd f = tsvd(t, true);
    std::vector<std::pair<int, int>> hits;
    for (int i = 0; i < sp.count(); ++i) {
        double tube_sq = 0.0;
        for (int j = 0; j < t.k(); ++j) tube_sq += f.S(i, i, j) * f.S(i, i, j);
        if (std::sqrt(tube_sq) <= tol) continue;
        for (int j = 0; j < t.k(); ++j) {
            if (sp.values(j, i) <= tol) hits.emplace_back(i, j);
        }
    }
    return hits;
}

}  // namespace tubal
