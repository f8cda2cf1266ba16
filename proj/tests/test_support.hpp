#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "tubal/tensor.hpp"

namespace tubal::test {

inline double rel_err(const TubalTensor& got, const TubalTensor& want) {
    const double denom = fro_norm(want);
    return fro_norm(got - want) / (denom > 0.0 ? denom : 1.0);
}

/// Direct O(k^2) DFT sum per tube, the definitional oracle for dft_tubes.
inline FourierBlocks naive_dft(const TubalTensor& t) {
    const int n1 = t.n1(), n2 = t.n2(), k = t.k();
    FourierBlocks f(n1, n2, k);
    const double two_pi = 2.0 * M_PI;
    for (int j = 0; j < k; ++j) {
        for (int ip = 0; ip < n2; ++ip) {
            for (int i = 0; i < n1; ++i) {
                std::complex<double> s(0.0, 0.0);
                for (int jp = 0; jp < k; ++jp) {
                    const double ang = -two_pi * static_cast<double>(j) * jp / k;
                    s += t(i, ip, jp) * std::complex<double>(std::cos(ang), std::sin(ang));
                }
                f.slices[j](i, ip) = s;
            }
        }
    }
    return f;
}

/// Tubal-symmetrize: (A + A^T) / 2.
inline TubalTensor symmetrize(const TubalTensor& a) {
    TubalTensor s = ttranspose(a);
    s += a;
    s *= 0.5;
    return s;
}

}  // namespace tubal::test
