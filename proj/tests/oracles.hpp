#pragma once

// Test-only oracles, independent of the implementation paths they check:
// adaptive quadrature, finite differences, the cot-sum representation of
// zeta1, and a direct O(N^2) convolution.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "ncilw/geometry.hpp"
#include "ncilw/grid.hpp"

namespace oracles {

using ncilw::cplx;

// Adaptive Simpson on [a, b] for complex integrands.
template <typename F>
cplx adaptive_simpson(const F& f, double a, double b, double tol = 1e-11, int depth = 28) {
    struct Impl {
        const F& f;
        double tol0;
        cplx recurse(double a, double b, cplx fa, cplx fm, cplx fb, cplx whole, double tol,
                     int depth) const {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const cplx flm = f(lm), frm = f(rm);
            const cplx left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const cplx right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const cplx delta = left + right - whole;
            if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
                return left + right + delta / 15.0;
            return recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
                   recurse(m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
        }
    };
    Impl impl{f, tol};
    const double m = 0.5 * (a + b);
    const cplx fa = f(a), fm = f(m), fb = f(b);
    const cplx whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return impl.recurse(a, b, fa, fm, fb, whole, tol, depth);
}

// Central difference d/dz of a complex function along the real direction.
template <typename F>
cplx central_diff(const F& f, cplx z, double h = 1e-5) {
    return (f(z + h) - f(z - h)) / (2.0 * h);
}

// The cot-sum representation of zeta1 with symmetric truncation.
inline cplx zeta1_cot_sum(cplx z, const ncilw::LatticeElliptic& lat, int m_trunc = 64) {
    cplx sum = 0.0;
    const double L = lat.L();
    for (int n = -m_trunc; n <= m_trunc; ++n) {
        const cplx arg = ncilw::pi / L * (z - cplx(0.0, 2.0 * n * lat.delta()));
        sum += std::cos(arg) / std::sin(arg);
    }
    return ncilw::pi / L * sum;
}

// Direct truncated convolution of Eq.-style semantics: the sum over
// -N <= m, n-m <= N-1 of hat_{n-m} hat_m.
inline std::vector<cplx> direct_convolution(const std::vector<cplx>& hat,
                                            const ncilw::GridSpec& g) {
    const int n_half = g.half_n;
    std::vector<cplx> out(hat.size(), cplx(0.0));
    for (int n = -n_half; n < n_half; ++n) {
        cplx s = 0.0;
        for (int m = -n_half; m < n_half; ++m) {
            const int d = n - m;
            if (d < -n_half || d >= n_half) continue;
            s += hat[d + n_half] * hat[m + n_half];
        }
        out[n + n_half] = s;
    }
    return out;
}

// Complex sample with |Im z| < delta, bounded away from the kernel pole at 0.
inline cplx sample_off_poles(std::mt19937_64& rng, double delta, double margin_frac = 0.15) {
    std::uniform_real_distribution<double> re(-3.0, 3.0);
    std::uniform_real_distribution<double> im(-0.9, 0.9);
    for (;;) {
        const cplx z(re(rng) * delta, im(rng) * delta);
        if (std::abs(z) > margin_frac * delta) return z;
    }
}

} // namespace oracles
