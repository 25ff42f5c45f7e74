#pragma once

#include <cmath>
#include <complex>
#include <cstdlib>
#include <string>

#include "ncilw/errors.hpp"
#include "ncilw/geometry.hpp"

namespace ncilw {

namespace detail {

inline cplx coth(cplx w) { return 1.0 / std::tanh(w); }

/// Shift z by an integer multiple of 2 i delta into Im in [-delta, delta].
inline cplx reduce_mod_2idelta(cplx z, double delta) {
    const double two_delta = 2.0 * delta;
    const double n = std::nearbyint(z.imag() / two_delta);
    return {z.real(), z.imag() - n * two_delta};
}

struct LatticeReduced {
    cplx z0;     // representative in the fundamental cell around 0
    double m;    // z = z0 + m L + n 2 i delta
    double n;
};

inline LatticeReduced reduce_lattice(cplx z, const LatticeElliptic& lat) {
    const double m = std::nearbyint(z.real() / lat.L());
    const double n = std::nearbyint(z.imag() / (2.0 * lat.delta()));
    return {cplx(z.real() - m * lat.L(), z.imag() - n * 2.0 * lat.delta()), m, n};
}

[[noreturn]] inline void throw_pole(const char* fn, cplx z) {
    throw pole_proximity_error(std::string(fn) + ": argument " + std::to_string(z.real()) +
                               (z.imag() < 0 ? "-" : "+") + std::to_string(std::abs(z.imag())) +
                               "i is within the pole-proximity threshold");
}

inline void check_off_pole(cplx reduced, double scale, double eps, const char* fn, cplx orig) {
    if (std::abs(reduced) < eps * scale) throw_pole(fn, orig);
}

} // namespace detail

inline constexpr double default_pole_eps = 1e-12;

// ---------------------------------------------------------------------------
// Hyperbolic kernels on the strip of half-width delta
// ---------------------------------------------------------------------------

/// alpha(z) = (pi/2 delta) coth(pi z / 2 delta); odd, 2 i delta periodic.
inline cplx alpha_hyp(cplx z, const GeometryHyperbolic& g, double eps = default_pole_eps) {
    const cplx zr = detail::reduce_mod_2idelta(z, g.delta);
    detail::check_off_pole(zr, 2.0 * g.delta, eps, "alpha_hyp", z);
    const double c = pi / (2.0 * g.delta);
    return c * detail::coth(c * zr);
}

/// V(z) = (pi/2 delta)^2 sinh^{-2}(pi z / 2 delta), the same-family CMS potential.
inline cplx V_hyp(cplx z, const GeometryHyperbolic& g, double eps = default_pole_eps) {
    const cplx zr = detail::reduce_mod_2idelta(z, g.delta);
    detail::check_off_pole(zr, 2.0 * g.delta, eps, "V_hyp", z);
    const double c = pi / (2.0 * g.delta);
    const cplx s = std::sinh(c * zr);
    return c * c / (s * s);
}

/// Vtilde(z) = V(z - i delta) = -(pi/2 delta)^2 cosh^{-2}(pi z / 2 delta).
inline cplx Vtilde_hyp(cplx z, const GeometryHyperbolic& g, double eps = default_pole_eps) {
    const cplx zr = detail::reduce_mod_2idelta(z, g.delta);
    detail::check_off_pole(zr - cplx(0.0, g.delta), 2.0 * g.delta, eps, "Vtilde_hyp", z);
    const double c = pi / (2.0 * g.delta);
    const cplx ch = std::cosh(c * zr);
    return -c * c / (ch * ch);
}

/// V'(z) = -2 (pi/2 delta)^3 cosh(pi z/2 delta) sinh^{-3}(pi z/2 delta).
inline cplx V_hyp_prime(cplx z, const GeometryHyperbolic& g, double eps = default_pole_eps) {
    const cplx zr = detail::reduce_mod_2idelta(z, g.delta);
    detail::check_off_pole(zr, 2.0 * g.delta, eps, "V_hyp_prime", z);
    const double c = pi / (2.0 * g.delta);
    const cplx s = std::sinh(c * zr);
    return -2.0 * c * c * c * std::cosh(c * zr) / (s * s * s);
}

/// alpha'(z) = -V(z).
inline cplx alpha_hyp_prime(cplx z, const GeometryHyperbolic& g, double eps = default_pole_eps) {
    return -V_hyp(z, g, eps);
}

// ---------------------------------------------------------------------------
// Weierstrass functions on the lattice (L, 2 i delta)
//
// All evaluations reduce the argument to the fundamental cell and sum the
// q-series with nome q = exp(-2 pi delta / L); terms are dropped once they
// fall below 1e-16 relative to the running sum. The quasi-periodic parts of
// zeta are restored exactly from eta1, eta2.
// ---------------------------------------------------------------------------

namespace detail {

constexpr long max_series_terms = 500'000;

// Sums sum_{n>=1} q^{2n}/(1-q^{2n}) * w_n * trig(n theta) where theta = 2 pi z0 / L.
// weight: 0 -> sin, 1 -> n cos, 2 -> n^2 sin.
inline cplx lattice_series(cplx z0, const LatticeElliptic& lat, int weight) {
    const double q = lat.nome();
    if (q == 0.0) return {0.0, 0.0};
    const cplx itheta = cplx(0.0, 2.0 * pi / lat.L()) * z0;
    const cplx ep = std::exp(itheta);   // e^{i theta}
    const cplx em = std::exp(-itheta);  // e^{-i theta}
    const double q2 = q * q;
    cplx p = 1.0, pm = 1.0;
    double qpow = 1.0; // q^{2n}
    cplx sum = 0.0;
    int small_streak = 0;
    for (long n = 1; n <= max_series_terms; ++n) {
        p *= ep;
        pm *= em;
        qpow *= q2;
        const double cn = qpow / (1.0 - qpow);
        cplx term;
        switch (weight) {
            case 0: term = cn * (p - pm) * cplx(0.0, -0.5); break;
            case 1: term = cn * static_cast<double>(n) * (p + pm) * 0.5; break;
            default: term = cn * static_cast<double>(n) * static_cast<double>(n) * (p - pm) * cplx(0.0, -0.5); break;
        }
        sum += term;
        if (std::abs(term) < 1e-16 * (1.0 + std::abs(sum))) {
            if (++small_streak >= 2) return sum;
        } else {
            small_streak = 0;
        }
    }
    throw std::runtime_error("lattice_series: q-series did not converge");
}

} // namespace detail

/// Weierstrass zeta for the lattice (L, 2 i delta).
inline cplx zeta_w(cplx z, const LatticeElliptic& lat, double eps = default_pole_eps) {
    const auto r = detail::reduce_lattice(z, lat);
    const double scale = std::min(lat.L(), 2.0 * lat.delta());
    detail::check_off_pole(r.z0, scale, eps, "zeta_w", z);
    const double L = lat.L();
    const cplx zeta0 = lat.eta1_over_omega1() * r.z0 +
                       (pi / L) / std::tan(pi * r.z0 / L) +
                       (4.0 * pi / L) * detail::lattice_series(r.z0, lat, 0);
    return zeta0 + 2.0 * r.m * lat.eta1() + 2.0 * r.n * lat.eta2();
}

/// Weierstrass P (even elliptic function; the elliptic CMS potential).
inline cplx wp(cplx z, const LatticeElliptic& lat, double eps = default_pole_eps) {
    const auto r = detail::reduce_lattice(z, lat);
    const double scale = std::min(lat.L(), 2.0 * lat.delta());
    detail::check_off_pole(r.z0, scale, eps, "wp", z);
    const double L = lat.L();
    const cplx s = std::sin(pi * r.z0 / L);
    return -lat.eta1_over_omega1() + (pi / L) * (pi / L) / (s * s) -
           (8.0 * pi * pi / (L * L)) * detail::lattice_series(r.z0, lat, 1);
}

/// P'(z).
inline cplx wp_prime(cplx z, const LatticeElliptic& lat, double eps = default_pole_eps) {
    const auto r = detail::reduce_lattice(z, lat);
    const double scale = std::min(lat.L(), 2.0 * lat.delta());
    detail::check_off_pole(r.z0, scale, eps, "wp_prime", z);
    const double L = lat.L();
    const double a = pi / L;
    const cplx s = std::sin(a * r.z0);
    return -2.0 * a * a * a * std::cos(a * r.z0) / (s * s * s) +
           (16.0 * pi * pi * pi / (L * L * L)) * detail::lattice_series(r.z0, lat, 2);
}

/// zeta1(z) = zeta(z) - (eta1/omega1) z; L-periodic.
inline cplx zeta1(cplx z, const LatticeElliptic& lat, double eps = default_pole_eps) {
    return zeta_w(z, lat, eps) - lat.eta1_over_omega1() * z;
}

/// zeta2(z) = zeta(z) - (eta2/omega2) z; 2 i delta periodic, picks up pi/delta per L-step.
inline cplx zeta2(cplx z, const LatticeElliptic& lat, double eps = default_pole_eps) {
    return zeta_w(z, lat, eps) - lat.eta2_over_omega2() * z;
}

/// zeta2'(z) = -P(z) - eta2/omega2.
inline cplx zeta2_prime(cplx z, const LatticeElliptic& lat, double eps = default_pole_eps) {
    return -wp(z, lat, eps) - lat.eta2_over_omega2();
}

/// f2(z) = d/dz [zeta2(z)^2 - P(z)]; identically 0 in the hyperbolic limit.
inline cplx f2(cplx z, const LatticeElliptic& lat, double eps = default_pole_eps) {
    return 2.0 * zeta2(z, lat, eps) * zeta2_prime(z, lat, eps) - wp_prime(z, lat, eps);
}

// ---------------------------------------------------------------------------
// Dispersion relations Omega(k)
// ---------------------------------------------------------------------------

enum class DispersionKind { kdv, bo, ilw, ncilw_coupling };

/// Linear dispersion Omega(k) of the named equation; the k = 0 values of the
/// ILW and coupling multipliers are the analytic limits (both 0).
inline double dispersion(DispersionKind kind, double k, double delta) {
    switch (kind) {
        case DispersionKind::kdv: return k * k * k * delta / 3.0;
        case DispersionKind::bo: return k * std::abs(k);
        case DispersionKind::ilw: return k == 0.0 ? 0.0 : k * k / std::tanh(k * delta);
        case DispersionKind::ncilw_coupling: return k == 0.0 ? 0.0 : k * k / std::sinh(k * delta);
    }
    std::abort();
}

// ---------------------------------------------------------------------------
// Kernel dispatch: the pole ansatz and the CMS flow use alpha = alpha_hyp or
// zeta2 and V = V_hyp or wp depending on the geometry.
// ---------------------------------------------------------------------------

inline cplx kernel_alpha(cplx z, const Geometry& g, double eps = default_pole_eps) {
    return std::visit([&](const auto& gg) -> cplx {
        if constexpr (std::is_same_v<std::decay_t<decltype(gg)>, GeometryHyperbolic>)
            return alpha_hyp(z, gg, eps);
        else
            return zeta2(z, gg, eps);
    }, g);
}

inline cplx kernel_alpha_prime(cplx z, const Geometry& g, double eps = default_pole_eps) {
    return std::visit([&](const auto& gg) -> cplx {
        if constexpr (std::is_same_v<std::decay_t<decltype(gg)>, GeometryHyperbolic>)
            return -V_hyp(z, gg, eps);
        else
            return zeta2_prime(z, gg, eps);
    }, g);
}

inline cplx kernel_v_prime(cplx z, const Geometry& g, double eps = default_pole_eps) {
    return std::visit([&](const auto& gg) -> cplx {
        if constexpr (std::is_same_v<std::decay_t<decltype(gg)>, GeometryHyperbolic>)
            return V_hyp_prime(z, gg, eps);
        else
            return wp_prime(z, gg, eps);
    }, g);
}

} // namespace ncilw
