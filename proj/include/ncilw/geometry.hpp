#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <variant>

#include "ncilw/errors.hpp"

namespace ncilw {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// Infinite strip of half-width delta; fixes the coth/sinh kernels.
struct GeometryHyperbolic {
    double delta;

    explicit GeometryHyperbolic(double delta_) : delta(delta_) {
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw config_error("GeometryHyperbolic: delta must be positive and finite");
    }
};

namespace detail {

// Eisenstein-type sum S(q) = sum_{n>=1} n q^{2n} / (1 - q^{2n}) for 0 <= q < 1.
// Feeds eta_j = pi^2/(12 omega_j) * (1 - 24 S).
inline double eisenstein2_sum(double q) {
    if (q <= 0.0) return 0.0;
    const double q2 = q * q;
    double qpow = q2; // q^{2n}
    double sum = 0.0;
    for (long n = 1; n <= 4'000'000; ++n) {
        const double term = static_cast<double>(n) * qpow / (1.0 - qpow);
        sum += term;
        if (term < 1e-18 * (1.0 + std::abs(sum))) return sum;
        qpow *= q2;
    }
    throw std::runtime_error("eisenstein2_sum: series did not converge");
}

} // namespace detail

/// Rectangular period lattice (L, 2 i delta) for the Weierstrass functions.
///
/// The half-periods are omega1 = L/2 (real) and omega2 = i delta. The
/// lattice-sum constants eta_j = zeta(omega_j) are computed once from two
/// independent q-series: eta1 with the nome q = exp(-2 pi delta / L) and
/// eta2 from the swapped basis (2 omega2, -2 omega1) with nome
/// exp(-pi L / (2 delta)). The Legendre relation
/// eta1 omega2 - eta2 omega1 = i pi / 2 is then a nontrivial cross-check of
/// both series rather than a definition.
class LatticeElliptic {
public:
    LatticeElliptic(double L, double delta) : L_(L), delta_(delta) {
        if (!(L > 0.0) || !std::isfinite(L))
            throw config_error("LatticeElliptic: L must be positive and finite");
        if (!(delta > 0.0) || !std::isfinite(delta))
            throw config_error("LatticeElliptic: delta must be positive and finite");
        q_ = std::exp(-2.0 * pi * delta_ / L_);
        const double q_swapped = std::exp(-pi * L_ / (2.0 * delta_));
        const double e2 = 1.0 - 24.0 * detail::eisenstein2_sum(q_);
        const double e2_swapped = 1.0 - 24.0 * detail::eisenstein2_sum(q_swapped);
        eta1_ = cplx(pi * pi / (12.0 * omega1().real()) * e2, 0.0);
        eta2_ = pi * pi / (12.0 * omega2()) * e2_swapped;
    }

    double L() const { return L_; }
    double delta() const { return delta_; }
    double nome() const { return q_; }

    cplx omega1() const { return {L_ / 2.0, 0.0}; }
    cplx omega2() const { return {0.0, delta_}; }
    cplx eta1() const { return eta1_; }
    cplx eta2() const { return eta2_; }

    /// eta2 / omega2, the linear coefficient of zeta2(z) = zeta(z) - (eta2/omega2) z.
    cplx eta2_over_omega2() const { return eta2_ / omega2(); }
    cplx eta1_over_omega1() const { return eta1_ / omega1(); }

private:
    double L_;
    double delta_;
    double q_;
    cplx eta1_;
    cplx eta2_;
};

/// Either kernel geometry; selects alpha = alpha_hyp vs zeta2 and V = V_hyp vs wp.
using Geometry = std::variant<GeometryHyperbolic, LatticeElliptic>;

inline double geometry_delta(const Geometry& g) {
    return std::visit([](const auto& gg) {
        if constexpr (std::is_same_v<std::decay_t<decltype(gg)>, GeometryHyperbolic>)
            return gg.delta;
        else
            return gg.delta();
    }, g);
}

inline bool is_elliptic(const Geometry& g) {
    return std::holds_alternative<LatticeElliptic>(g);
}

} // namespace ncilw
