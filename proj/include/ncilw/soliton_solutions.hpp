#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ncilw/cms_dynamics.hpp"
#include "ncilw/errors.hpp"
#include "ncilw/geometry.hpp"
#include "ncilw/grid.hpp"
#include "ncilw/poles.hpp"
#include "ncilw/special_functions.hpp"
#include "ncilw/spectral_solver.hpp"

namespace ncilw {

/// Raw complex-valued pole-sum evaluation at arbitrary points:
///   u(x) = i sum_j alpha(x - z_j - i delta/2) - i sum_j alpha(x - w_j + i delta/2)
///   v(x) = -i sum_j alpha(x - z_j + i delta/2) + i sum_j alpha(x - w_j - i delta/2)
/// with alpha = alpha_hyp or zeta2 per geometry. Real to machine precision
/// when w = conj(z).
struct ComplexFields {
    std::vector<cplx> u, v;
};

inline ComplexFields eval_complex(const PoleConfiguration& poles, const Geometry& g,
                                  const std::vector<double>& xs) {
    const double delta = geometry_delta(g);
    const cplx half(0.0, delta / 2.0);
    ComplexFields out;
    out.u.assign(xs.size(), cplx(0.0));
    out.v.assign(xs.size(), cplx(0.0));
    const cplx iu(0.0, 1.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cplx su = 0.0, sv = 0.0;
        for (const cplx& zj : poles.z) {
            su += kernel_alpha(xs[i] - zj - half, g);
            sv -= kernel_alpha(xs[i] - zj + half, g);
        }
        for (const cplx& wj : poles.w) {
            su -= kernel_alpha(xs[i] - wj + half, g);
            sv += kernel_alpha(xs[i] - wj - half, g);
        }
        out.u[i] = iu * su;
        out.v[i] = iu * sv;
    }
    return out;
}

/// Time derivative of the pole sum through the pole velocities (chain rule,
/// analytic alpha').
inline ComplexFields eval_complex_rate(const PoleConfiguration& poles, const Geometry& g,
                                       const std::vector<double>& xs) {
    if (poles.zdot.size() != poles.n_z() || poles.wdot.size() != poles.n_w())
        throw config_error("eval_complex_rate: pole velocities missing");
    const double delta = geometry_delta(g);
    const cplx half(0.0, delta / 2.0);
    ComplexFields out;
    out.u.assign(xs.size(), cplx(0.0));
    out.v.assign(xs.size(), cplx(0.0));
    const cplx iu(0.0, 1.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        cplx su = 0.0, sv = 0.0;
        for (std::size_t j = 0; j < poles.n_z(); ++j) {
            su -= poles.zdot[j] * kernel_alpha_prime(xs[i] - poles.z[j] - half, g);
            sv += poles.zdot[j] * kernel_alpha_prime(xs[i] - poles.z[j] + half, g);
        }
        for (std::size_t j = 0; j < poles.n_w(); ++j) {
            su += poles.wdot[j] * kernel_alpha_prime(xs[i] - poles.w[j] + half, g);
            sv -= poles.wdot[j] * kernel_alpha_prime(xs[i] - poles.w[j] - half, g);
        }
        out.u[i] = iu * su;
        out.v[i] = iu * sv;
    }
    return out;
}

namespace detail {

inline std::vector<double> grid_points(const GridSpec& g) {
    std::vector<double> xs(g.size());
    for (int i = 0; i < g.size(); ++i) xs[i] = g.x(i);
    return xs;
}

inline constexpr double reality_tol = 1e-9;

inline FieldPair realize(const ComplexFields& c, const GridSpec& g, double t, const char* fn) {
    FieldPair f(g, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < c.u.size(); ++i) {
        worst = std::max({worst, std::abs(c.u[i].imag()), std::abs(c.v[i].imag())});
        f.u[i] = c.u[i].real();
        f.v[i] = c.v[i].real();
    }
    if (worst > reality_tol)
        throw std::domain_error(std::string(fn) +
                                ": pole data does not yield a real solution (|Im| = " +
                                std::to_string(worst) + ")");
    return f;
}

} // namespace detail

/// Exact multisoliton solution on the line, sampled on the grid.
inline FieldPair eval_hyperbolic(const PoleConfiguration& poles, const GeometryHyperbolic& g,
                                 const GridSpec& grid, double t) {
    check_strip(poles, g.delta, 0.0, t);
    const auto c = eval_complex(poles, Geometry(g), detail::grid_points(grid));
    return detail::realize(c, grid, t, "eval_hyperbolic");
}

/// Exact multisoliton solution of the periodic equation; requires equal
/// family sizes (the +pi/delta quasi-period jumps of zeta2 cancel pairwise,
/// making the result L-periodic).
inline FieldPair eval_elliptic(const PoleConfiguration& poles, const LatticeElliptic& lat,
                               const GridSpec& grid, double t) {
    if (poles.n_z() != poles.n_w())
        throw config_error("eval_elliptic: elliptic solutions require M = N");
    check_strip(poles, lat.delta(), 0.0, t);
    const auto c = eval_complex(poles, Geometry(lat), detail::grid_points(grid));
    return detail::realize(c, grid, t, "eval_elliptic");
}

/// Time derivative of the exact solution at the poles' current state.
inline FieldPair eval_rate(const PoleConfiguration& poles, const Geometry& g,
                           const GridSpec& grid, double t) {
    const auto c = eval_complex_rate(poles, g, detail::grid_points(grid));
    return detail::realize(c, grid, t, "eval_rate");
}

/// Initial velocity of an isolated soliton with pole parameter a.
inline cplx one_soliton_velocity(cplx a, const GeometryHyperbolic& g) {
    return -2.0 * cplx(0.0, 1.0) * alpha_hyp(a - std::conj(a) + cplx(0.0, g.delta), g);
}

/// Closed-form one-soliton: the pole moves linearly, z(t) = a + zdot(0) t,
/// and the shape translates rigidly. Requires delta/2 < Im a < 3 delta/2.
inline FieldPair one_soliton(cplx a, const GeometryHyperbolic& g, const GridSpec& grid,
                             double t) {
    if (!(a.imag() > g.delta / 2.0 && a.imag() < 1.5 * g.delta))
        throw window_violation_error("one_soliton: Im a outside (delta/2, 3 delta/2)");
    const cplx z = a + one_soliton_velocity(a, g) * t;
    const cplx half(0.0, g.delta / 2.0);
    FieldPair f(grid, t);
    for (int i = 0; i < grid.size(); ++i) {
        f.u[i] = -2.0 * alpha_hyp(grid.x(i) - z - half, g).imag();
        f.v[i] = 2.0 * alpha_hyp(grid.x(i) - z + half, g).imag();
    }
    return f;
}

// ---------------------------------------------------------------------------
// PDE residual: the master correctness oracle. Applies the mode-space
// operators of the solver to the sampled fields and the supplied analytic
// time derivative.
// ---------------------------------------------------------------------------

struct PdeResidual {
    double res_u = 0.0; // max |u_t + 2 u u_x + T u_xx + Ttilde v_xx|
    double res_v = 0.0; // max |v_t - 2 v v_x - T v_xx - Ttilde u_xx|
    double max_norm() const { return std::max(res_u, res_v); }
};

inline PdeResidual pde_residual(const FieldPair& fields, const FieldPair& rate, double delta) {
    if (!(fields.grid == rate.grid)) throw config_error("pde_residual: grid mismatch");
    const GridSpec& g = fields.grid;
    SpectralPair s = transform(fields);
    SpectralPair sx(g, fields.time), sxx(g, fields.time);
    sx.uhat = spectral_derivative(s.uhat, g);
    sx.vhat = spectral_derivative(s.vhat, g);
    sxx.uhat = spectral_derivative(sx.uhat, g);
    sxx.vhat = spectral_derivative(sx.vhat, g);
    const FieldPair d1 = inverse_transform(sx);
    const SpectralPair t2 = apply_matrix_T(sxx, delta); // (T u_xx + Tt v_xx, -(Tt u_xx + T v_xx))
    const FieldPair tf = inverse_transform(t2);
    PdeResidual r;
    for (int i = 0; i < g.size(); ++i) {
        const double ru = rate.u[i] + 2.0 * fields.u[i] * d1.u[i] + tf.u[i];
        const double rv = rate.v[i] - 2.0 * fields.v[i] * d1.v[i] + tf.v[i];
        r.res_u = std::max(r.res_u, std::abs(ru));
        r.res_v = std::max(r.res_v, std::abs(rv));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Hirota bilinear form. The tau functions are the pole products
//   F(z) = prod_j sinh(pi (z - z_j) / 2 delta),
//   G(z) = prod_j sinh(pi (z - w_j) / 2 delta),
// and the solution is recovered as u = i d/dx log(F^-/G^+),
// v = -i d/dx log(F^+/G^-) with F^+-(x) = F(x +- i delta/2).
// ---------------------------------------------------------------------------

struct TauPair {
    PoleConfiguration poles;
    GeometryHyperbolic geom;

    cplx F(cplx z) const {
        const double c = pi / (2.0 * geom.delta);
        cplx p = 1.0;
        for (const cplx& zj : poles.z) p *= std::sinh(c * (z - zj));
        return p;
    }
    cplx G(cplx z) const {
        const double c = pi / (2.0 * geom.delta);
        cplx p = 1.0;
        for (const cplx& wj : poles.w) p *= std::sinh(c * (z - wj));
        return p;
    }
};

struct HirotaResidual {
    double res_F = 0.0; // normalized max of (i D_t - D_x^2) F^- . G^+
    double res_G = 0.0; // normalized max of (i D_t - D_x^2) F^+ . G^-
};

namespace detail {

struct LogDerivs {
    cplx a;  // F'/F   = sum alpha(z - p_j)
    cplx ap; // (F'/F)' = sum alpha'(z - p_j)
    cplx b;  // F_t/F  = -sum alpha(z - p_j) pdot_j
};

inline LogDerivs tau_log_derivs(cplx z, const std::vector<cplx>& p, const std::vector<cplx>& pdot,
                                const GeometryHyperbolic& g) {
    LogDerivs d{0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < p.size(); ++j) {
        const cplx a = alpha_hyp(z - p[j], g);
        d.a += a;
        d.ap -= V_hyp(z - p[j], g);
        d.b -= a * pdot[j];
    }
    return d;
}

} // namespace detail

/// Bilinear residuals of the two Hirota equations on the grid, normalized by
/// max |F||G|. Time derivatives enter through the pole velocities.
inline HirotaResidual hirota_residual(const TauPair& tau, const GridSpec& grid) {
    const PoleConfiguration& p = tau.poles;
    if (p.zdot.size() != p.n_z() || p.wdot.size() != p.n_w())
        throw config_error("hirota_residual: pole velocities missing");
    const cplx half(0.0, tau.geom.delta / 2.0);
    HirotaResidual out;
    double max_fg1 = 0.0, max_fg2 = 0.0, max_r1 = 0.0, max_r2 = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        const cplx fm = tau.F(x - half), gp = tau.G(x + half);
        const cplx fp = tau.F(x + half), gm = tau.G(x - half);
        if (std::abs(fm) < 1e-300 || std::abs(gp) < 1e-300 || std::abs(fp) < 1e-300 ||
            std::abs(gm) < 1e-300)
            throw std::domain_error("hirota_residual: tau-function zero on the grid");
        const auto dfm = detail::tau_log_derivs(x - half, p.z, p.zdot, tau.geom);
        const auto dgp = detail::tau_log_derivs(x + half, p.w, p.wdot, tau.geom);
        const auto dfp = detail::tau_log_derivs(x + half, p.z, p.zdot, tau.geom);
        const auto dgm = detail::tau_log_derivs(x - half, p.w, p.wdot, tau.geom);
        // (i D_t - D_x^2) f.g / (f g) for log-derivative data
        auto bracket = [](const detail::LogDerivs& f, const detail::LogDerivs& gg) {
            return cplx(0.0, 1.0) * (f.b - gg.b) -
                   (f.a * f.a + f.ap - 2.0 * f.a * gg.a + gg.a * gg.a + gg.ap);
        };
        const cplx r1 = bracket(dfm, dgp) * fm * gp;
        const cplx r2 = bracket(dfp, dgm) * fp * gm;
        max_fg1 = std::max(max_fg1, std::abs(fm * gp));
        max_fg2 = std::max(max_fg2, std::abs(fp * gm));
        max_r1 = std::max(max_r1, std::abs(r1));
        max_r2 = std::max(max_r2, std::abs(r2));
    }
    out.res_F = max_r1 / max_fg1;
    out.res_G = max_r2 / max_fg2;
    return out;
}

/// Same residuals with D_t by centered differences of the tau products along
/// a trajectory; cross-checks the chain-rule route.
inline HirotaResidual hirota_residual_fd(const TauPair& before, const TauPair& at,
                                         const TauPair& after, double dt_fd,
                                         const GridSpec& grid) {
    if (!(dt_fd > 0.0)) throw config_error("hirota_residual_fd: dt_fd must be positive");
    const cplx half(0.0, at.geom.delta / 2.0);
    HirotaResidual out;
    double max_fg1 = 0.0, max_fg2 = 0.0, max_r1 = 0.0, max_r2 = 0.0;
    const std::vector<cplx> zeros_z(at.poles.n_z(), cplx(0.0));
    const std::vector<cplx> zeros_w(at.poles.n_w(), cplx(0.0));
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        const cplx fm = at.F(x - half), gp = at.G(x + half);
        const cplx fp = at.F(x + half), gm = at.G(x - half);
        const cplx fm_t = (after.F(x - half) - before.F(x - half)) / (2.0 * dt_fd);
        const cplx gp_t = (after.G(x + half) - before.G(x + half)) / (2.0 * dt_fd);
        const cplx fp_t = (after.F(x + half) - before.F(x + half)) / (2.0 * dt_fd);
        const cplx gm_t = (after.G(x - half) - before.G(x - half)) / (2.0 * dt_fd);
        const auto dfm = detail::tau_log_derivs(x - half, at.poles.z, zeros_z, at.geom);
        const auto dgp = detail::tau_log_derivs(x + half, at.poles.w, zeros_w, at.geom);
        const auto dfp = detail::tau_log_derivs(x + half, at.poles.z, zeros_z, at.geom);
        const auto dgm = detail::tau_log_derivs(x - half, at.poles.w, zeros_w, at.geom);
        auto bilinear = [&](cplx f, cplx ft, const detail::LogDerivs& df, cplx g2, cplx gt,
                            const detail::LogDerivs& dg) {
            const cplx dxx = (df.a * df.a + df.ap) * f * g2 - 2.0 * (df.a * f) * (dg.a * g2) +
                             f * (dg.a * dg.a + dg.ap) * g2;
            return cplx(0.0, 1.0) * (ft * g2 - f * gt) - dxx;
        };
        const cplx r1 = bilinear(fm, fm_t, dfm, gp, gp_t, dgp);
        const cplx r2 = bilinear(fp, fp_t, dfp, gm, gm_t, dgm);
        max_fg1 = std::max(max_fg1, std::abs(fm * gp));
        max_fg2 = std::max(max_fg2, std::abs(fp * gm));
        max_r1 = std::max(max_r1, std::abs(r1));
        max_r2 = std::max(max_r2, std::abs(r2));
    }
    out.res_F = max_r1 / max_fg1;
    out.res_G = max_r2 / max_fg2;
    return out;
}

/// Reconstructs (u, v) from the tau products alone: the x-derivatives of
/// log F, log G are formed from a fourth-order stencil of F and G themselves,
/// independent of the alpha pole sums.
inline FieldPair tau_reconstruct(const TauPair& tau, const GridSpec& grid, double t,
                                 double h = 1e-3) {
    const cplx half(0.0, tau.geom.delta / 2.0);
    auto dlog = [&](auto&& fn, cplx z) {
        // (f'(z)/f(z)) via f(z +- h), f(z +- 2h)
        const cplx d = (8.0 * (fn(z + h) - fn(z - h)) - (fn(z + 2.0 * h) - fn(z - 2.0 * h))) /
                       (12.0 * h);
        return d / fn(z);
    };
    FieldPair f(grid, t);
    for (int i = 0; i < grid.size(); ++i) {
        const double x = grid.x(i);
        const cplx u = cplx(0.0, 1.0) * (dlog([&](cplx z) { return tau.F(z); }, x - half) -
                                         dlog([&](cplx z) { return tau.G(z); }, x + half));
        const cplx v = cplx(0.0, -1.0) * (dlog([&](cplx z) { return tau.F(z); }, x + half) -
                                          dlog([&](cplx z) { return tau.G(z); }, x - half));
        f.u[i] = u.real();
        f.v[i] = v.real();
    }
    return f;
}

} // namespace ncilw
