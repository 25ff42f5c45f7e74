#pragma once

#include <algorithm>
#include <complex>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ncilw/errors.hpp"
#include "ncilw/geometry.hpp"
#include "ncilw/poles.hpp"
#include "ncilw/special_functions.hpp"

namespace ncilw {

/// First-order coupled flow relating the two pole families. Solutions of this
/// system automatically solve the decoupled Newton equations, and conversely
/// the Newton flow preserves it when started from these velocities.
inline std::pair<std::vector<cplx>, std::vector<cplx>>
backlund_velocities(const PoleConfiguration& poles, const Geometry& g,
                    double eps = default_pole_eps) {
    const cplx ishift(0.0, geometry_delta(g));
    const cplx two_i(0.0, 2.0);
    std::vector<cplx> zdot(poles.n_z()), wdot(poles.n_w());
    for (std::size_t j = 0; j < poles.n_z(); ++j) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < poles.n_z(); ++k)
            if (k != j) s += kernel_alpha(poles.z[j] - poles.z[k], g, eps);
        for (std::size_t k = 0; k < poles.n_w(); ++k)
            s -= kernel_alpha(poles.z[j] - poles.w[k] + ishift, g, eps);
        zdot[j] = two_i * s;
    }
    for (std::size_t j = 0; j < poles.n_w(); ++j) {
        cplx s = 0.0;
        for (std::size_t k = 0; k < poles.n_w(); ++k)
            if (k != j) s += kernel_alpha(poles.w[j] - poles.w[k], g, eps);
        for (std::size_t k = 0; k < poles.n_z(); ++k)
            s -= kernel_alpha(poles.w[j] - poles.z[k] + ishift, g, eps);
        wdot[j] = -two_i * s;
    }
    return {std::move(zdot), std::move(wdot)};
}

/// Newton accelerations of the two decoupled CMS systems,
/// zdd_j = -sum_{k != j} 4 V'(z_j - z_k), and likewise for w.
inline std::pair<std::vector<cplx>, std::vector<cplx>>
newton_acceleration(const PoleConfiguration& poles, const Geometry& g,
                    double eps = default_pole_eps) {
    auto family = [&](const std::vector<cplx>& fam) {
        std::vector<cplx> acc(fam.size(), cplx(0.0, 0.0));
        for (std::size_t j = 0; j < fam.size(); ++j) {
            cplx s = 0.0;
            for (std::size_t k = 0; k < fam.size(); ++k)
                if (k != j) s += kernel_v_prime(fam[j] - fam[k], g, eps);
            acc[j] = -4.0 * s;
        }
        return acc;
    };
    return {family(poles.z), family(poles.w)};
}

/// Builds the real-solution configuration z = a, w = conj(a) with velocities
/// from the Backlund system. Requires delta/2 < Im a_j < 3 delta/2.
inline PoleConfiguration build_real_initial(const std::vector<cplx>& a, const Geometry& g) {
    const double delta = geometry_delta(g);
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!(a[j].imag() > delta / 2.0 && a[j].imag() < 1.5 * delta))
            throw window_violation_error("build_real_initial: Im a[" + std::to_string(j) +
                                         "] outside (delta/2, 3 delta/2)");
        for (std::size_t k = 0; k < j; ++k)
            if (a[j] == a[k])
                throw singular_configuration_error("build_real_initial: coincident poles " +
                                                   std::to_string(k) + "," + std::to_string(j));
    }
    PoleConfiguration p;
    p.kind = is_elliptic(g) ? PoleKind::elliptic : PoleKind::hyperbolic;
    if (p.kind == PoleKind::elliptic) {
        const double L = std::get<LatticeElliptic>(g).L();
        for (std::size_t j = 0; j < a.size(); ++j)
            if (!(a[j].real() >= -L / 2.0 && a[j].real() < L / 2.0))
                throw window_violation_error("build_real_initial: Re a[" + std::to_string(j) +
                                             "] outside [-L/2, L/2)");
    }
    p.z = a;
    p.w.reserve(a.size());
    for (const cplx& aj : a) p.w.push_back(std::conj(aj));
    if (!a.empty()) {
        auto [zd, wd] = backlund_velocities(p, g);
        p.zdot = std::move(zd);
        p.wdot = std::move(wd);
    }
    return p;
}

enum class IntegratorMethod { adaptive_rk45, fixed_rk4 };
enum class FlowForm { backlund, newton };

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::adaptive_rk45;
    double rtol = 1e-10;
    double atol = 1e-10;
    double dt_init = 1e-3;
    double dt_max = 0.1;
    long max_steps = 2'000'000;
    double strip_margin_factor = 1e-6; // margin = factor * delta
    double collision_tol = 1e-10;      // hard singular-configuration threshold
    double pole_eps = default_pole_eps;

    void validate() const {
        if (!(rtol > 0.0) || !(atol > 0.0))
            throw config_error("IntegratorConfig: rtol and atol must be positive");
        if (!(dt_init > 0.0) || !(dt_max > 0.0))
            throw config_error("IntegratorConfig: dt_init and dt_max must be positive");
    }
};

struct TrajectorySample {
    double min_pair_distance;  // running min since the previous sample
    double min_strip_margin;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<PoleConfiguration> states;
    std::vector<TrajectorySample> diagnostics;
    long accepted_steps = 0;
    long rejected_steps = 0;
};

namespace detail {

using State = std::vector<cplx>;

inline void axpy(State& y, double a, const State& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

// Dormand-Prince 5(4) pair.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
    static constexpr double a21 = 1.0 / 5.0;
    static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                            a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
    static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                            a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                            b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    // 4th-order embedded weights.
    static constexpr double e1 = 5179.0 / 57600.0, e3 = 7571.0 / 16695.0, e4 = 393.0 / 640.0,
                            e5 = -92097.0 / 339200.0, e6 = 187.0 / 2100.0, e7 = 1.0 / 40.0;
};

template <typename Rhs>
State rk4_step(const Rhs& rhs, const State& y, double h) {
    State k1 = rhs(y);
    State y2 = y;
    axpy(y2, h / 2.0, k1);
    State k2 = rhs(y2);
    State y3 = y;
    axpy(y3, h / 2.0, k2);
    State k3 = rhs(y3);
    State y4 = y;
    axpy(y4, h, k3);
    State k4 = rhs(y4);
    State out = y;
    for (std::size_t i = 0; i < y.size(); ++i)
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

// Weighted rms of the embedded error over the real/imag parts of the state.
inline double error_norm(const State& err, const State& y0, const State& y1, double atol,
                         double rtol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < err.size(); ++i) {
        const double sr = atol + rtol * std::max(std::abs(y0[i].real()), std::abs(y1[i].real()));
        const double si = atol + rtol * std::max(std::abs(y0[i].imag()), std::abs(y1[i].imag()));
        const double er = err[i].real() / sr;
        const double ei = err[i].imag() / si;
        acc += er * er + ei * ei;
    }
    return std::sqrt(acc / (2.0 * static_cast<double>(err.size())));
}

} // namespace detail

/// Integrates the pole flow and samples it at the requested times.
///
/// form = backlund integrates the first-order system directly; form = newton
/// integrates the second-order CMS equations, seeding velocities from the
/// Backlund system at the initial time unless use_supplied_velocities is set.
/// The strip condition and same-family collisions are monitored on every
/// accepted step.
inline Trajectory integrate(const PoleConfiguration& initial, const std::vector<double>& times,
                            const Geometry& g, const IntegratorConfig& config = {},
                            FlowForm form = FlowForm::backlund,
                            bool use_supplied_velocities = false) {
    config.validate();
    if (times.empty()) throw config_error("integrate: need at least one output time");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw config_error("integrate: output times must be strictly increasing");

    const double delta = geometry_delta(g);
    const double margin = config.strip_margin_factor * delta;
    if (initial.kind == PoleKind::elliptic && initial.n_z() != initial.n_w())
        throw config_error("integrate: elliptic flow requires equal family sizes");
    check_strip(initial, delta, margin, times.front());

    PoleConfiguration start = initial;
    if (!use_supplied_velocities || start.zdot.size() != start.n_z() ||
        start.wdot.size() != start.n_w()) {
        auto [zd, wd] = backlund_velocities(start, g, config.pole_eps);
        start.zdot = std::move(zd);
        start.wdot = std::move(wd);
    }

    const std::size_t nz = start.n_z(), nw = start.n_w();
    const bool second_order = (form == FlowForm::newton);

    detail::State y;
    y.insert(y.end(), start.z.begin(), start.z.end());
    y.insert(y.end(), start.w.begin(), start.w.end());
    if (second_order) {
        y.insert(y.end(), start.zdot.begin(), start.zdot.end());
        y.insert(y.end(), start.wdot.begin(), start.wdot.end());
    }

    auto unpack = [&](const detail::State& s) {
        PoleConfiguration p;
        p.kind = start.kind;
        p.z.assign(s.begin(), s.begin() + nz);
        p.w.assign(s.begin() + nz, s.begin() + nz + nw);
        if (second_order) {
            p.zdot.assign(s.begin() + nz + nw, s.begin() + 2 * nz + nw);
            p.wdot.assign(s.begin() + 2 * nz + nw, s.end());
        } else {
            auto [zd, wd] = backlund_velocities(p, g, config.pole_eps);
            p.zdot = std::move(zd);
            p.wdot = std::move(wd);
        }
        return p;
    };

    auto rhs = [&](const detail::State& s) {
        PoleConfiguration p;
        p.kind = start.kind;
        p.z.assign(s.begin(), s.begin() + nz);
        p.w.assign(s.begin() + nz, s.begin() + nz + nw);
        detail::State d(s.size());
        if (second_order) {
            auto [za, wa] = newton_acceleration(p, g, config.pole_eps);
            std::copy(s.begin() + nz + nw, s.end(), d.begin());
            std::copy(za.begin(), za.end(), d.begin() + nz + nw);
            std::copy(wa.begin(), wa.end(), d.begin() + 2 * nz + nw);
        } else {
            auto [zd, wd] = backlund_velocities(p, g, config.pole_eps);
            std::copy(zd.begin(), zd.end(), d.begin());
            std::copy(wd.begin(), wd.end(), d.begin() + nz);
        }
        return d;
    };

    Trajectory traj;
    traj.times.reserve(times.size());
    traj.states.reserve(times.size());

    double t = times.front();
    double window_min_dist = min_pairwise_distance(start);
    double window_min_margin = strip_margin(start, delta);
    auto record = [&](double tt, const detail::State& s) {
        traj.times.push_back(tt);
        traj.states.push_back(unpack(s));
        traj.diagnostics.push_back({window_min_dist, window_min_margin});
        window_min_dist = std::numeric_limits<double>::infinity();
        window_min_margin = std::numeric_limits<double>::infinity();
    };
    record(t, y);

    // Band indices of Im(p -+ i delta/2) relative to the 2 delta lattice of
    // singular lines; a change between accepted steps means a pole crossed a
    // line even if no sample landed within the margin.
    auto bands = [&](const detail::State& s) {
        std::vector<long> b;
        b.reserve(2 * (nz + nw));
        for (std::size_t i = 0; i < nz + nw; ++i) {
            b.push_back(static_cast<long>(std::floor((s[i].imag() - delta / 2.0) / (2.0 * delta))));
            b.push_back(static_cast<long>(std::floor((s[i].imag() + delta / 2.0) / (2.0 * delta))));
        }
        return b;
    };
    std::vector<long> prev_bands = bands(y);

    auto post_step_checks = [&](const detail::State& s, double tt) {
        PoleConfiguration p;
        p.kind = start.kind;
        p.z.assign(s.begin(), s.begin() + nz);
        p.w.assign(s.begin() + nz, s.begin() + nz + nw);
        const double dist = min_pairwise_distance(p);
        if (dist < config.collision_tol)
            throw singular_configuration_error("pole collision at t=" + std::to_string(tt) +
                                               " (pairwise distance " + std::to_string(dist) + ")");
        check_strip(p, delta, margin, tt);
        auto b = bands(s);
        if (b != prev_bands)
            throw strip_violation_error("strip condition crossed between steps near t=" +
                                        std::to_string(tt));
        prev_bands = std::move(b);
        window_min_dist = std::min(window_min_dist, dist);
        window_min_margin = std::min(window_min_margin, strip_margin(p, delta));
    };

    if (y.empty()) { // empty configuration: nothing evolves
        for (std::size_t i = 1; i < times.size(); ++i) record(times[i], y);
        return traj;
    }

    double h = std::min(config.dt_init, config.dt_max);
    long steps = 0;

    for (std::size_t target = 1; target < times.size(); ++target) {
        const double t_end = times[target];
        while (t < t_end) {
            if (config.method == IntegratorMethod::fixed_rk4) {
                const double hh = std::min(h, t_end - t);
                y = detail::rk4_step(rhs, y, hh);
                t += hh;
                post_step_checks(y, t);
                if (++steps > config.max_steps)
                    throw integration_error("integrate: max step count exceeded");
                continue;
            }
            // Dormand-Prince 5(4) with step clipped to the output time.
            bool clipped = false;
            double hh = h;
            if (t + hh >= t_end) {
                hh = t_end - t;
                clipped = true;
            }
            using D = detail::Dopri5;
            detail::State k1 = rhs(y);
            detail::State ytmp = y;
            detail::axpy(ytmp, hh * D::a21, k1);
            detail::State k2 = rhs(ytmp);
            ytmp = y;
            detail::axpy(ytmp, hh * D::a31, k1);
            detail::axpy(ytmp, hh * D::a32, k2);
            detail::State k3 = rhs(ytmp);
            ytmp = y;
            detail::axpy(ytmp, hh * D::a41, k1);
            detail::axpy(ytmp, hh * D::a42, k2);
            detail::axpy(ytmp, hh * D::a43, k3);
            detail::State k4 = rhs(ytmp);
            ytmp = y;
            detail::axpy(ytmp, hh * D::a51, k1);
            detail::axpy(ytmp, hh * D::a52, k2);
            detail::axpy(ytmp, hh * D::a53, k3);
            detail::axpy(ytmp, hh * D::a54, k4);
            detail::State k5 = rhs(ytmp);
            ytmp = y;
            detail::axpy(ytmp, hh * D::a61, k1);
            detail::axpy(ytmp, hh * D::a62, k2);
            detail::axpy(ytmp, hh * D::a63, k3);
            detail::axpy(ytmp, hh * D::a64, k4);
            detail::axpy(ytmp, hh * D::a65, k5);
            detail::State k6 = rhs(ytmp);
            detail::State y5 = y;
            detail::axpy(y5, hh * D::b1, k1);
            detail::axpy(y5, hh * D::b3, k3);
            detail::axpy(y5, hh * D::b4, k4);
            detail::axpy(y5, hh * D::b5, k5);
            detail::axpy(y5, hh * D::b6, k6);
            detail::State k7 = rhs(y5);
            detail::State err(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                const cplx y4i = y[i] + hh * (D::e1 * k1[i] + D::e3 * k3[i] + D::e4 * k4[i] +
                                              D::e5 * k5[i] + D::e6 * k6[i] + D::e7 * k7[i]);
                err[i] = y5[i] - y4i;
            }
            const double en = detail::error_norm(err, y, y5, config.atol, config.rtol);
            if (++steps > config.max_steps)
                throw integration_error("integrate: max step count exceeded at t=" +
                                        std::to_string(t));
            const double fac = std::clamp(0.9 * std::pow(std::max(en, 1e-300), -0.2), 0.2, 5.0);
            if (en <= 1.0) {
                t = clipped ? t_end : t + hh;
                y = std::move(y5);
                ++traj.accepted_steps;
                post_step_checks(y, t);
                // a step shortened only to hit an output time must not shrink
                // the controller's step size
                if (!clipped) h = std::min(hh * fac, config.dt_max);
            } else {
                ++traj.rejected_steps;
                h = std::min(hh * fac, config.dt_max);
                if (h < 1e-14 * std::max(1.0, std::abs(t)))
                    throw integration_error("integrate: step size underflow at t=" +
                                            std::to_string(t));
            }
        }
        record(t, y);
    }
    return traj;
}

} // namespace ncilw
