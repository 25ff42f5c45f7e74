#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "ncilw/errors.hpp"
#include "ncilw/geometry.hpp"
#include "ncilw/special_functions.hpp"

namespace ncilw {

enum class PoleKind { hyperbolic, elliptic };

/// State of the CMS pole flow: two families of complex poles with velocities.
///
/// z carries the poles entering u at x - z - i delta/2, w the conjugate
/// family entering at x - w + i delta/2. Real solutions have w = conj(z).
struct PoleConfiguration {
    PoleKind kind = PoleKind::hyperbolic;
    std::vector<cplx> z;
    std::vector<cplx> w;
    std::vector<cplx> zdot;
    std::vector<cplx> wdot;

    std::size_t n_z() const { return z.size(); }
    std::size_t n_w() const { return w.size(); }

    bool is_conjugate_pair() const {
        if (z.size() != w.size()) return false;
        for (std::size_t j = 0; j < z.size(); ++j)
            if (w[j] != std::conj(z[j])) return false;
        return true;
    }
};

/// Distance of y to the nearest point of step * Z.
inline double distance_to_multiple(double y, double step) {
    const double r = y - step * std::nearbyint(y / step);
    return std::abs(r);
}

/// Smallest margin of Im(p +- i delta/2) to 2 delta Z over all poles; the
/// ansatz kernels are singular exactly on those lines.
inline double strip_margin(const PoleConfiguration& poles, double delta) {
    double margin = std::numeric_limits<double>::infinity();
    const double period = 2.0 * delta;
    auto visit = [&](const std::vector<cplx>& fam) {
        for (const cplx& p : fam) {
            margin = std::min(margin, distance_to_multiple(p.imag() + delta / 2.0, period));
            margin = std::min(margin, distance_to_multiple(p.imag() - delta / 2.0, period));
        }
    };
    visit(poles.z);
    visit(poles.w);
    return margin;
}

inline void check_strip(const PoleConfiguration& poles, double delta, double margin,
                        double time = 0.0) {
    const double period = 2.0 * delta;
    auto visit = [&](const std::vector<cplx>& fam, const char* name) {
        for (std::size_t j = 0; j < fam.size(); ++j) {
            const double d = std::min(distance_to_multiple(fam[j].imag() + delta / 2.0, period),
                                      distance_to_multiple(fam[j].imag() - delta / 2.0, period));
            if (d < margin)
                throw strip_violation_error("strip condition violated at t=" + std::to_string(time) +
                                            " by " + name + "[" + std::to_string(j) + "]");
        }
    };
    visit(poles.z, "z");
    visit(poles.w, "w");
}

/// Minimum pairwise distance within each family (the Newton flow is singular
/// only at same-family collisions).
inline double min_pairwise_distance(const PoleConfiguration& poles) {
    double d = std::numeric_limits<double>::infinity();
    auto visit = [&](const std::vector<cplx>& fam) {
        for (std::size_t j = 0; j < fam.size(); ++j)
            for (std::size_t k = j + 1; k < fam.size(); ++k)
                d = std::min(d, std::abs(fam[j] - fam[k]));
    };
    visit(poles.z);
    visit(poles.w);
    return d;
}

} // namespace ncilw
