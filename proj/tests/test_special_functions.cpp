#include <catch2/catch_amalgamated.hpp>

#include <complex>
#include <random>

#include "ncilw/geometry.hpp"
#include "ncilw/special_functions.hpp"
#include "oracles.hpp"

using namespace ncilw;
using Catch::Approx;

namespace {
double cabs(cplx z) { return std::abs(z); }
}

TEST_CASE("alpha_hyp basic values and symmetries") {
    GeometryHyperbolic g(pi);

    // coth(i pi / 2) = 0
    REQUIRE(cabs(alpha_hyp(cplx(0.0, g.delta), g)) < 1e-15);

    // alpha(3.4 i delta) = i cot(0.7 pi) * (pi / 2 delta) with the sign flipped;
    // oracle: cot(0.7 pi) = -tan(0.2 pi) by reflection
    const double cot07 = -std::tan(0.2 * pi);
    const cplx val = alpha_hyp(cplx(0.0, 3.4 * g.delta), g);
    REQUIRE(val.real() == Approx(0.0).margin(1e-14));
    REQUIRE(val.imag() == Approx(-cot07 * pi / (2.0 * g.delta)).epsilon(1e-12));
    REQUIRE(val.imag() == Approx(0.7265425280053609 * pi / (2.0 * g.delta)).epsilon(1e-12));

    std::mt19937_64 rng(2024);
    for (int i = 0; i < 50; ++i) {
        const cplx z = oracles::sample_off_poles(rng, g.delta);
        REQUIRE(cabs(alpha_hyp(-z, g) + alpha_hyp(z, g)) < 1e-12);
        REQUIRE(cabs(alpha_hyp(z + cplx(0.0, 2.0 * g.delta), g) - alpha_hyp(z, g)) < 1e-12);
    }
}

TEST_CASE("alpha_hyp pole proximity error") {
    GeometryHyperbolic g(1.0);
    REQUIRE_THROWS_AS(alpha_hyp(cplx(0.0, 0.0), g), pole_proximity_error);
    REQUIRE_THROWS_AS(alpha_hyp(cplx(1e-14, 0.0), g), pole_proximity_error);
    REQUIRE_THROWS_AS(alpha_hyp(cplx(0.0, 2.0), g), pole_proximity_error);
    REQUIRE_NOTHROW(alpha_hyp(cplx(1e-10, 0.0), g));
    // configurable threshold
    REQUIRE_THROWS_AS(alpha_hyp(cplx(1e-6, 0.0), g, 1e-5), pole_proximity_error);
}

TEST_CASE("V_hyp and Vtilde_hyp values") {
    GeometryHyperbolic g(0.7);
    const double c2 = std::pow(pi / (2.0 * g.delta), 2);

    // cosh(0) = 1
    REQUIRE(Vtilde_hyp(cplx(0.0, 0.0), g).real() == Approx(-c2).epsilon(1e-14));
    // sinh(i pi/2)^2 = -1
    REQUIRE(V_hyp(cplx(0.0, g.delta), g).real() == Approx(-c2).epsilon(1e-14));
    REQUIRE(cabs(V_hyp(cplx(0.0, g.delta), g) - Vtilde_hyp(cplx(0.0, 0.0), g)) < 1e-14);

    // Vtilde(z) = V(z - i delta) off the poles
    std::mt19937_64 rng(11);
    for (int i = 0; i < 30; ++i) {
        const cplx z = oracles::sample_off_poles(rng, g.delta);
        REQUIRE(cabs(Vtilde_hyp(z + cplx(0.0, g.delta), g) - V_hyp(z, g)) <
                1e-12 * (1.0 + cabs(V_hyp(z, g))));
    }

    // d alpha / dz = -V by central differences at z = 1 + 0.3i
    const cplx z(1.0, 0.3);
    const cplx fd = oracles::central_diff([&](cplx zz) { return alpha_hyp(zz, g); }, z);
    REQUIRE(cabs(fd + V_hyp(z, g)) < 1e-8);
}

TEST_CASE("hyperbolic identity family at randomized arguments") {
    std::mt19937_64 rng(7);
    for (double delta : {0.6, 1.0, pi}) {
        GeometryHyperbolic g(delta);
        for (int i = 0; i < 40; ++i) {
            const cplx z = oracles::sample_off_poles(rng, delta);
            // alpha' = -V
            const cplx fd1 = oracles::central_diff([&](cplx w) { return alpha_hyp(w, g); }, z);
            REQUIRE(cabs(fd1 + V_hyp(z, g)) < 1e-8 * (1.0 + cabs(V_hyp(z, g))));
            // (alpha^2)' = V'
            const cplx fd2 = oracles::central_diff(
                [&](cplx w) { const cplx a = alpha_hyp(w, g); return a * a; }, z);
            REQUIRE(cabs(fd2 - V_hyp_prime(z, g)) < 1e-7 * (1.0 + cabs(V_hyp_prime(z, g))));
            // four-point addition identity
            cplx a = oracles::sample_off_poles(rng, delta);
            cplx b = oracles::sample_off_poles(rng, delta);
            while (cabs(a - b) < 0.2 * delta || cabs(z - a) < 0.2 * delta ||
                   cabs(z - b) < 0.2 * delta) {
                a = oracles::sample_off_poles(rng, delta);
                b = oracles::sample_off_poles(rng, delta);
            }
            const cplx lhs = oracles::central_diff(
                [&](cplx w) { return alpha_hyp(w - a, g) * alpha_hyp(w - b, g); }, z);
            const cplx rhs = (-V_hyp(z - a, g) + V_hyp(z - b, g)) * alpha_hyp(a - b, g);
            REQUIRE(cabs(lhs - rhs) < 1e-7 * (1.0 + cabs(rhs)));
        }
    }
}

TEST_CASE("lattice constants and Legendre relation") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(0.5, 50.0);
    for (int i = 0; i < 25; ++i) {
        const double L = dist(rng), delta = dist(rng);
        LatticeElliptic lat(L, delta);
        REQUIRE(lat.nome() > 0.0);
        REQUIRE(lat.nome() < 1.0);
        const cplx legendre = lat.eta1() * lat.omega2() - lat.eta2() * lat.omega1();
        REQUIRE(cabs(legendre - cplx(0.0, pi / 2.0)) < 1e-10);
    }
}

TEST_CASE("weierstrass evenness, oddness and derivative relation") {
    LatticeElliptic lat(7.0, 1.3);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 40; ++i) {
        const cplx z = oracles::sample_off_poles(rng, lat.delta());
        REQUIRE(cabs(wp(-z, lat) - wp(z, lat)) < 1e-11 * (1.0 + cabs(wp(z, lat))));
        REQUIRE(cabs(zeta_w(-z, lat) + zeta_w(z, lat)) < 1e-11 * (1.0 + cabs(zeta_w(z, lat))));
        REQUIRE(cabs(zeta1(-z, lat) + zeta1(z, lat)) < 1e-11 * (1.0 + cabs(zeta1(z, lat))));
        // zeta' = -wp
        const cplx fd = oracles::central_diff([&](cplx w) { return zeta_w(w, lat); }, z);
        REQUIRE(cabs(fd + wp(z, lat)) < 1e-7 * (1.0 + cabs(wp(z, lat))));
        // wp' matches finite differences of wp
        const cplx fdp = oracles::central_diff([&](cplx w) { return wp(w, lat); }, z);
        REQUIRE(cabs(fdp - wp_prime(z, lat)) < 1e-6 * (1.0 + cabs(wp_prime(z, lat))));
    }
}

TEST_CASE("zeta1 matches the cot-sum oracle") {
    for (auto [L, delta] : {std::pair{5.0, 1.0}, std::pair{20.0, 1.0}, std::pair{3.0, 2.0}}) {
        LatticeElliptic lat(L, delta);
        std::mt19937_64 rng(31);
        for (int i = 0; i < 20; ++i) {
            const cplx z = oracles::sample_off_poles(rng, std::min(delta, L / 4.0));
            const cplx ours = zeta1(z, lat);
            const cplx oracle = oracles::zeta1_cot_sum(z, lat, 64);
            REQUIRE(cabs(ours - oracle) < 1e-9 * (1.0 + cabs(ours)));
        }
    }
}

TEST_CASE("zeta1 and zeta2 periodicity structure") {
    LatticeElliptic lat(9.0, 1.1);
    std::mt19937_64 rng(17);
    const double jump = pi / lat.delta();
    for (int i = 0; i < 25; ++i) {
        const cplx z = oracles::sample_off_poles(rng, lat.delta());
        REQUIRE(cabs(zeta1(z + lat.L(), lat) - zeta1(z, lat)) < 1e-11 * (1.0 + cabs(zeta1(z, lat))));
        REQUIRE(cabs(zeta2(z + cplx(0.0, 2.0 * lat.delta()), lat) - zeta2(z, lat)) <
                1e-11 * (1.0 + cabs(zeta2(z, lat))));
        REQUIRE(cabs(zeta2(z + lat.L(), lat) - zeta2(z, lat) - jump) < 1e-10 * (1.0 + jump));
        REQUIRE(cabs(zeta2(-z, lat) + zeta2(z, lat)) < 1e-11 * (1.0 + cabs(zeta2(z, lat))));
    }
}

TEST_CASE("weierstrass functional equation") {
    LatticeElliptic lat(6.0, 1.4);
    std::mt19937_64 rng(23);
    for (int i = 0; i < 40; ++i) {
        const cplx x = oracles::sample_off_poles(rng, lat.delta(), 0.25);
        cplx y = oracles::sample_off_poles(rng, lat.delta(), 0.25);
        while (cabs(x + y) < 0.3 * lat.delta()) y = oracles::sample_off_poles(rng, lat.delta(), 0.25);
        const cplx z = -x - y;
        const cplx s = zeta_w(x, lat) + zeta_w(y, lat) + zeta_w(z, lat);
        const cplx rhs = wp(x, lat) + wp(y, lat) + wp(z, lat);
        REQUIRE(cabs(s * s - rhs) < 1e-8 * (1.0 + cabs(rhs)));
    }
}

TEST_CASE("hyperbolic limit of the elliptic kernels") {
    const double delta = 1.0;
    GeometryHyperbolic g(delta);
    LatticeElliptic lat(100.0 * delta, delta);

    // zeta2 -> alpha pointwise
    for (double re : {0.3, 1.0, 2.5}) {
        for (double im : {-0.6, 0.2, 0.8}) {
            const cplx z(re, im);
            REQUIRE(cabs(zeta2(z, lat) - alpha_hyp(z, g)) < 1e-6);
        }
    }
    // f2 -> 0
    REQUIRE(cabs(f2(cplx(1.0, 0.2), lat)) < 1e-6);

    // wp -> V up to an additive constant; compare differences of differences
    LatticeElliptic lat50(50.0 * delta, delta);
    const cplx z1(0.7, 0.25), z2(1.9, -0.4);
    const cplx dwp = wp(z1, lat50) - wp(z2, lat50);
    const cplx dv = V_hyp(z1, g) - V_hyp(z2, g);
    REQUIRE(cabs(dwp - dv) < 1e-8);
}

TEST_CASE("f2 identity and parity") {
    LatticeElliptic lat(5.0, 1.0);
    std::mt19937_64 rng(41);
    for (int i = 0; i < 30; ++i) {
        const cplx z = oracles::sample_off_poles(rng, lat.delta(), 0.25);
        // (alpha^2)' = wp' + f2 with alpha = zeta2
        const cplx lhs = oracles::central_diff(
            [&](cplx w) { const cplx a = zeta2(w, lat); return a * a; }, z);
        const cplx rhs = wp_prime(z, lat) + f2(z, lat);
        REQUIRE(cabs(lhs - rhs) < 1e-7 * (1.0 + cabs(rhs)));
        // f2 is odd: zeta2^2 - wp is even, so its derivative flips sign
        REQUIRE(cabs(f2(-z, lat) + f2(z, lat)) < 1e-10 * (1.0 + cabs(f2(z, lat))));
    }
}

TEST_CASE("elliptic four-point identity with the f2 correction") {
    LatticeElliptic lat(6.5, 1.2);
    std::mt19937_64 rng(53);
    for (int i = 0; i < 30; ++i) {
        const cplx x = oracles::sample_off_poles(rng, lat.delta(), 0.3);
        cplx a = oracles::sample_off_poles(rng, lat.delta(), 0.3);
        cplx b = oracles::sample_off_poles(rng, lat.delta(), 0.3);
        while (cabs(a - b) < 0.4 * lat.delta() || cabs(x - a) < 0.4 * lat.delta() ||
               cabs(x - b) < 0.4 * lat.delta()) {
            a = oracles::sample_off_poles(rng, lat.delta(), 0.3);
            b = oracles::sample_off_poles(rng, lat.delta(), 0.3);
        }
        const cplx lhs = oracles::central_diff(
            [&](cplx w) { return zeta2(w - a, lat) * zeta2(w - b, lat); }, x);
        const cplx rhs = (zeta2_prime(x - a, lat) - zeta2_prime(x - b, lat)) * zeta2(a - b, lat) +
                         0.5 * (f2(x - a, lat) + f2(x - b, lat));
        REQUIRE(cabs(lhs - rhs) < 1e-7 * (1.0 + cabs(rhs)));
    }
}

TEST_CASE("dispersion relations") {
    REQUIRE(dispersion(DispersionKind::bo, -2.0, 1.0) == Approx(-4.0));
    REQUIRE(dispersion(DispersionKind::kdv, 3.0, 1.0) == Approx(9.0));
    REQUIRE(dispersion(DispersionKind::ilw, 0.0, 2.0) == 0.0);
    REQUIRE(dispersion(DispersionKind::ncilw_coupling, 0.0, 2.0) == 0.0);

    // ILW approaches BO for large k delta
    const double k = 40.0;
    REQUIRE(std::abs(dispersion(DispersionKind::ilw, k, 1.0) -
                     dispersion(DispersionKind::bo, k, 1.0)) < 1e-12);
    // coupling multiplier dies off
    REQUIRE(std::abs(dispersion(DispersionKind::ncilw_coupling, k, 1.0)) < 1e-12);
    // odd in k
    for (double kk : {0.3, 1.7, 5.0}) {
        REQUIRE(dispersion(DispersionKind::ilw, -kk, 0.8) ==
                Approx(-dispersion(DispersionKind::ilw, kk, 0.8)));
    }
}
