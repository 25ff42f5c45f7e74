#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "ncilw/cms_dynamics.hpp"
#include "ncilw/poles.hpp"
#include "ncilw/soliton_solutions.hpp"
#include "oracles.hpp"

using namespace ncilw;
using Catch::Approx;

namespace {
double cabs(cplx z) { return std::abs(z); }

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) t[i] = a + (b - a) * i / (n - 1);
    return t;
}

const std::vector<cplx> fig2_a{cplx(-4.0, 1.2 * pi), cplx(3.0, 0.85 * pi)};
} // namespace

TEST_CASE("build_real_initial validates and conjugates") {
    GeometryHyperbolic g(pi);
    auto p = build_real_initial(fig2_a, Geometry(g));
    REQUIRE(p.n_z() == 2);
    REQUIRE(p.is_conjugate_pair());
    REQUIRE(p.zdot.size() == 2);

    REQUIRE_THROWS_AS(build_real_initial({cplx(0.0, 0.3 * pi)}, Geometry(g)),
                      window_violation_error);
    REQUIRE_THROWS_AS(build_real_initial({cplx(0.0, 1.6 * pi)}, Geometry(g)),
                      window_violation_error);

    auto empty = build_real_initial({}, Geometry(g));
    REQUIRE(empty.n_z() == 0);
}

TEST_CASE("one-pole Backlund velocity: stationary at Im a = delta, rightward above") {
    GeometryHyperbolic g(pi);

    // Im a = delta gives zdot(0) = 0 for any Re a
    for (double x0 : {-3.0, 0.0, 7.5}) {
        auto p = build_real_initial({cplx(x0, g.delta)}, Geometry(g));
        REQUIRE(cabs(p.zdot[0]) < 1e-14);
        REQUIRE(cabs(p.wdot[0]) < 1e-14);
    }

    // a = 1.2 i delta: zdot(0) = +0.72654 * pi / delta, real and rightward
    auto p = build_real_initial({cplx(0.0, 1.2 * g.delta)}, Geometry(g));
    REQUIRE(p.zdot[0].imag() == Approx(0.0).margin(1e-14));
    REQUIRE(p.zdot[0].real() == Approx(0.7265425280053609 * pi / g.delta).epsilon(1e-10));

    // below Im a = delta the soliton is v-dominated and moves left
    auto pl = build_real_initial({cplx(0.0, 0.85 * g.delta)}, Geometry(g));
    REQUIRE(pl.zdot[0].real() < 0.0);
}

TEST_CASE("far-separated poles move at their isolated one-soliton velocities") {
    GeometryHyperbolic g(1.0);
    const std::vector<cplx> a{cplx(-15.0, 1.2), cplx(15.0, 0.8)};
    auto p = build_real_initial(a, Geometry(g));
    for (int j = 0; j < 2; ++j) {
        const cplx iso = one_soliton_velocity(a[j], g);
        REQUIRE(cabs(p.zdot[j] - iso) < 1e-6);
    }
}

TEST_CASE("newton_acceleration basics") {
    GeometryHyperbolic g(1.0);
    Geometry geo(g);

    PoleConfiguration one;
    one.z = {cplx(0.3, 1.0)};
    auto [az1, aw1] = newton_acceleration(one, geo);
    REQUIRE(cabs(az1[0]) < 1e-15);

    // separation i delta: V'(i delta) = 0 by symmetry; oracle: centered difference of V
    PoleConfiguration two;
    two.z = {cplx(0.0, 1.2), cplx(0.0, 0.2)};
    auto [az2, aw2] = newton_acceleration(two, geo);
    REQUIRE(cabs(az2[0]) < 1e-13);
    const cplx fd = oracles::central_diff([&](cplx w) { return V_hyp(w, g); }, cplx(0.0, 1.0));
    REQUIRE(cabs(fd) < 1e-8);

    // Newton's third law within a family
    PoleConfiguration pair;
    pair.z = {cplx(-0.7, 1.1), cplx(0.9, 0.8)};
    auto [az3, aw3] = newton_acceleration(pair, geo);
    REQUIRE(cabs(az3[0] + az3[1]) < 1e-12 * (1.0 + cabs(az3[0])));
}

TEST_CASE("one-pole trajectory is exactly linear") {
    GeometryHyperbolic g(pi);
    auto p = build_real_initial({cplx(-2.0, 1.2 * pi)}, Geometry(g));
    const cplx v0 = p.zdot[0];

    IntegratorConfig cfg;
    auto traj = integrate(p, linspace(0.0, 10.0, 11), Geometry(g), cfg, FlowForm::backlund);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const cplx expect = p.z[0] + v0 * traj.times[i];
        REQUIRE(cabs(traj.states[i].z[0] - expect) < 1e-10);
        REQUIRE(traj.states[i].z[0].imag() == Approx(1.2 * pi).margin(1e-12));
    }

    auto traj_n = integrate(p, linspace(0.0, 10.0, 11), Geometry(g), cfg, FlowForm::newton);
    for (std::size_t i = 0; i < traj_n.times.size(); ++i)
        REQUIRE(cabs(traj_n.states[i].z[0] - (p.z[0] + v0 * traj_n.times[i])) < 1e-10);
}

TEST_CASE("two-soliton collision: forms agree and conjugation is preserved") {
    GeometryHyperbolic g(pi);
    auto p = build_real_initial(fig2_a, Geometry(g));
    const auto times = linspace(0.0, 9.0, 19);

    IntegratorConfig cfg;
    auto tb = integrate(p, times, Geometry(g), cfg, FlowForm::backlund);
    auto tn = integrate(p, times, Geometry(g), cfg, FlowForm::newton);

    double worst_form = 0.0, worst_conj = 0.0, worst_vel = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (int j = 0; j < 2; ++j) {
            worst_form = std::max(worst_form, cabs(tb.states[i].z[j] - tn.states[i].z[j]));
            worst_form = std::max(worst_form, cabs(tb.states[i].w[j] - tn.states[i].w[j]));
            worst_conj = std::max(worst_conj,
                                  cabs(tn.states[i].w[j] - std::conj(tn.states[i].z[j])));
        }
        // Backlund consistency along the Newton flow
        auto [zd, wd] = backlund_velocities(tn.states[i], Geometry(g));
        for (int j = 0; j < 2; ++j)
            worst_vel = std::max(worst_vel, cabs(tn.states[i].zdot[j] - zd[j]));
    }
    REQUIRE(worst_form < 1e-8);
    REQUIRE(worst_conj < 1e-8);
    REQUIRE(worst_vel < 1e-6);
}

TEST_CASE("fig. 3 phenomenology: imaginary parts swap through the collision") {
    GeometryHyperbolic g(pi);
    auto p = build_real_initial(fig2_a, Geometry(g));
    auto traj = integrate(p, linspace(0.0, 9.0, 10), Geometry(g), {}, FlowForm::backlund);
    const auto& last = traj.states.back();
    REQUIRE(std::abs(last.z[0].imag() - p.z[1].imag()) < 1e-3);
    REQUIRE(std::abs(last.z[1].imag() - p.z[0].imag()) < 1e-3);
    // directions swapped as well: pole 1 now drifts left, pole 2 right
    REQUIRE(last.zdot[0].real() < 0.0);
    REQUIRE(last.zdot[1].real() > 0.0);
}

TEST_CASE("elliptic flow: form equivalence and conjugation") {
    LatticeElliptic lat(10.0, 1.0);
    Geometry geo(lat);
    auto p = build_real_initial({cplx(-2.0, 1.2), cplx(2.0, 0.85)}, geo);
    const auto times = linspace(0.0, 2.0, 9);

    auto tb = integrate(p, times, geo, {}, FlowForm::backlund);
    auto tn = integrate(p, times, geo, {}, FlowForm::newton);
    double worst_form = 0.0, worst_conj = 0.0, worst_vel = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (int j = 0; j < 2; ++j) {
            worst_form = std::max(worst_form, cabs(tb.states[i].z[j] - tn.states[i].z[j]));
            worst_conj = std::max(worst_conj,
                                  cabs(tb.states[i].w[j] - std::conj(tb.states[i].z[j])));
        }
        auto [zd, wd] = backlund_velocities(tn.states[i], geo);
        for (int j = 0; j < 2; ++j)
            worst_vel = std::max(worst_vel, cabs(tn.states[i].zdot[j] - zd[j]));
    }
    REQUIRE(worst_form < 1e-8);
    REQUIRE(worst_conj < 1e-8);
    REQUIRE(worst_vel < 1e-6);
}

TEST_CASE("strip violation is detected mid-flight") {
    GeometryHyperbolic g(1.0);
    PoleConfiguration p;
    p.z = {cplx(0.0, 0.6)};
    p.zdot = {cplx(0.0, -1.0)}; // heading for the Im z = delta/2 singular line
    IntegratorConfig cfg;
    REQUIRE_THROWS_AS(integrate(p, {0.0, 1.0}, Geometry(g), cfg, FlowForm::newton,
                                /*use_supplied_velocities=*/true),
                      strip_violation_error);
}

TEST_CASE("empty configuration integrates to the zero solution") {
    GeometryHyperbolic g(1.0);
    auto p = build_real_initial({}, Geometry(g));
    auto traj = integrate(p, {0.0, 1.0, 2.0}, Geometry(g));
    REQUIRE(traj.times.size() == 3);
    REQUIRE(traj.states[2].n_z() == 0);
}

TEST_CASE("output times must increase") {
    GeometryHyperbolic g(1.0);
    auto p = build_real_initial({cplx(0.0, 1.0)}, Geometry(g));
    REQUIRE_THROWS_AS(integrate(p, {0.0, 1.0, 0.5}, Geometry(g)), config_error);
    REQUIRE_THROWS_AS(integrate(p, {}, Geometry(g)), config_error);
}
