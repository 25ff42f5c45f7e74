// Command-line front end: every capability as a subcommand, emitting CSV/JSON
// artifacts plus a manifest with the exact resolved configuration.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "ncilw/cms_dynamics.hpp"
#include "ncilw/io.hpp"
#include "ncilw/run_config.hpp"
#include "ncilw/soliton_solutions.hpp"
#include "ncilw/spectral_solver.hpp"
#include "ncilw/validation.hpp"

namespace fs = std::filesystem;
using namespace ncilw;
using io::json;

namespace {

// flag > NCILW_OUT environment variable > config file > default
fs::path resolve_out_dir(const RunConfig& cfg, const std::string& fallback) {
    if (cfg.out_dir) return *cfg.out_dir;
    if (const char* env = std::getenv("NCILW_OUT")) return env;
    return fs::path("ncilw_out") / fallback;
}

Geometry make_geometry(const RunConfig& cfg) {
    if (!cfg.delta) throw config_error("this mode requires --delta");
    if (cfg.lattice_L) return Geometry(LatticeElliptic(*cfg.lattice_L, *cfg.delta));
    return Geometry(GeometryHyperbolic(*cfg.delta));
}

GridSpec make_grid(const RunConfig& cfg) {
    const double L = cfg.grid_L ? *cfg.grid_L : (cfg.lattice_L ? *cfg.lattice_L : 200.0);
    const int half = cfg.grid_n ? *cfg.grid_n : 512;
    return GridSpec(L, half);
}

SolverConfig make_solver_config(const RunConfig& cfg, double default_t_end) {
    SolverConfig sc;
    sc.dt = cfg.dt ? *cfg.dt : 5e-4;
    sc.t_end = cfg.t_end ? *cfg.t_end : default_t_end;
    if (cfg.scheme) sc.scheme = (*cfg.scheme == "rk4") ? TimeScheme::rk4 : TimeScheme::ifrk4;
    if (cfg.dealias)
        sc.dealias = (*cfg.dealias == "two-thirds") ? DealiasRule::two_thirds
                                                    : DealiasRule::convolution_b4;
    sc.output_stride =
        cfg.output_stride ? *cfg.output_stride
                          : std::max<long>(1, std::lround(sc.t_end / sc.dt / 10.0));
    return sc;
}

IntegratorConfig make_integrator_config(const RunConfig& cfg) {
    IntegratorConfig ic;
    if (cfg.rtol) ic.rtol = *cfg.rtol;
    if (cfg.atol) ic.atol = *cfg.atol;
    return ic;
}

double tol_or(const RunConfig& cfg, const char* name, double fallback) {
    if (cfg.tol.contains(name)) return cfg.tol.at(name).get<double>();
    return fallback;
}

FieldPair eval_exact(const PoleConfiguration& poles, const Geometry& g, const GridSpec& grid,
                     double t) {
    if (is_elliptic(g)) return eval_elliptic(poles, std::get<LatticeElliptic>(g), grid, t);
    return eval_hyperbolic(poles, std::get<GeometryHyperbolic>(g), grid, t);
}

void print_report(const validation::ExperimentReport& r) {
    for (const auto& v : r.verdicts)
        std::printf("  [%s] %-45s %.6e %s %.3e\n", v.pass ? "pass" : "FAIL", v.name.c_str(),
                    v.value, v.comparator.c_str(), v.tolerance);
    std::printf("%s: %s\n", r.id.c_str(), r.passed() ? "PASS" : "FAIL");
}

// ---------------------------------------------------------------------------

int run_exact(const RunConfig& cfg) {
    const Geometry g = make_geometry(cfg);
    if (cfg.a.empty()) throw config_error("exact: at least one pole parameter --a is required");
    const GridSpec grid = make_grid(cfg);
    std::vector<double> times = cfg.t.empty() ? std::vector<double>{0.0} : cfg.t;
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw config_error("exact: snapshot times must be strictly increasing");
    if (times.front() < 0.0) throw config_error("exact: snapshot times must be nonnegative");

    auto poles0 = build_real_initial(cfg.a, g);
    std::vector<double> pole_times = times;
    if (pole_times.front() > 0.0) pole_times.insert(pole_times.begin(), 0.0);
    Trajectory traj = integrate(poles0, pole_times, g, make_integrator_config(cfg));

    const fs::path out = resolve_out_dir(cfg, "exact");
    fs::create_directories(out);
    const std::string prefix = cfg.prefix ? *cfg.prefix : "exact";
    io::Manifest manifest(cfg.to_json());
    const std::size_t offset = pole_times.size() - times.size();
    for (std::size_t n = 0; n < times.size(); ++n) {
        const FieldPair f = eval_exact(traj.states[n + offset], g, grid, times[n]);
        const std::string base = prefix + "_t" + std::to_string(n + 1);
        io::write_field_csv(out / (base + ".csv"), f);
        io::write_json(out / (base + ".json"), io::field_to_json(f));
        manifest.add(base + ".csv", io::fieldpair_schema, "exact solution snapshot");
        manifest.add(base + ".json", io::fieldpair_schema);
    }
    io::write_trajectory_csv(out / (prefix + "_poles.csv"), traj);
    manifest.add(prefix + "_poles.csv", io::trajectory_schema, "pole trajectory");
    manifest.write(out);
    std::printf("exact: wrote %zu snapshot(s) to %s\n", times.size(), out.string().c_str());
    return 0;
}

int run_simulate(const RunConfig& cfg, bool conserve_mode) {
    const Geometry g = make_geometry(cfg);
    if (cfg.a.empty())
        throw config_error("simulate: at least one pole parameter --a is required");
    const GridSpec grid = make_grid(cfg);
    auto poles0 = build_real_initial(cfg.a, g);
    const FieldPair initial = eval_exact(poles0, g, grid, 0.0);
    const SolverConfig sc = make_solver_config(cfg, 9.0);

    const fs::path out = resolve_out_dir(cfg, conserve_mode ? "conserve" : "simulate");
    fs::create_directories(out);
    const std::string prefix = cfg.prefix ? *cfg.prefix : (conserve_mode ? "conserve" : "sim");
    io::Manifest manifest(cfg.to_json());

    EvolutionResult r = evolve(initial, geometry_delta(g), sc);
    for (std::size_t n = 0; n < r.snapshots.size(); ++n) {
        const std::string base = prefix + "_t" + std::to_string(n + 1);
        io::write_field_csv(out / (base + ".csv"), r.snapshots[n]);
        manifest.add(base + ".csv", io::fieldpair_schema,
                     "numeric snapshot at t=" + io::format_full(r.snapshots[n].time));
    }
    io::write_diagnostics_csv(out / (prefix + "_diagnostics.csv"), r.diagnostics);
    manifest.add(prefix + "_diagnostics.csv", io::diagnostics_schema,
                 "t, I1, I2, I3, max|u|, max|v|");

    int exit_code = 0;
    if (conserve_mode) {
        validation::ExperimentReport report;
        report.id = "conserve";
        report.params = cfg.to_json();
        const auto& d0 = r.diagnostics.front();
        const double i0[3] = {d0.i1, d0.i2, d0.i3};
        double drift[3] = {0, 0, 0};
        for (const auto& d : r.diagnostics) {
            const double ik[3] = {d.i1, d.i2, d.i3};
            for (int kk = 0; kk < 3; ++kk)
                drift[kk] = std::max(drift[kk], std::abs(ik[kk] - i0[kk]) /
                                                    std::max(1.0, std::abs(i0[kk])));
        }
        const double tol = tol_or(cfg, "drift", 1e-8);
        for (int kk = 0; kk < 3; ++kk)
            report.check("conservation_drift_I" + std::to_string(kk + 1), drift[kk], tol);
        print_report(report);
        io::write_json(out / "report.json", report.to_json());
        manifest.add("report.json", io::report_schema);
        exit_code = report.passed() ? 0 : 1;
    } else {
        std::printf("simulate: %ld steps, %zu snapshots -> %s\n", r.steps, r.snapshots.size(),
                    out.string().c_str());
    }
    manifest.write(out);
    return exit_code;
}

int run_compare(const RunConfig& cfg) {
    validation::Fig2Config fc;
    if (cfg.delta) fc.delta = *cfg.delta;
    if (!cfg.a.empty()) fc.a = cfg.a;
    if (cfg.t0) fc.t0 = *cfg.t0;
    if (cfg.n_snapshots) fc.n_snapshots = *cfg.n_snapshots;
    if (cfg.dt) fc.dt = *cfg.dt;
    if (cfg.grid_L) fc.grid_L = *cfg.grid_L;
    if (cfg.grid_n) fc.grid_half_n = *cfg.grid_n;
    if (cfg.scheme) fc.scheme = (*cfg.scheme == "rk4") ? TimeScheme::rk4 : TimeScheme::ifrk4;
    if (cfg.dealias)
        fc.dealias = (*cfg.dealias == "two-thirds") ? DealiasRule::two_thirds
                                                    : DealiasRule::convolution_b4;
    if (cfg.rtol) fc.rtol = *cfg.rtol;
    if (cfg.atol) fc.atol = *cfg.atol;
    fc.tol_field = tol_or(cfg, "field", fc.tol_field);
    fc.tol_drift = tol_or(cfg, "drift", fc.tol_drift);
    fc.tol_residual = tol_or(cfg, "residual", fc.tol_residual);

    const fs::path out = resolve_out_dir(cfg, "compare");
    fs::create_directories(out);
    auto report = validation::fig2_experiment(fc, out);
    print_report(report);
    io::write_json(out / "report.json", report.to_json());
    io::Manifest manifest(cfg.to_json());
    for (int n = 1; n <= fc.n_snapshots; ++n) {
        manifest.add("fig2_t" + std::to_string(n) + ".csv", io::fieldpair_schema,
                     "exact snapshot");
        manifest.add("fig2_numeric_t" + std::to_string(n) + ".csv", io::fieldpair_schema,
                     "spectral-solver snapshot");
    }
    manifest.add("fig2_diagnostics.csv", io::diagnostics_schema);
    manifest.add("report.json", io::report_schema);
    manifest.write(out);
    return report.passed() ? 0 : 1;
}

int run_poles(const RunConfig& cfg, bool fig3) {
    const fs::path out = resolve_out_dir(cfg, "poles");
    fs::create_directories(out);
    io::Manifest manifest(cfg.to_json());

    if (fig3) {
        validation::Fig3Config fc;
        if (cfg.delta) fc.delta = *cfg.delta;
        if (!cfg.a.empty()) fc.a = cfg.a;
        if (cfg.t_end) fc.t_end = *cfg.t_end;
        if (cfg.samples) fc.samples = *cfg.samples;
        if (cfg.rtol) fc.rtol = *cfg.rtol;
        if (cfg.atol) fc.atol = *cfg.atol;
        fc.tol_swap = tol_or(cfg, "swap", fc.tol_swap);
        fc.tol_form = tol_or(cfg, "form", fc.tol_form);
        fc.tol_velocity = tol_or(cfg, "velocity", fc.tol_velocity);
        fc.min_phase_shift = tol_or(cfg, "min_phase_shift", fc.min_phase_shift);
        auto report = validation::fig3_experiment(fc, out);
        print_report(report);
        io::write_json(out / "report.json", report.to_json());
        manifest.add("fig3_trajectory.csv", io::trajectory_schema);
        manifest.add("fig3_trajectory.json", io::trajectory_schema);
        manifest.add("fig3_free_flight.csv", io::trajectory_schema, "non-interacting reference");
        manifest.add("report.json", io::report_schema);
        manifest.write(out);
        return report.passed() ? 0 : 1;
    }

    const Geometry g = make_geometry(cfg);
    if (cfg.a.empty()) throw config_error("poles: at least one pole parameter --a is required");
    auto poles0 = build_real_initial(cfg.a, g);
    const double t_end = cfg.t_end ? *cfg.t_end : 9.0;
    const int samples = cfg.samples ? *cfg.samples : 181;
    std::vector<double> times(samples);
    for (int i = 0; i < samples; ++i) times[i] = t_end * i / (samples - 1);
    const IntegratorConfig ic = make_integrator_config(cfg);

    const std::string form = cfg.form ? *cfg.form : "backlund";
    json info;
    if (form == "backlund" || form == "both") {
        Trajectory tb = integrate(poles0, times, g, ic, FlowForm::backlund);
        io::write_trajectory_csv(out / "trajectory_backlund.csv", tb);
        io::write_json(out / "trajectory_backlund.json", io::trajectory_to_json(tb));
        manifest.add("trajectory_backlund.csv", io::trajectory_schema);
        manifest.add("trajectory_backlund.json", io::trajectory_schema);
        info["backlund_steps"] = tb.accepted_steps;
    }
    if (form == "newton" || form == "both") {
        Trajectory tn = integrate(poles0, times, g, ic, FlowForm::newton);
        io::write_trajectory_csv(out / "trajectory_newton.csv", tn);
        io::write_json(out / "trajectory_newton.json", io::trajectory_to_json(tn));
        manifest.add("trajectory_newton.csv", io::trajectory_schema);
        manifest.add("trajectory_newton.json", io::trajectory_schema);
        info["newton_steps"] = tn.accepted_steps;
    }
    io::write_json(out / "report.json",
                   {{"schema", io::report_schema}, {"id", "poles"}, {"info", info}});
    manifest.add("report.json", io::report_schema);
    manifest.write(out);
    std::printf("poles: wrote trajectories to %s\n", out.string().c_str());
    return 0;
}

int run_dispersion(const RunConfig& cfg) {
    if (!cfg.kind) throw config_error("dispersion: --kind is required");
    if (!cfg.delta) throw config_error("dispersion: --delta is required");
    if (cfg.k.empty()) throw config_error("dispersion: at least one --k value is required");
    DispersionKind kind;
    if (*cfg.kind == "kdv") kind = DispersionKind::kdv;
    else if (*cfg.kind == "bo") kind = DispersionKind::bo;
    else if (*cfg.kind == "ilw") kind = DispersionKind::ilw;
    else kind = DispersionKind::ncilw_coupling;

    std::vector<std::vector<double>> rows;
    for (double k : cfg.k) {
        const double om = dispersion(kind, k, *cfg.delta);
        std::printf("%s %s\n", io::format_full(k).c_str(), io::format_full(om).c_str());
        rows.push_back({k, om});
    }
    if (cfg.out_dir || std::getenv("NCILW_OUT")) {
        const fs::path out = resolve_out_dir(cfg, "dispersion");
        fs::create_directories(out);
        io::write_csv(out / "dispersion.csv", {"k", "omega"}, rows);
        io::Manifest manifest(cfg.to_json());
        manifest.add("dispersion.csv", "ncilw.dispersion.v1");
        manifest.write(out);
    }
    return 0;
}

int run_selftest(const RunConfig& cfg) {
    validation::IdentityConfig idc;
    validation::OperatorConfig opc;
    if (cfg.seed) {
        idc.seed = *cfg.seed;
        opc.seed = *cfg.seed;
    }
    const auto rep_id = validation::identity_suite(idc);
    const auto rep_op = validation::operator_suite(opc);
    const auto rep_cons = validation::conservation_suite();
    print_report(rep_id);
    print_report(rep_op);
    print_report(rep_cons);
    const bool ok = rep_id.passed() && rep_op.passed() && rep_cons.passed();
    if (cfg.out_dir || std::getenv("NCILW_OUT")) {
        const fs::path out = resolve_out_dir(cfg, "selftest");
        fs::create_directories(out);
        io::write_json(out / "identity_report.json", rep_id.to_json());
        io::write_json(out / "operator_report.json", rep_op.to_json());
        io::write_json(out / "conservation_report.json", rep_cons.to_json());
        io::Manifest manifest(cfg.to_json());
        manifest.add("identity_report.json", io::report_schema);
        manifest.add("operator_report.json", io::report_schema);
        manifest.add("conservation_report.json", io::report_schema);
        manifest.write(out);
    }
    std::printf("selftest: %s\n", ok ? "PASS" : "FAIL");
    return ok ? 0 : 1;
}

int dispatch(const RunConfig& cfg, bool fig3_flag);

int run_sweep(const RunConfig& cfg) {
    if (cfg.runs.empty()) throw config_error("sweep: config must contain a 'runs' array");
    const fs::path out = resolve_out_dir(cfg, "sweep");
    fs::create_directories(out);
    const int jobs = std::max(1, cfg.jobs ? *cfg.jobs : 1);

    std::vector<int> codes(cfg.runs.size(), 0);
    std::vector<RunConfig> subs(cfg.runs.size());
    for (std::size_t i = 0; i < cfg.runs.size(); ++i) {
        subs[i] = RunConfig::from_json(cfg.runs[i]);
        if (subs[i].mode == RunMode::sweep) throw config_error("sweep: nested sweeps");
        if (!subs[i].out_dir) {
            char name[32];
            std::snprintf(name, sizeof(name), "run_%03zu", i);
            subs[i].out_dir = (out / name).string();
        }
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= subs.size()) return;
            try {
                codes[i] = dispatch(subs[i], false);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "sweep run %zu failed: %s\n", i, e.what());
                codes[i] = 1;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    json summary;
    summary["schema"] = "ncilw.sweep.v1";
    summary["runs"] = json::array();
    int exit_code = 0;
    for (std::size_t i = 0; i < subs.size(); ++i) {
        summary["runs"].push_back({{"index", i},
                                   {"mode", to_string(subs[i].mode)},
                                   {"out_dir", *subs[i].out_dir},
                                   {"exit_code", codes[i]}});
        exit_code = std::max(exit_code, codes[i]);
    }
    io::write_json(out / "sweep_summary.json", summary);
    std::printf("sweep: %zu runs, exit %d\n", subs.size(), exit_code);
    return exit_code;
}

int dispatch(const RunConfig& cfg, bool fig3_flag) {
    switch (cfg.mode) {
        case RunMode::exact: return run_exact(cfg);
        case RunMode::simulate: return run_simulate(cfg, false);
        case RunMode::conserve: return run_simulate(cfg, true);
        case RunMode::compare: return run_compare(cfg);
        case RunMode::poles: return run_poles(cfg, fig3_flag);
        case RunMode::dispersion: return run_dispersion(cfg);
        case RunMode::selftest: return run_selftest(cfg);
        case RunMode::sweep: return run_sweep(cfg);
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ncilw: exact multisoliton solutions and a Fourier pseudospectral solver "
                 "for the nonchiral intermediate long-wave equation"};
    app.require_subcommand(1);

    RunConfig flags;
    std::string config_path;
    std::vector<std::string> a_literals;
    std::vector<double> t_list, k_list;
    bool fig3_flag = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        sub->add_option("--delta", flags.delta, "strip half-width / lattice parameter");
        sub->add_option("--lattice-L", flags.lattice_L,
                        "period of the elliptic lattice (selects the periodic kernels)");
        sub->add_option("--a", a_literals,
                        "pole parameter as a complex literal 're+imi' (repeatable)");
        sub->add_option("--out", flags.out_dir, "output directory (or NCILW_OUT)");
        sub->add_option("--prefix", flags.prefix, "artifact filename prefix");
        sub->add_option("--seed", flags.seed, "seed for randomized suites");
        sub->add_option("--rtol", flags.rtol, "pole integrator relative tolerance");
        sub->add_option("--atol", flags.atol, "pole integrator absolute tolerance");
        sub->add_option("--grid-L", flags.grid_L, "spatial period of the grid");
        sub->add_option("--grid-n", flags.grid_n, "half mode count N (2N grid points)");
        return sub;
    };
    auto add_solver = [&](CLI::App* sub) {
        sub->add_option("--dt", flags.dt, "time step");
        sub->add_option("--t-end", flags.t_end, "final time");
        sub->add_option("--scheme", flags.scheme, "ifrk4 | rk4");
        sub->add_option("--dealias", flags.dealias, "b4 | two-thirds");
        sub->add_option("--output-stride", flags.output_stride, "steps between snapshots");
    };

    auto* c_exact = add_common(app.add_subcommand("exact", "evaluate exact solutions"));
    c_exact->add_option("--t", t_list, "snapshot times (repeatable or comma list)")
        ->delimiter(',');

    auto* c_sim = add_common(app.add_subcommand("simulate", "run the spectral solver"));
    add_solver(c_sim);

    auto* c_cmp = add_common(
        app.add_subcommand("compare", "exact vs spectral solver on the two-soliton collision"));
    add_solver(c_cmp);
    c_cmp->add_option("--t0", flags.t0, "snapshot spacing");
    c_cmp->add_option("--snapshots", flags.n_snapshots, "number of snapshots");

    auto* c_poles = add_common(app.add_subcommand("poles", "integrate the CMS pole flow"));
    c_poles->add_option("--t-end", flags.t_end, "final time");
    c_poles->add_option("--samples", flags.samples, "number of output samples");
    c_poles->add_option("--form", flags.form, "backlund | newton | both");
    c_poles->add_flag("--fig3", fig3_flag,
                      "run the collision phenomenology experiment with verdicts");

    auto* c_cons = add_common(
        app.add_subcommand("conserve", "evolve and verify conserved-quantity drift"));
    add_solver(c_cons);

    auto* c_disp = add_common(app.add_subcommand("dispersion", "evaluate dispersion relations"));
    c_disp->add_option("--kind", flags.kind, "kdv | bo | ilw | ncilw-coupling");
    c_disp->add_option("--k", k_list, "wave numbers (repeatable or comma list)")->delimiter(',');

    auto* c_self = add_common(
        app.add_subcommand("selftest", "identity, operator and conservation suites"));
    (void)c_self;

    auto* c_sweep = app.add_subcommand("sweep", "fan out independent runs from a config file");
    c_sweep->add_option("--config", config_path, "JSON file with a 'runs' array")->required();
    c_sweep->add_option("--jobs", flags.jobs, "worker threads");
    c_sweep->add_option("--out", flags.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw config_error("cannot open config file " + config_path);
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                throw config_error(std::string("config parse error: ") + e.what());
            }
            cfg = RunConfig::from_json(j);
        }
        // merge flag overrides
        auto over = [](auto& dst, const auto& src) {
            if (src) dst = src;
        };
        over(cfg.delta, flags.delta);
        over(cfg.lattice_L, flags.lattice_L);
        over(cfg.t0, flags.t0);
        over(cfg.n_snapshots, flags.n_snapshots);
        over(cfg.t_end, flags.t_end);
        over(cfg.dt, flags.dt);
        over(cfg.grid_L, flags.grid_L);
        over(cfg.grid_n, flags.grid_n);
        over(cfg.scheme, flags.scheme);
        over(cfg.dealias, flags.dealias);
        over(cfg.output_stride, flags.output_stride);
        over(cfg.form, flags.form);
        over(cfg.rtol, flags.rtol);
        over(cfg.atol, flags.atol);
        over(cfg.kind, flags.kind);
        over(cfg.samples, flags.samples);
        over(cfg.seed, flags.seed);
        over(cfg.out_dir, flags.out_dir);
        over(cfg.prefix, flags.prefix);
        over(cfg.jobs, flags.jobs);
        if (!a_literals.empty()) {
            cfg.a.clear();
            for (const auto& s : a_literals) cfg.a.push_back(io::parse_complex(s));
        }
        if (!t_list.empty()) cfg.t = t_list;
        if (!k_list.empty()) cfg.k = k_list;

        const CLI::App* sub = app.get_subcommands().front();
        cfg.mode = run_mode_from_string(sub->get_name());
        cfg.validate();
        return dispatch(cfg, fig3_flag);
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
