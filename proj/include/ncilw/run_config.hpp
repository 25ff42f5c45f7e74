#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncilw/io.hpp"

namespace ncilw {

enum class RunMode { exact, simulate, compare, poles, conserve, dispersion, selftest, sweep };

inline std::string to_string(RunMode m) {
    switch (m) {
        case RunMode::exact: return "exact";
        case RunMode::simulate: return "simulate";
        case RunMode::compare: return "compare";
        case RunMode::poles: return "poles";
        case RunMode::conserve: return "conserve";
        case RunMode::dispersion: return "dispersion";
        case RunMode::selftest: return "selftest";
        case RunMode::sweep: return "sweep";
    }
    return "?";
}

inline RunMode run_mode_from_string(const std::string& s) {
    for (RunMode m : {RunMode::exact, RunMode::simulate, RunMode::compare, RunMode::poles,
                      RunMode::conserve, RunMode::dispersion, RunMode::selftest, RunMode::sweep})
        if (to_string(m) == s) return m;
    throw config_error("unknown mode '" + s + "'");
}

/// Flat, documented run configuration. Optional fields are absent unless set;
/// serialization echoes exactly the present fields, so parse/serialize round
/// trips are lossless.
struct RunConfig {
    RunMode mode = RunMode::selftest;
    std::optional<double> delta;
    std::optional<double> lattice_L; // presence selects the elliptic kernels
    std::vector<cplx> a;
    std::vector<double> t;
    std::optional<double> t0;
    std::optional<int> n_snapshots;
    std::optional<double> t_end;
    std::optional<double> dt;
    std::optional<double> grid_L;
    std::optional<int> grid_n; // half count N; the grid has 2N points
    std::optional<std::string> scheme;  // "ifrk4" | "rk4"
    std::optional<std::string> dealias; // "b4" | "two-thirds"
    std::optional<long> output_stride;
    std::optional<std::string> form; // "backlund" | "newton" | "both"
    std::optional<double> rtol, atol;
    std::optional<std::string> kind; // dispersion: "kdv"|"bo"|"ilw"|"ncilw-coupling"
    std::vector<double> k;
    std::optional<int> samples;
    std::optional<unsigned> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> prefix;
    std::optional<int> jobs;
    io::json tol = io::json::object(); // named tolerance overrides
    std::vector<io::json> runs;        // sweep sub-configurations

    io::json to_json() const {
        io::json j;
        j["mode"] = to_string(mode);
        auto put = [&](const char* key, const auto& opt) {
            if (opt) j[key] = *opt;
        };
        put("delta", delta);
        put("lattice_L", lattice_L);
        if (!a.empty()) {
            j["a"] = io::json::array();
            for (const cplx& z : a) j["a"].push_back(io::format_complex(z));
        }
        if (!t.empty()) j["t"] = t;
        put("t0", t0);
        put("n_snapshots", n_snapshots);
        put("t_end", t_end);
        put("dt", dt);
        put("grid_L", grid_L);
        put("grid_n", grid_n);
        put("scheme", scheme);
        put("dealias", dealias);
        put("output_stride", output_stride);
        put("form", form);
        put("rtol", rtol);
        put("atol", atol);
        put("kind", kind);
        if (!k.empty()) j["k"] = k;
        put("samples", samples);
        put("seed", seed);
        put("out_dir", out_dir);
        put("prefix", prefix);
        put("jobs", jobs);
        if (!tol.empty()) j["tol"] = tol;
        if (!runs.empty()) j["runs"] = runs;
        return j;
    }

    static RunConfig from_json(const io::json& j) {
        RunConfig c;
        if (!j.is_object()) throw config_error("config must be a JSON object");
        for (const auto& [key, value] : j.items()) {
            try {
                if (key == "mode") c.mode = run_mode_from_string(value.get<std::string>());
                else if (key == "delta") c.delta = value.get<double>();
                else if (key == "lattice_L") c.lattice_L = value.get<double>();
                else if (key == "a")
                    for (const auto& s : value) c.a.push_back(io::parse_complex(s.get<std::string>()));
                else if (key == "t") c.t = value.get<std::vector<double>>();
                else if (key == "t0") c.t0 = value.get<double>();
                else if (key == "n_snapshots") c.n_snapshots = value.get<int>();
                else if (key == "t_end") c.t_end = value.get<double>();
                else if (key == "dt") c.dt = value.get<double>();
                else if (key == "grid_L") c.grid_L = value.get<double>();
                else if (key == "grid_n") c.grid_n = value.get<int>();
                else if (key == "scheme") c.scheme = value.get<std::string>();
                else if (key == "dealias") c.dealias = value.get<std::string>();
                else if (key == "output_stride") c.output_stride = value.get<long>();
                else if (key == "form") c.form = value.get<std::string>();
                else if (key == "rtol") c.rtol = value.get<double>();
                else if (key == "atol") c.atol = value.get<double>();
                else if (key == "kind") c.kind = value.get<std::string>();
                else if (key == "k") c.k = value.get<std::vector<double>>();
                else if (key == "samples") c.samples = value.get<int>();
                else if (key == "seed") c.seed = value.get<unsigned>();
                else if (key == "out_dir") c.out_dir = value.get<std::string>();
                else if (key == "prefix") c.prefix = value.get<std::string>();
                else if (key == "jobs") c.jobs = value.get<int>();
                else if (key == "tol") c.tol = value;
                else if (key == "runs") c.runs = value.get<std::vector<io::json>>();
                else throw config_error("unknown config key '" + key + "'");
            } catch (const io::json::exception& e) {
                throw config_error("config field '" + key + "': " + e.what());
            }
        }
        c.validate();
        return c;
    }

    /// Physical constraints checked at parse time.
    void validate() const {
        if (delta && !(*delta > 0.0)) throw config_error("delta must be positive");
        if (lattice_L && !(*lattice_L > 0.0)) throw config_error("lattice_L must be positive");
        if (grid_n) {
            if (*grid_n < 1 || (*grid_n & (*grid_n - 1)) != 0)
                throw config_error("grid_n must be a positive power of two (2N grid points)");
        }
        if (dt && !(*dt > 0.0)) throw config_error("dt must be positive");
        if (t_end && !(*t_end >= 0.0)) throw config_error("t_end must be nonnegative");
        if (rtol && !(*rtol > 0.0)) throw config_error("rtol must be positive");
        if (atol && !(*atol > 0.0)) throw config_error("atol must be positive");
        if (delta && !a.empty()) {
            for (std::size_t i = 0; i < a.size(); ++i)
                if (!(a[i].imag() > *delta / 2.0 && a[i].imag() < 1.5 * *delta))
                    throw config_error("a[" + std::to_string(i) +
                                       "]: Im a must lie in (delta/2, 3 delta/2)");
        }
        if (scheme && *scheme != "ifrk4" && *scheme != "rk4")
            throw config_error("scheme must be 'ifrk4' or 'rk4'");
        if (dealias && *dealias != "b4" && *dealias != "two-thirds")
            throw config_error("dealias must be 'b4' or 'two-thirds'");
        if (form && *form != "backlund" && *form != "newton" && *form != "both")
            throw config_error("form must be 'backlund', 'newton' or 'both'");
        if (kind && *kind != "kdv" && *kind != "bo" && *kind != "ilw" &&
            *kind != "ncilw-coupling")
            throw config_error("kind must be one of kdv, bo, ilw, ncilw-coupling");
    }
};

} // namespace ncilw
