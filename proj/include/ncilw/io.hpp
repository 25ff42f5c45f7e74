#pragma once

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncilw/cms_dynamics.hpp"
#include "ncilw/errors.hpp"
#include "ncilw/grid.hpp"
#include "ncilw/poles.hpp"
#include "ncilw/spectral_solver.hpp"

namespace ncilw::io {

using json = nlohmann::json;

/// Shortest round-trip decimal form of a double.
inline std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

/// Complex literal "a+bi" (canonical form used in configs and manifests).
inline std::string format_complex(cplx z) {
    std::string s = format_full(z.real());
    s += (z.imag() < 0.0 || std::signbit(z.imag())) ? "-" : "+";
    s += format_full(std::abs(z.imag()));
    s += "i";
    return s;
}

namespace detail {

inline double parse_double(const std::string& s) {
    if (s.empty()) throw config_error("empty number in complex literal");
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw config_error("malformed number '" + s + "' in complex literal");
    return v;
}

} // namespace detail

/// Parses "a+bi" with optional whitespace; pure-real ("2.5"), pure-imaginary
/// ("1.2i", "i", "-i") and exponent forms ("1e-3-2.5e+2i") are accepted.
inline cplx parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s += c;
    if (s.empty()) throw config_error("empty complex literal");

    if (s.back() != 'i' && s.back() != 'I') return {detail::parse_double(s), 0.0};

    s.pop_back(); // strip the trailing i
    // split point: the last +/- that is not an exponent sign and not leading
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    if (split == std::string::npos) {
        if (s.empty() || s == "+") return {0.0, 1.0};
        if (s == "-") return {0.0, -1.0};
        return {0.0, detail::parse_double(s)};
    }
    const std::string re = s.substr(0, split);
    std::string im = s.substr(split);
    if (im == "+") im = "1";
    if (im == "-") im = "-1";
    return {detail::parse_double(re), detail::parse_double(im)};
}

// ---------------------------------------------------------------------------
// CSV / JSON artifact writers. Numeric fields carry full round-trip
// precision; data files contain no timestamps so reruns overwrite
// identically (the manifest carries the timestamp).
// ---------------------------------------------------------------------------

inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path.string() + " for writing");
    for (std::size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << format_full(row[i]) << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
}

inline constexpr const char* fieldpair_schema = "ncilw.fieldpair.v1";
inline constexpr const char* trajectory_schema = "ncilw.trajectory.v1";
inline constexpr const char* diagnostics_schema = "ncilw.diagnostics.v1";
inline constexpr const char* report_schema = "ncilw.report.v1";

inline void write_field_csv(const std::filesystem::path& path, const FieldPair& f) {
    std::vector<std::vector<double>> rows;
    rows.reserve(f.grid.size());
    for (int i = 0; i < f.grid.size(); ++i)
        rows.push_back({f.grid.x(i), f.u[i], f.v[i]});
    write_csv(path, {"x", "u", "v"}, rows);
}

inline json field_to_json(const FieldPair& f) {
    json j;
    j["schema"] = fieldpair_schema;
    j["time"] = f.time;
    j["L"] = f.grid.L;
    j["x"] = json::array();
    j["u"] = json::array();
    j["v"] = json::array();
    for (int i = 0; i < f.grid.size(); ++i) {
        j["x"].push_back(f.grid.x(i));
        j["u"].push_back(f.u[i]);
        j["v"].push_back(f.v[i]);
    }
    return j;
}

/// Trajectory CSV: t, Re z_j, Im z_j (j = 1..N), Re w_j, Im w_j (j = 1..M).
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::vector<std::string> header{"t"};
    const std::size_t nz = traj.states.empty() ? 0 : traj.states.front().n_z();
    const std::size_t nw = traj.states.empty() ? 0 : traj.states.front().n_w();
    for (std::size_t j = 0; j < nz; ++j) {
        header.push_back("re_z" + std::to_string(j + 1));
        header.push_back("im_z" + std::to_string(j + 1));
    }
    for (std::size_t j = 0; j < nw; ++j) {
        header.push_back("re_w" + std::to_string(j + 1));
        header.push_back("im_w" + std::to_string(j + 1));
    }
    std::vector<std::vector<double>> rows;
    rows.reserve(traj.times.size());
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::vector<double> row{traj.times[i]};
        for (std::size_t j = 0; j < nz; ++j) {
            row.push_back(traj.states[i].z[j].real());
            row.push_back(traj.states[i].z[j].imag());
        }
        for (std::size_t j = 0; j < nw; ++j) {
            row.push_back(traj.states[i].w[j].real());
            row.push_back(traj.states[i].w[j].imag());
        }
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

inline json trajectory_to_json(const Trajectory& traj) {
    json j;
    j["schema"] = trajectory_schema;
    j["t"] = traj.times;
    auto fam = [&](auto member) {
        json arr = json::array();
        for (const auto& st : traj.states) {
            json row = json::array();
            for (const cplx& p : st.*member) row.push_back({p.real(), p.imag()});
            arr.push_back(row);
        }
        return arr;
    };
    j["z"] = fam(&PoleConfiguration::z);
    j["w"] = fam(&PoleConfiguration::w);
    return j;
}

inline void write_diagnostics_csv(const std::filesystem::path& path,
                                  const std::vector<DiagnosticsRow>& rows) {
    std::vector<std::vector<double>> data;
    data.reserve(rows.size());
    for (const auto& r : rows) data.push_back({r.t, r.i1, r.i2, r.i3, r.max_u, r.max_v});
    write_csv(path, {"t", "I1", "I2", "I3", "max_u", "max_v"}, data);
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

class Manifest {
public:
    explicit Manifest(json resolved_config) : config_(std::move(resolved_config)) {}

    void add(const std::string& name, const std::string& schema,
             const std::string& description = "") {
        files_.push_back({{"name", name}, {"schema", schema}, {"description", description}});
    }

    void write(const std::filesystem::path& dir) const {
        json j;
        j["schema"] = "ncilw.manifest.v1";
        j["generated_at"] = timestamp();
        j["config"] = config_;
        j["files"] = files_;
        write_json(dir / "manifest.json", j);
    }

private:
    static std::string timestamp() {
        const std::time_t now = std::time(nullptr);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&now));
        return buf;
    }

    json config_;
    json files_ = json::array();
};

} // namespace ncilw::io
