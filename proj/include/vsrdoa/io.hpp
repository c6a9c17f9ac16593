#pragma once

// File formats: scenario / sweep-config JSON parsing (errors name the
// offending field), snapshot CSV in the fixed column order
// t,p_re,p_im,vx_re,vx_im,vy_re,vy_im, spectrum CSV (angle plus one column
// per method), sweep report JSON, and the run manifest written alongside
// every output. Doubles go through shortest round-trip formatting so a
// written file re-read reproduces the exact bits.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "vsrdoa/bench.hpp"
#include "vsrdoa/errors.hpp"
#include "vsrdoa/gridless.hpp"
#include "vsrdoa/scene.hpp"

namespace vsrdoa {

using Json = nlohmann::json;

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw InvalidInput(where + ": not a number: '" + std::string(s) + "'");
    return v;
}

namespace detail {

inline const Json& require_field(const Json& j, const std::string& object, const std::string& key) {
    const auto it = j.find(key);
    if (it == j.end()) throw InvalidInput(object + "." + key + ": missing");
    return *it;
}

inline double as_number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw InvalidInput(path + ": must be a number");
    return j.get<double>();
}

inline std::size_t as_count(const Json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<std::int64_t>() >= 0))
        throw InvalidInput(path + ": must be a non-negative integer");
    return j.get<std::size_t>();
}

inline std::vector<double> as_number_array(const Json& j, const std::string& path) {
    if (!j.is_array()) throw InvalidInput(path + ": must be an array of numbers");
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(as_number(e, path));
    return v;
}

} // namespace detail

inline Json scenario_to_json(const Scenario& sc) {
    return Json{{"source_angles_deg", sc.source_angles_deg},
                {"source_powers", sc.source_powers},
                {"snapshots", sc.snapshots},
                {"snr_db", sc.snr_db},
                {"seed", sc.seed},
                {"noise_model", sc.noise_model == NoiseModel::VectorSensor ? "vector-sensor" : "uniform"}};
}

/// Parses a scenario object. snr_db may be declared optional (sweep
/// templates override it per SNR grid point).
inline Scenario scenario_from_json(const Json& j, bool require_snr = true) {
    if (!j.is_object()) throw InvalidInput("scenario: must be a JSON object");
    Scenario sc;
    sc.source_angles_deg =
        detail::as_number_array(detail::require_field(j, "scenario", "source_angles_deg"),
                                "scenario.source_angles_deg");
    if (j.contains("source_powers"))
        sc.source_powers = detail::as_number_array(j["source_powers"], "scenario.source_powers");
    else
        sc.source_powers.assign(sc.source_angles_deg.size(), 1.0);
    sc.snapshots = detail::as_count(detail::require_field(j, "scenario", "snapshots"), "scenario.snapshots");
    if (j.contains("snr_db"))
        sc.snr_db = detail::as_number(j["snr_db"], "scenario.snr_db");
    else if (require_snr)
        throw InvalidInput("scenario.snr_db: missing");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw InvalidInput("scenario.seed: must be an integer");
        sc.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("noise_model")) {
        const std::string m = j["noise_model"].is_string() ? j["noise_model"].get<std::string>() : "";
        if (m == "vector-sensor")
            sc.noise_model = NoiseModel::VectorSensor;
        else if (m == "uniform")
            sc.noise_model = NoiseModel::Uniform;
        else
            throw InvalidInput("scenario.noise_model: must be 'vector-sensor' or 'uniform'");
    }
    sc.validate();
    return sc;
}

inline Json estimator_options_to_json(const EstimatorOptions& o) {
    Json j{{"svd_rank", o.gridless.svd_rank},
           {"n_norm", o.gridless.n_norm},
           {"lambda_from_rule", o.gridless.lambda_from_rule},
           {"lambda_uses_snapshot_count", o.gridless.lambda_uses_snapshot_count},
           {"use_log10", o.gridless.use_log10},
           {"tau_scale", o.gridless.tau_scale},
           {"iaa_iterations", o.iaa_iterations},
           {"spice_iterations", o.spice_iterations},
           {"solver_tolerance", o.gridless.solver.tolerance},
           {"solver_max_iterations", o.gridless.solver.max_iterations},
           {"solver_rho_init", o.gridless.solver.rho_init}};
    j["sigma_n"] = o.gridless.sigma_n_override ? Json(*o.gridless.sigma_n_override) : Json(nullptr);
    j["lambda"] = o.gridless.lambda_override ? Json(*o.gridless.lambda_override) : Json(nullptr);
    j["tau"] = o.gridless.tau_override ? Json(*o.gridless.tau_override) : Json(nullptr);
    return j;
}

inline EstimatorOptions estimator_options_from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) throw InvalidInput(path + ": must be a JSON object");
    EstimatorOptions o;
    if (j.contains("svd_rank")) o.gridless.svd_rank = detail::as_count(j["svd_rank"], path + ".svd_rank");
    if (j.contains("n_norm")) o.gridless.n_norm = detail::as_number(j["n_norm"], path + ".n_norm");
    if (j.contains("lambda_from_rule")) {
        if (!j["lambda_from_rule"].is_boolean())
            throw InvalidInput(path + ".lambda_from_rule: must be a boolean");
        o.gridless.lambda_from_rule = j["lambda_from_rule"].get<bool>();
    }
    if (j.contains("lambda_uses_snapshot_count")) {
        if (!j["lambda_uses_snapshot_count"].is_boolean())
            throw InvalidInput(path + ".lambda_uses_snapshot_count: must be a boolean");
        o.gridless.lambda_uses_snapshot_count = j["lambda_uses_snapshot_count"].get<bool>();
    }
    if (j.contains("use_log10")) {
        if (!j["use_log10"].is_boolean()) throw InvalidInput(path + ".use_log10: must be a boolean");
        o.gridless.use_log10 = j["use_log10"].get<bool>();
    }
    if (j.contains("tau_scale")) o.gridless.tau_scale = detail::as_number(j["tau_scale"], path + ".tau_scale");
    if (j.contains("iaa_iterations"))
        o.iaa_iterations = detail::as_count(j["iaa_iterations"], path + ".iaa_iterations");
    if (j.contains("spice_iterations"))
        o.spice_iterations = detail::as_count(j["spice_iterations"], path + ".spice_iterations");
    if (j.contains("solver_tolerance"))
        o.gridless.solver.tolerance = detail::as_number(j["solver_tolerance"], path + ".solver_tolerance");
    if (j.contains("solver_max_iterations"))
        o.gridless.solver.max_iterations =
            detail::as_count(j["solver_max_iterations"], path + ".solver_max_iterations");
    if (j.contains("solver_rho_init"))
        o.gridless.solver.rho_init = detail::as_number(j["solver_rho_init"], path + ".solver_rho_init");
    if (j.contains("sigma_n") && !j["sigma_n"].is_null())
        o.gridless.sigma_n_override = detail::as_number(j["sigma_n"], path + ".sigma_n");
    if (j.contains("lambda") && !j["lambda"].is_null())
        o.gridless.lambda_override = detail::as_number(j["lambda"], path + ".lambda");
    if (j.contains("tau") && !j["tau"].is_null())
        o.gridless.tau_override = detail::as_number(j["tau"], path + ".tau");
    return o;
}

inline Json sweep_config_to_json(const SweepConfig& c) {
    return Json{{"scenario", scenario_to_json(c.scenario)},
                {"snr_grid_db", c.snr_grid_db},
                {"trials", c.trials},
                {"methods", c.methods},
                {"resolution_threshold_deg", c.resolution_threshold_deg},
                {"grid_step_deg", c.grid_step_deg},
                {"options", estimator_options_to_json(c.options)}};
}

inline SweepConfig sweep_config_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidInput("sweep: must be a JSON object");
    SweepConfig c;
    c.scenario = scenario_from_json(detail::require_field(j, "sweep", "scenario"), false);
    c.snr_grid_db = detail::as_number_array(detail::require_field(j, "sweep", "snr_grid_db"),
                                            "sweep.snr_grid_db");
    if (j.contains("trials")) c.trials = detail::as_count(j["trials"], "sweep.trials");
    const Json& methods = detail::require_field(j, "sweep", "methods");
    if (!methods.is_array()) throw InvalidInput("sweep.methods: must be an array of strings");
    for (const auto& m : methods) {
        if (!m.is_string()) throw InvalidInput("sweep.methods: must be an array of strings");
        c.methods.push_back(m.get<std::string>());
    }
    if (j.contains("resolution_threshold_deg"))
        c.resolution_threshold_deg =
            detail::as_number(j["resolution_threshold_deg"], "sweep.resolution_threshold_deg");
    if (j.contains("grid_step_deg"))
        c.grid_step_deg = detail::as_number(j["grid_step_deg"], "sweep.grid_step_deg");
    if (j.contains("options")) c.options = estimator_options_from_json(j["options"], "sweep.options");
    c.validate();
    return c;
}

/// Report JSON. Runtime means are informational; exclude them (and the
/// schema carries that note) when comparing reports for determinism.
inline Json report_to_json(const SweepReport& r, bool include_runtime = true) {
    Json cells = Json::array();
    for (const auto& c : r.cells) {
        Json cell{{"method", c.method},
                  {"snr_db", c.snr_db},
                  {"rmse_deg", std::isfinite(c.rmse_deg) ? Json(c.rmse_deg) : Json(nullptr)},
                  {"resolution_probability", c.resolution_probability},
                  {"trials_total", c.trials_total},
                  {"trials_converged", c.trials_converged},
                  {"trials_resolved", c.trials_resolved}};
        if (include_runtime) cell["mean_runtime_ms"] = c.mean_runtime_ms;
        cells.push_back(std::move(cell));
    }
    return Json{{"base_seed", r.base_seed}, {"trials", r.trials}, {"cells", std::move(cells)}};
}

inline Json estimate_to_json(const DoaEstimate& est, const std::string& method, std::size_t k,
                             double runtime_ms) {
    return Json{{"method", method},
                {"k", k},
                {"angles_deg", est.angles_deg},
                {"converged", est.converged},
                {"degenerate", est.degenerate},
                {"runtime_ms", runtime_ms}};
}

// ---- CSV ----

inline constexpr const char* kSnapshotCsvHeader = "t,p_re,p_im,vx_re,vx_im,vy_re,vy_im";

inline std::string snapshots_to_csv(const SnapshotMatrix& x) {
    if (x.rows() != 3) throw InvalidInput("snapshots: expected 3 channel rows");
    std::string out = kSnapshotCsvHeader;
    out += '\n';
    for (std::size_t t = 0; t < x.cols(); ++t) {
        out += std::to_string(t);
        for (std::size_t i = 0; i < 3; ++i) {
            out += ',';
            out += format_double(x(i, t).real());
            out += ',';
            out += format_double(x(i, t).imag());
        }
        out += '\n';
    }
    return out;
}

inline SnapshotMatrix snapshots_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("data csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kSnapshotCsvHeader)
        throw InvalidInput(std::string("data csv: header must be '") + kSnapshotCsvHeader + "'");

    std::vector<std::array<double, 6>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<double, 6> vals{};
        std::size_t field = 0;
        std::size_t start = 0;
        const std::string where = "data csv line " + std::to_string(lineno);
        for (std::size_t pos = 0; pos <= line.size(); ++pos) {
            if (pos == line.size() || line[pos] == ',') {
                const std::string_view cell(line.data() + start, pos - start);
                if (field == 0) {
                    // index column; value unused beyond being numeric
                    parse_double(cell, where);
                } else if (field <= 6) {
                    vals[field - 1] = parse_double(cell, where);
                } else {
                    throw InvalidInput(where + ": expected 7 columns");
                }
                ++field;
                start = pos + 1;
            }
        }
        if (field != 7) throw InvalidInput(where + ": expected 7 columns");
        rows.push_back(vals);
    }
    if (rows.empty()) throw InvalidInput("data csv: no data rows");

    SnapshotMatrix x(3, rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t)
        for (std::size_t i = 0; i < 3; ++i) x(i, t) = cxd{rows[t][2 * i], rows[t][2 * i + 1]};
    return x;
}

/// Spectrum CSV: angle_deg first, one column per method. dB output is
/// normalized so each column peaks at 0 dB, with a -300 dB floor.
inline std::string spectra_to_csv(const std::vector<SpatialSpectrum>& spectra, bool emit_db = true) {
    if (spectra.empty()) throw InvalidInput("spectra: none to write");
    const std::vector<double>& grid = spectra.front().grid_deg;
    std::string out = "angle_deg";
    for (const auto& s : spectra) {
        if (s.grid_deg != grid) throw InvalidInput("spectra: grids differ between methods");
        if (s.power.size() != grid.size()) throw InvalidInput("spectra: power/grid length mismatch");
        out += ',';
        out += s.method;
    }
    out += '\n';
    std::vector<double> peak(spectra.size(), 0.0);
    for (std::size_t m = 0; m < spectra.size(); ++m)
        for (double p : spectra[m].power) peak[m] = std::max(peak[m], p);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        out += format_double(grid[g]);
        for (std::size_t m = 0; m < spectra.size(); ++m) {
            out += ',';
            if (emit_db) {
                const double ref = peak[m] > 0.0 ? peak[m] : 1.0;
                const double ratio = spectra[m].power[g] / ref;
                out += format_double(ratio > 1e-30 ? 10.0 * std::log10(ratio) : -300.0);
            } else {
                out += format_double(spectra[m].power[g]);
            }
        }
        out += '\n';
    }
    return out;
}

/// RMSE curves: snr_db, then one column per method (blank where undefined).
inline std::string sweep_rmse_csv(const SweepReport& r) {
    std::vector<std::string> methods;
    std::vector<double> snrs;
    for (const auto& c : r.cells) {
        if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
            methods.push_back(c.method);
        if (std::find(snrs.begin(), snrs.end(), c.snr_db) == snrs.end()) snrs.push_back(c.snr_db);
    }
    std::string out = "snr_db";
    for (const auto& m : methods) out += ",rmse_deg_" + m;
    out += '\n';
    for (double snr : snrs) {
        out += format_double(snr);
        for (const auto& m : methods) {
            out += ',';
            for (const auto& c : r.cells)
                if (c.method == m && c.snr_db == snr) {
                    if (std::isfinite(c.rmse_deg)) out += format_double(c.rmse_deg);
                    break;
                }
        }
        out += '\n';
    }
    return out;
}

inline std::string sweep_resolution_csv(const SweepReport& r) {
    std::vector<std::string> methods;
    std::vector<double> snrs;
    for (const auto& c : r.cells) {
        if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
            methods.push_back(c.method);
        if (std::find(snrs.begin(), snrs.end(), c.snr_db) == snrs.end()) snrs.push_back(c.snr_db);
    }
    std::string out = "snr_db";
    for (const auto& m : methods) out += ",resolution_probability_" + m;
    out += '\n';
    for (double snr : snrs) {
        out += format_double(snr);
        for (const auto& m : methods) {
            out += ',';
            for (const auto& c : r.cells)
                if (c.method == m && c.snr_db == snr) {
                    out += format_double(c.resolution_probability);
                    break;
                }
        }
        out += '\n';
    }
    return out;
}

// ---- files and manifests ----

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open for writing: " + path);
    f << content;
    if (!f) throw InvalidInput("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw InvalidInput("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline Json parse_json_file(const std::string& path) {
    const std::string text = read_text_file(path);
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw InvalidInput(path + ": malformed JSON");
    return j;
}

inline constexpr const char* kToolVersion = "vsrdoa 0.1.0";

struct RunManifest {
    std::string command;
    Json config;
    std::uint64_t base_seed = 0;
    std::vector<std::string> outputs;
};

inline std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Written alongside every output file: enough resolved configuration to
/// reproduce the outputs exactly (timestamp aside).
inline void write_manifest(const std::string& path, const RunManifest& m) {
    const Json j{{"tool_version", kToolVersion},
                 {"command", m.command},
                 {"config", m.config},
                 {"base_seed", m.base_seed},
                 {"timestamp_utc", utc_timestamp()},
                 {"outputs", m.outputs}};
    write_text_file(path, j.dump(2) + "\n");
}

} // namespace vsrdoa
