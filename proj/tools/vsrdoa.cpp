// Command-line surface: scenario simulation, single-shot estimation and
// spectra, and Monte Carlo sweeps. Outputs are plain CSV/JSON plus a
// manifest carrying the resolved configuration, so every file can be
// reproduced exactly. Exit codes: 0 success, 2 usage/validation error,
// 3 numerical failure.

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vsrdoa/vsrdoa.hpp"

namespace {

using namespace vsrdoa;

std::optional<std::uint64_t> env_seed_override() {
    const char* s = std::getenv("VSRDOA_SEED");
    if (s == nullptr || *s == '\0') return std::nullopt;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s, &end, 10);
    if (errno != 0 || end == s || *end != '\0')
        throw InvalidInput("VSRDOA_SEED: must be an unsigned integer, got '" + std::string(s) + "'");
    return static_cast<std::uint64_t>(v);
}

std::string method_list() {
    std::string out;
    for (const auto& m : method_ids()) {
        if (!out.empty()) out += ", ";
        out += m;
    }
    return out;
}

void require_known_method(const std::string& id) {
    if (!is_valid_method(id))
        throw InvalidInput("unknown method '" + id + "'; valid methods: " + method_list());
}

struct EstimateArgs {
    std::string data_path;
    std::string scenario_path;
    std::vector<std::string> methods;
    std::size_t k = 0; // 0: take the scenario's source count
    double grid_step = 1.0;
    bool emit_linear = false;
    std::string out_spectrum = "spectrum.csv";
    std::string out_estimate = "estimate.json";
    EstimatorOptions options;
    // optional overrides staged here until we know the flag was given
    double tau = 0.0, lambda = 0.0, sigma_n = 0.0;
};

void add_estimator_flags(CLI::App* cmd, EstimateArgs& a) {
    cmd->add_option("--grid-step", a.grid_step, "Search grid step in degrees")->capture_default_str();
    cmd->add_flag("--emit-linear", a.emit_linear, "Write linear power instead of peak-normalized dB");
    cmd->add_option("--svd-rank", a.options.gridless.svd_rank,
                    "Columns kept after SVD reduction (0: use K)");
    cmd->add_option("--n-norm", a.options.gridless.n_norm, "The N in lambda/(2 sqrt(N))")
        ->capture_default_str();
    cmd->add_flag("--lambda-from-rule", a.options.gridless.lambda_from_rule,
                  "Set lambda from the analytic noise-norm rule instead of the noise deviation");
    cmd->add_flag("--lambda-use-snapshots", a.options.gridless.lambda_uses_snapshot_count,
                  "Apply the lambda rule with the snapshot count T instead of L");
    cmd->add_flag("--log10", a.options.gridless.use_log10,
                  "Use base-10 logs in the lambda/tau rules (default natural)");
    cmd->add_option("--tau-scale", a.options.gridless.tau_scale, "Numerator of the tau rule")
        ->capture_default_str();
    cmd->add_option("--tau", a.tau, "Override the tau rule with a fixed value");
    cmd->add_option("--lambda", a.lambda, "Override the lambda rule with a fixed value");
    cmd->add_option("--sigma-n", a.sigma_n, "Noise standard deviation for the lambda rule");
    cmd->add_option("--iaa-iters", a.options.iaa_iterations, "IAA iteration count")
        ->capture_default_str();
    cmd->add_option("--spice-iters", a.options.spice_iterations, "SPICE iteration count")
        ->capture_default_str();
    cmd->add_option("--solver-tol", a.options.gridless.solver.tolerance,
                    "Relative residual tolerance of the SDP solver")
        ->capture_default_str();
    cmd->add_option("--solver-max-iter", a.options.gridless.solver.max_iterations,
                    "Iteration cap of the SDP solver")
        ->capture_default_str();
    cmd->add_option("--rho-init", a.options.gridless.solver.rho_init,
                    "Initial penalty parameter of the SDP solver")
        ->capture_default_str();
}

void resolve_optional_overrides(const CLI::App* cmd, EstimateArgs& a) {
    if (cmd->count("--tau") > 0) a.options.gridless.tau_override = a.tau;
    if (cmd->count("--lambda") > 0) a.options.gridless.lambda_override = a.lambda;
    if (cmd->count("--sigma-n") > 0) a.options.gridless.sigma_n_override = a.sigma_n;
}

struct LoadedData {
    SnapshotMatrix x;
    std::size_t k = 0;
    Json source; // manifest record of where the data came from
};

LoadedData load_estimate_data(const EstimateArgs& a) {
    if (a.data_path.empty() == a.scenario_path.empty())
        throw InvalidInput("exactly one of --data and --scenario is required");
    LoadedData d;
    if (!a.data_path.empty()) {
        d.x = snapshots_from_csv(read_text_file(a.data_path));
        if (a.k == 0) throw InvalidInput("--k is required with --data");
        d.k = a.k;
        d.source = Json{{"data", a.data_path}};
    } else {
        Scenario sc = scenario_from_json(parse_json_file(a.scenario_path));
        if (const auto seed = env_seed_override()) sc.seed = *seed;
        d.x = generate(sc);
        d.k = a.k == 0 ? sc.source_count() : a.k;
        d.source = Json{{"scenario", scenario_to_json(sc)}};
    }
    return d;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_path) {
    Scenario sc = scenario_from_json(parse_json_file(scenario_path));
    if (const auto seed = env_seed_override()) sc.seed = *seed;
    const SnapshotMatrix x = generate(sc);
    write_text_file(out_path, snapshots_to_csv(x));

    RunManifest m;
    m.command = "simulate";
    m.config = Json{{"scenario", scenario_to_json(sc)}};
    m.base_seed = sc.seed;
    m.outputs = {out_path};
    write_manifest(out_path + ".manifest.json", m);
    return 0;
}

int cmd_estimate(const CLI::App* cmd, EstimateArgs& a, bool spectrum_only) {
    resolve_optional_overrides(cmd, a);
    for (const auto& id : a.methods) require_known_method(id);
    const LoadedData d = load_estimate_data(a);
    const std::vector<double> grid = default_grid(a.grid_step);

    std::vector<SpatialSpectrum> spectra;
    Json estimates = Json::array();
    for (const auto& id : a.methods) {
        const auto t0 = std::chrono::steady_clock::now();
        DoaEstimate est = run_method(id, d.x, d.k, grid, a.options);
        const double runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        estimates.push_back(estimate_to_json(est, id, d.k, runtime_ms));
        spectra.push_back(std::move(est.spectrum));
    }
    write_text_file(a.out_spectrum, spectra_to_csv(spectra, !a.emit_linear));

    std::vector<std::string> outputs = {a.out_spectrum};
    if (!spectrum_only) {
        const Json record = a.methods.size() == 1 ? estimates.front() : estimates;
        write_text_file(a.out_estimate, record.dump(2) + "\n");
        outputs.push_back(a.out_estimate);
    }

    RunManifest m;
    m.command = spectrum_only ? "spectrum" : "estimate";
    m.config = Json{{"input", d.source},
                    {"methods", a.methods},
                    {"k", d.k},
                    {"grid_step_deg", a.grid_step},
                    {"emit_db", !a.emit_linear},
                    {"options", estimator_options_to_json(a.options)}};
    if (d.source.contains("scenario")) m.base_seed = d.source["scenario"]["seed"].get<std::uint64_t>();
    m.outputs = outputs;
    write_manifest(outputs.front() + ".manifest.json", m);
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_path, std::size_t jobs,
              const std::string& csv_prefix) {
    SweepConfig config = sweep_config_from_json(parse_json_file(config_path));
    if (const auto seed = env_seed_override()) config.scenario.seed = *seed;
    config.jobs = jobs;
    const SweepReport report = run_sweep(config);
    write_text_file(out_path, report_to_json(report).dump(2) + "\n");

    std::string prefix = csv_prefix;
    if (prefix.empty()) {
        prefix = out_path;
        const auto dot = prefix.rfind('.');
        const auto slash = prefix.find_last_of('/');
        if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
            prefix.resize(dot);
    }

    std::vector<std::string> outputs = {out_path};
    const std::string rmse_path = prefix + "_rmse.csv";
    const std::string res_path = prefix + "_resolution.csv";
    write_text_file(rmse_path, sweep_rmse_csv(report));
    write_text_file(res_path, sweep_resolution_csv(report));
    outputs.push_back(rmse_path);
    outputs.push_back(res_path);

    RunManifest m;
    m.command = "sweep";
    m.config = sweep_config_to_json(config);
    m.base_seed = config.scenario.seed;
    m.outputs = outputs;
    write_manifest(out_path + ".manifest.json", m);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gridless sparse DOA estimation with a single 2-D acoustic vector hydrophone"};
    app.set_version_flag("--version", std::string(vsrdoa::kToolVersion));
    app.require_subcommand(1);

    std::string sim_scenario, sim_out = "data.csv";
    CLI::App* sim = app.add_subcommand("simulate", "Generate snapshot data from a scenario file");
    sim->add_option("scenario", sim_scenario, "Scenario JSON file")->required();
    sim->add_option("--out", sim_out, "Output CSV path")->capture_default_str();

    EstimateArgs est_args;
    CLI::App* est = app.add_subcommand("estimate", "Estimate bearings and write spectrum + estimate");
    est->add_option("--data", est_args.data_path, "Snapshot CSV (from simulate)");
    est->add_option("--scenario", est_args.scenario_path, "Scenario JSON to simulate in-process");
    est->add_option("--method", est_args.methods, "Estimator id (" + method_list() + ")")
        ->required()
        ->expected(1);
    est->add_option("--k", est_args.k, "Source count (default: scenario's)");
    est->add_option("--out-spectrum", est_args.out_spectrum, "Spectrum CSV path")->capture_default_str();
    est->add_option("--out-estimate", est_args.out_estimate, "Estimate JSON path")->capture_default_str();
    add_estimator_flags(est, est_args);

    EstimateArgs spec_args;
    CLI::App* spec = app.add_subcommand("spectrum", "Write spatial spectra only (methods repeatable)");
    spec->add_option("--data", spec_args.data_path, "Snapshot CSV (from simulate)");
    spec->add_option("--scenario", spec_args.scenario_path, "Scenario JSON to simulate in-process");
    spec->add_option("--method", spec_args.methods, "Estimator id(s) (" + method_list() + ")")
        ->required();
    spec->add_option("--k", spec_args.k, "Source count (default: scenario's)");
    spec->add_option("--out", spec_args.out_spectrum, "Spectrum CSV path")->capture_default_str();
    add_estimator_flags(spec, spec_args);

    std::string sweep_config, sweep_out = "report.json", sweep_csv_prefix;
    std::size_t sweep_jobs = 0;
    CLI::App* swp = app.add_subcommand("sweep", "Run a Monte Carlo sweep from a config file");
    swp->add_option("config", sweep_config, "Sweep config JSON file")->required();
    swp->add_option("--out", sweep_out, "Report JSON path")->capture_default_str();
    swp->add_option("--jobs", sweep_jobs, "Worker threads (0: all hardware threads)")
        ->capture_default_str();
    swp->add_option("--csv-prefix", sweep_csv_prefix,
                    "Prefix for <prefix>_rmse.csv and <prefix>_resolution.csv "
                    "(default: --out without extension)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_scenario, sim_out);
        if (est->parsed()) return cmd_estimate(est, est_args, false);
        if (spec->parsed()) return cmd_estimate(spec, spec_args, true);
        if (swp->parsed()) return cmd_sweep(sweep_config, sweep_out, sweep_jobs, sweep_csv_prefix);
        std::cerr << "no subcommand selected\n";
        return 2;
    } catch (const vsrdoa::InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const vsrdoa::NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const vsrdoa::SingularMatrix& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
