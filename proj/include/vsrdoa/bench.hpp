#pragma once

// Monte Carlo harness: spatial-spectrum comparisons on a single realization
// and RMSE / resolution-probability sweeps over an SNR grid.
//
// Determinism contract: trial t of a sweep draws its data from seed
// (base ^ t), every method inside a trial sees the same realization, and
// aggregation runs in a fixed order after all trials finish. The report is
// therefore bit-identical across repeated runs and across serial/parallel
// execution; mean runtimes are informational only and do not carry that
// guarantee.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "vsrdoa/baselines.hpp"
#include "vsrdoa/errors.hpp"
#include "vsrdoa/gridless.hpp"
#include "vsrdoa/rng.hpp"
#include "vsrdoa/scene.hpp"

namespace vsrdoa {

struct EstimatorOptions {
    GridlessOptions gridless;
    std::size_t iaa_iterations = 15;
    std::size_t spice_iterations = 50;
};

inline const std::vector<std::string>& method_ids() {
    static const std::vector<std::string> ids = {"cbf",   "mvdr",  "music",       "iaa",
                                                 "spice", "spice+", "vsr-anm-svd", "vsr-sce"};
    return ids;
}

inline bool is_valid_method(const std::string& id) {
    for (const auto& m : method_ids())
        if (m == id) return true;
    return false;
}

/// Runs one estimator on one snapshot block. Spectrum-only baselines are
/// read out with the shared peak picker.
inline DoaEstimate run_method(const std::string& id, const SnapshotMatrix& x, std::size_t k,
                              const std::vector<double>& grid_deg,
                              const EstimatorOptions& options = {}) {
    if (id == "vsr-anm-svd") return estimate_vsr_anm_svd(x, k, grid_deg, options.gridless);
    if (id == "vsr-sce") return estimate_vsr_sce(x, k, grid_deg, options.gridless);

    SpatialSpectrum s;
    if (id == "cbf") {
        s = cbf_spectrum(sample_covariance(x), grid_deg);
    } else if (id == "mvdr") {
        s = mvdr_spectrum(sample_covariance(x), grid_deg);
    } else if (id == "music") {
        s = music_raw(sample_covariance(x), k, grid_deg);
    } else if (id == "iaa") {
        s = iaa_spectrum(x, grid_deg, options.iaa_iterations);
    } else if (id == "spice") {
        s = spice_spectrum(x, grid_deg, SpiceVariant::Spice, options.spice_iterations);
    } else if (id == "spice+") {
        s = spice_spectrum(x, grid_deg, SpiceVariant::SpicePlus, options.spice_iterations);
    } else {
        throw InvalidInput("unknown method '" + id + "'");
    }
    DoaEstimate est;
    PeakPick peaks = pick_peaks(s, k);
    est.spectrum = std::move(s);
    est.angles_deg = std::move(peaks.angles_deg);
    est.degenerate = peaks.degenerate;
    est.converged = true;
    return est;
}

/// Wraps an angular difference into (-180, 180].
inline double wrap_angle_deg(double d) {
    double w = std::fmod(d + 180.0, 360.0);
    if (w < 0.0) w += 360.0;
    w -= 180.0;
    return w == -180.0 ? 180.0 : w;
}

/// Signed estimation errors after the minimum-total-squared-error assignment
/// of estimates to truths (both pairings compared for K = 2). Errors are
/// wrapped differences, ordered like `truths`.
inline std::vector<double> match_errors(const std::vector<double>& estimates,
                                        const std::vector<double>& truths) {
    if (estimates.size() != truths.size() || truths.empty() || truths.size() > 2)
        throw InvalidInput("match_errors: need matching K in {1, 2}");
    if (truths.size() == 1) return {wrap_angle_deg(estimates[0] - truths[0])};
    const double d00 = wrap_angle_deg(estimates[0] - truths[0]);
    const double d11 = wrap_angle_deg(estimates[1] - truths[1]);
    const double d01 = wrap_angle_deg(estimates[0] - truths[1]);
    const double d10 = wrap_angle_deg(estimates[1] - truths[0]);
    if (d00 * d00 + d11 * d11 <= d01 * d01 + d10 * d10) return {d00, d11};
    return {d10, d01};
}

/// RMSE over trials and sources, sqrt( sum of squared matched errors / (K Z) ).
inline double rmse(const std::vector<std::vector<double>>& estimates_per_trial,
                   const std::vector<double>& truths) {
    if (estimates_per_trial.empty()) throw InvalidInput("rmse: no trials");
    double acc = 0.0;
    for (const auto& est : estimates_per_trial) {
        if (est.size() != truths.size()) throw InvalidInput("rmse: estimate count mismatch");
        for (double e : match_errors(est, truths)) acc += e * e;
    }
    return std::sqrt(acc / (static_cast<double>(truths.size()) *
                            static_cast<double>(estimates_per_trial.size())));
}

/// Dual-source resolution event: the spectrum has at least two distinct
/// local maxima and both matched errors are within the threshold.
inline bool resolution_indicator(const DoaEstimate& estimate, const std::vector<double>& truths,
                                 double threshold_deg) {
    if (truths.size() != 2) throw InvalidInput("resolution_indicator: defined for K = 2");
    if (estimate.angles_deg.size() != 2) return false;
    if (local_maxima(estimate.spectrum).size() < 2) return false;
    for (double e : match_errors(estimate.angles_deg, truths))
        if (std::abs(e) > threshold_deg) return false;
    return true;
}

struct SweepConfig {
    Scenario scenario; // template; snr_db is overwritten per grid point
    std::vector<double> snr_grid_db;
    std::size_t trials = 100;
    std::vector<std::string> methods;
    double resolution_threshold_deg = 5.0;
    double grid_step_deg = 1.0;
    std::size_t jobs = 1; // 0 = hardware concurrency
    EstimatorOptions options;

    void validate() const {
        scenario.validate();
        if (snr_grid_db.empty()) throw InvalidInput("sweep.snr_grid_db: must be non-empty");
        for (double s : snr_grid_db)
            if (!std::isfinite(s)) throw InvalidInput("sweep.snr_grid_db: entries must be finite");
        if (trials < 1) throw InvalidInput("sweep.trials: must be >= 1");
        if (methods.empty()) throw InvalidInput("sweep.methods: must be non-empty");
        for (const auto& m : methods)
            if (!is_valid_method(m)) throw InvalidInput("sweep.methods: unknown method '" + m + "'");
        if (!(resolution_threshold_deg > 0.0))
            throw InvalidInput("sweep.resolution_threshold_deg: must be positive");
        if (!(grid_step_deg > 0.0)) throw InvalidInput("sweep.grid_step_deg: must be positive");
    }
};

struct SweepCell {
    std::string method;
    double snr_db = 0.0;
    double rmse_deg = std::numeric_limits<double>::quiet_NaN(); // NaN when nothing converged
    double resolution_probability = 0.0;
    std::size_t trials_total = 0;
    std::size_t trials_converged = 0;
    std::size_t trials_resolved = 0;
    double mean_runtime_ms = 0.0; // informational; not part of the determinism contract
};

struct SweepReport {
    std::uint64_t base_seed = 0;
    std::size_t trials = 0;
    std::vector<SweepCell> cells; // method-major, SNR in config order
};

namespace detail {

struct TrialOutcome {
    bool converged = false;
    bool resolved = false;
    double squared_error_sum = 0.0; // over matched sources; valid when converged
    double runtime_ms = 0.0;
};

} // namespace detail

/// Runs the full sweep: trials x SNR points x methods. Each trial draws its
/// data once (seed = base ^ trial index) and every method estimates from the
/// same realization, which pairs the method comparisons. Estimator failures
/// (numerical) mark the trial unconverged for that method; they stay in the
/// resolution denominator and leave RMSE to the converged trials.
inline SweepReport run_sweep(const SweepConfig& config) {
    config.validate();
    const std::size_t k = config.scenario.source_count();
    const std::vector<double> grid = default_grid(config.grid_step_deg);
    const std::vector<double>& truths = config.scenario.source_angles_deg;
    const std::size_t n_snr = config.snr_grid_db.size();
    const std::size_t n_methods = config.methods.size();
    const std::size_t n_trials = config.trials;

    // outcome[(snr_idx * n_trials + t) * n_methods + m]
    std::vector<detail::TrialOutcome> outcomes(n_snr * n_trials * n_methods);
    const std::size_t n_units = n_snr * n_trials;

    std::atomic<std::size_t> next_unit{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&]() {
        for (;;) {
            const std::size_t unit = next_unit.fetch_add(1);
            if (unit >= n_units) return;
            const std::size_t snr_idx = unit / n_trials;
            const std::size_t t = unit % n_trials;
            try {
                Scenario sc = config.scenario;
                sc.snr_db = config.snr_grid_db[snr_idx];
                sc.seed = trial_seed(config.scenario.seed, t);
                const SnapshotMatrix x = generate(sc);
                for (std::size_t m = 0; m < n_methods; ++m) {
                    detail::TrialOutcome& out = outcomes[unit * n_methods + m];
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        const DoaEstimate est = run_method(config.methods[m], x, k, grid, config.options);
                        out.converged = est.converged;
                        if (est.converged) {
                            double acc = 0.0;
                            for (double e : match_errors(est.angles_deg, truths)) acc += e * e;
                            out.squared_error_sum = acc;
                        }
                        if (k == 2) {
                            out.resolved = est.converged &&
                                           resolution_indicator(est, truths, config.resolution_threshold_deg);
                        } else {
                            // single-source variant: within threshold counts as resolved
                            out.resolved = est.converged &&
                                           std::abs(match_errors(est.angles_deg, truths)[0]) <=
                                               config.resolution_threshold_deg;
                        }
                    } catch (const NumericalFailure&) {
                        out.converged = false;
                    } catch (const SingularMatrix&) {
                        out.converged = false;
                    }
                    out.runtime_ms = std::chrono::duration<double, std::milli>(
                                         std::chrono::steady_clock::now() - t0)
                                         .count();
                }
            } catch (...) {
                const std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    std::size_t jobs = config.jobs == 0
                           ? std::max<std::size_t>(std::thread::hardware_concurrency(), 1)
                           : config.jobs;
    jobs = std::min(jobs, n_units);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);

    SweepReport report;
    report.base_seed = config.scenario.seed;
    report.trials = n_trials;
    report.cells.reserve(n_methods * n_snr);
    for (std::size_t m = 0; m < n_methods; ++m) {
        for (std::size_t snr_idx = 0; snr_idx < n_snr; ++snr_idx) {
            SweepCell cell;
            cell.method = config.methods[m];
            cell.snr_db = config.snr_grid_db[snr_idx];
            cell.trials_total = n_trials;
            double sq_acc = 0.0;
            double rt_acc = 0.0;
            for (std::size_t t = 0; t < n_trials; ++t) {
                const detail::TrialOutcome& out =
                    outcomes[(snr_idx * n_trials + t) * n_methods + m];
                if (out.converged) {
                    ++cell.trials_converged;
                    sq_acc += out.squared_error_sum;
                }
                if (out.resolved) ++cell.trials_resolved;
                rt_acc += out.runtime_ms;
            }
            if (cell.trials_converged > 0)
                cell.rmse_deg = std::sqrt(sq_acc / (static_cast<double>(k) *
                                                    static_cast<double>(cell.trials_converged)));
            cell.resolution_probability =
                static_cast<double>(cell.trials_resolved) / static_cast<double>(n_trials);
            cell.mean_runtime_ms = rt_acc / static_cast<double>(n_trials);
            report.cells.push_back(std::move(cell));
        }
    }
    return report;
}

/// One seeded realization, every method's spectrum, each normalized to a
/// unit peak so the plots are comparable.
inline std::vector<SpatialSpectrum> run_spectrum_experiment(const Scenario& scenario,
                                                            const std::vector<std::string>& methods,
                                                            const std::vector<double>& grid_deg,
                                                            const EstimatorOptions& options = {}) {
    scenario.validate();
    if (methods.empty()) throw InvalidInput("spectrum experiment: no methods");
    for (const auto& m : methods)
        if (!is_valid_method(m)) throw InvalidInput("spectrum experiment: unknown method '" + m + "'");
    const SnapshotMatrix x = generate(scenario);
    const std::size_t k = scenario.source_count();

    std::vector<SpatialSpectrum> spectra;
    spectra.reserve(methods.size());
    for (const auto& id : methods) {
        SpatialSpectrum s = run_method(id, x, k, grid_deg, options).spectrum;
        double peak = 0.0;
        for (double p : s.power) peak = std::max(peak, p);
        if (peak > 0.0)
            for (double& p : s.power) p /= peak;
        spectra.push_back(std::move(s));
    }
    return spectra;
}

} // namespace vsrdoa
