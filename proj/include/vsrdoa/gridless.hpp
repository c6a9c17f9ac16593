#pragma once

// The two gridless estimators. Both reconstruct the snapshots onto the
// virtual uniform line array, recover a Hermitian Toeplitz covariance
// through one of the two semidefinite programs, and read bearings off a
// MUSIC spectrum evaluated on the reconstructed manifold.
//
//   estimate_vsr_anm_svd: reconstruct -> thin SVD -> keep the L dominant
//     weighted singular directions -> atomic-norm program -> R = Z Z^H
//   estimate_vsr_sce: reconstruct -> sample covariance -> structured
//     covariance fit -> R = T(u*)
//
// MUSIC and the peak picker are shared with the baseline estimators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vsrdoa/errors.hpp"
#include "vsrdoa/linalg.hpp"
#include "vsrdoa/scene.hpp"
#include "vsrdoa/sdp.hpp"
#include "vsrdoa/vsr.hpp"

namespace vsrdoa {

/// Regularization weight for the atomic-norm program,
/// 3 (T + log 3 + sqrt(2 T log 3)) sigma_n, natural logs by default.
/// Applied with the post-reduction column count L unless configured to use
/// the raw snapshot count.
inline double lambda_rule(std::size_t t_or_l, double sigma_n, bool use_log10 = false) {
    if (t_or_l < 1) throw InvalidInput("lambda_rule: count must be >= 1");
    if (!(sigma_n >= 0.0)) throw InvalidInput("lambda_rule: sigma_n must be >= 0");
    const double log3 = use_log10 ? std::log10(3.0) : std::log(3.0);
    const double t = static_cast<double>(t_or_l);
    return 3.0 * (t + log3 + std::sqrt(2.0 * t * log3)) * sigma_n;
}

/// Trace penalty for the structured covariance fit,
/// 2.5e-3 / ((log T)^2 log 3), natural logs by default.
inline double tau_rule(std::size_t t, bool use_log10 = false, double scale = 2.5e-3) {
    if (t < 2) throw InvalidInput("tau_rule: snapshot count must be >= 2");
    const double logt = use_log10 ? std::log10(static_cast<double>(t)) : std::log(static_cast<double>(t));
    const double log3 = use_log10 ? std::log10(3.0) : std::log(3.0);
    return scale / (logt * logt * log3);
}

enum class Manifold { Raw, Reconstructed };

struct SpatialSpectrum {
    std::vector<double> grid_deg;  // ascending
    std::vector<double> power;     // linear scale, non-negative, aligned to grid
    std::string method;
    bool subspace_ambiguous = false; // eigen-gap at the subspace split was degenerate
};

struct DoaEstimate {
    std::vector<double> angles_deg; // K angles, ascending
    SpatialSpectrum spectrum;
    bool converged = true;
    bool degenerate = false; // fewer than K true local maxima; padded from global maxima
};

/// Uniform angle grid [start, stop) with the given step.
inline std::vector<double> make_grid(double start_deg, double stop_deg, double step_deg) {
    if (!(step_deg > 0.0)) throw InvalidInput("grid: step must be positive");
    if (!(stop_deg > start_deg)) throw InvalidInput("grid: empty range");
    const double span = stop_deg - start_deg;
    const std::size_t count = static_cast<std::size_t>(std::llround(std::ceil(span / step_deg - 1e-9)));
    if (count == 0 || count > 10'000'000) throw InvalidInput("grid: size out of range");
    std::vector<double> g(count);
    for (std::size_t i = 0; i < count; ++i) g[i] = start_deg + static_cast<double>(i) * step_deg;
    return g;
}

/// Full-circle default: -180 to 179 inclusive at 1 degree.
inline std::vector<double> default_grid(double step_deg = 1.0) {
    return make_grid(-180.0, 180.0, step_deg);
}

/// Subspace spectrum P(theta) = 1 / ||E_n^H phi(theta)||^2 where E_n spans
/// the 3-K smallest-eigenvalue directions of R and phi is the selected
/// manifold. The degeneracy flag is set when the eigen-gap at the
/// noise/signal split is below 1e-12 relative to the largest eigenvalue, so
/// the flag (like the argmax) is invariant under positive scaling of R.
inline SpatialSpectrum music_spectrum(const ComplexMatrix& r, Manifold manifold, std::size_t k,
                                      const std::vector<double>& grid_deg) {
    if (r.rows() != 3 || r.cols() != 3) throw InvalidInput("music: covariance must be 3x3");
    if (k < 1 || k >= 3) throw InvalidInput("music: source count must be 1 or 2");
    if (grid_deg.empty()) throw InvalidInput("music: empty grid");

    const HermitianEig eig = hermitian_eig(r);
    const std::size_t noise_dim = 3 - k;
    const double lmax = std::max({std::abs(eig.eigenvalues[0]), std::abs(eig.eigenvalues[2]), 1e-300});

    SpatialSpectrum s;
    s.grid_deg = grid_deg;
    s.power.resize(grid_deg.size());
    s.method = manifold == Manifold::Raw ? "music" : "music-reconstructed";
    s.subspace_ambiguous = eig.eigenvalues[noise_dim] - eig.eigenvalues[noise_dim - 1] <= 1e-12 * lmax;

    for (std::size_t g = 0; g < grid_deg.size(); ++g) {
        const std::array<cxd, 3> phi = manifold == Manifold::Raw
                                           ? steering_raw(grid_deg[g])
                                           : steering_reconstructed(grid_deg[g]);
        double denom = 0.0;
        for (std::size_t j = 0; j < noise_dim; ++j) {
            cxd d{};
            for (std::size_t i = 0; i < 3; ++i) d += std::conj(eig.eigenvectors(i, j)) * phi[i];
            denom += std::norm(d);
        }
        s.power[g] = 1.0 / std::max(denom, 1e-300);
    }
    return s;
}

/// Strict local maxima of a spectrum; boundary points qualify against their
/// single neighbor. Returned as grid indices in ascending angle order.
inline std::vector<std::size_t> local_maxima(const SpatialSpectrum& s) {
    std::vector<std::size_t> idx;
    const std::size_t n = s.power.size();
    if (n == 1) return {0};
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = i == 0 || s.power[i] > s.power[i - 1];
        const bool right_ok = i + 1 == n || s.power[i] > s.power[i + 1];
        if (left_ok && right_ok) idx.push_back(i);
    }
    return idx;
}

struct PeakPick {
    std::vector<double> angles_deg; // ascending
    bool degenerate = false;
};

/// Positions of the K largest peaks: local maxima ranked by power descending
/// (angle ascending on ties), then the top K sorted by angle. When fewer
/// than K local maxima exist the result is padded from global-maximum grid
/// points (then remaining points by power) and marked degenerate.
inline PeakPick pick_peaks(const SpatialSpectrum& s, std::size_t k) {
    if (s.power.empty() || s.grid_deg.size() != s.power.size())
        throw InvalidInput("pick_peaks: empty or inconsistent spectrum");
    if (k < 1) throw InvalidInput("pick_peaks: k must be >= 1");

    const auto by_power_desc = [&](std::size_t a, std::size_t b) {
        if (s.power[a] != s.power[b]) return s.power[a] > s.power[b];
        return s.grid_deg[a] < s.grid_deg[b];
    };

    std::vector<std::size_t> ranked = local_maxima(s);
    std::sort(ranked.begin(), ranked.end(), by_power_desc);

    PeakPick out;
    if (ranked.size() < k) {
        out.degenerate = true;
        std::vector<char> taken(s.power.size(), 0);
        for (std::size_t i : ranked) taken[i] = 1;
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < s.power.size(); ++i)
            if (!taken[i]) rest.push_back(i);
        std::sort(rest.begin(), rest.end(), by_power_desc);
        ranked.insert(ranked.end(), rest.begin(), rest.end());
    }
    const std::size_t take = std::min(k, ranked.size());
    out.angles_deg.assign(take, 0.0);
    for (std::size_t i = 0; i < take; ++i) out.angles_deg[i] = s.grid_deg[ranked[i]];
    while (out.angles_deg.size() < k) {
        // grid smaller than k: repeat the strongest point
        out.angles_deg.push_back(s.grid_deg[ranked.front()]);
        out.degenerate = true;
    }
    std::sort(out.angles_deg.begin(), out.angles_deg.end());
    return out;
}

struct GridlessOptions {
    std::size_t svd_rank = 0;      // 0 means use K
    double n_norm = 3.0;           // the N in lambda / (2 sqrt(N))
    bool lambda_from_rule = false; // take lambda from lambda_rule() instead of sigma_n
    bool lambda_uses_snapshot_count = false; // use T instead of L in the lambda rule
    bool use_log10 = false;        // log base in the lambda/tau rules
    double tau_scale = 2.5e-3;     // numerator of the tau rule
    std::optional<double> sigma_n_override;  // skip the subspace noise estimate
    std::optional<double> lambda_override;
    std::optional<double> tau_override;
    SolverOptions solver;
};

namespace detail {

/// Subspace noise estimate: sqrt of the mean of the 3-K smallest
/// eigenvalues of the sample covariance (clamped at zero).
inline double estimate_sigma_n(const ComplexMatrix& sample_cov, std::size_t k) {
    const HermitianEig eig = hermitian_eig(sample_cov);
    double acc = 0.0;
    for (std::size_t i = 0; i < 3 - k; ++i) acc += std::max(eig.eigenvalues[i], 0.0);
    return std::sqrt(acc / static_cast<double>(3 - k));
}

inline void check_estimate_inputs(const SnapshotMatrix& x, std::size_t k) {
    if (x.rows() != 3) throw InvalidInput("estimate: expected 3 channel rows");
    if (k < 1 || k > 2) throw InvalidInput("estimate: source count must be 1 or 2");
    if (x.cols() < k) throw InvalidInput("estimate: need at least K snapshots");
    if (!x.is_finite()) throw InvalidInput("estimate: non-finite snapshots");
}

inline DoaEstimate read_out(const ComplexMatrix& r, std::size_t k, const std::vector<double>& grid,
                            const char* method, bool converged) {
    DoaEstimate est;
    est.spectrum = music_spectrum(r, Manifold::Reconstructed, k, grid);
    est.spectrum.method = method;
    PeakPick peaks = pick_peaks(est.spectrum, k);
    est.angles_deg = std::move(peaks.angles_deg);
    est.degenerate = peaks.degenerate;
    est.converged = converged;
    return est;
}

} // namespace detail

/// Gridless estimator via the atomic-norm program on SVD-reduced data.
inline DoaEstimate estimate_vsr_anm_svd(const SnapshotMatrix& x, std::size_t k,
                                        const std::vector<double>& grid_deg,
                                        const GridlessOptions& options = {}) {
    detail::check_estimate_inputs(x, k);
    const SnapshotMatrix y = reconstruct(x);

    const std::size_t l = std::min<std::size_t>(options.svd_rank == 0 ? k : options.svd_rank, 3);
    const ThinSvd svd = thin_svd(y);
    // Y_sv column j is s_j u_j: the data matrix projected onto its L
    // dominant right singular directions.
    ComplexMatrix y_sv(3, l);
    for (std::size_t j = 0; j < l; ++j)
        for (std::size_t i = 0; i < 3; ++i) y_sv(i, j) = svd.singular_values[j] * svd.u(i, j);

    double lambda;
    if (options.lambda_override) {
        lambda = *options.lambda_override;
    } else {
        const double sigma_n = options.sigma_n_override
                                   ? *options.sigma_n_override
                                   : detail::estimate_sigma_n(sample_covariance(y), k);
        if (options.lambda_from_rule) {
            const std::size_t count = options.lambda_uses_snapshot_count ? x.cols() : l;
            lambda = lambda_rule(count, sigma_n, options.use_log10);
        } else {
            // lambda_rule bounds the squared Frobenius noise norm, which
            // over-regularizes a 3-element array badly enough to merge
            // closely spaced sources. The estimated noise deviation sits in
            // the broad plateau where the MUSIC readout is insensitive to
            // the exact weight, so it is the default.
            lambda = sigma_n;
        }
    }
    // Keep the trace terms active on (near-)noise-free data: with lambda
    // exactly 0 the Toeplitz block is unconstrained above Z Z^H and the
    // minimizer is not unique.
    lambda = std::max(lambda, 1e-8 * (1.0 + y_sv.frobenius_norm()));

    AnmProblem problem;
    problem.y_sv = std::move(y_sv);
    problem.lambda = lambda;
    problem.n_norm = options.n_norm;
    const AnmSolution sol = solve_anm(problem, options.solver);

    ComplexMatrix r(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            cxd acc{};
            for (std::size_t t = 0; t < l; ++t) acc += sol.z(i, t) * std::conj(sol.z(j, t));
            r(i, j) = acc;
        }
    return detail::read_out(r, k, grid_deg, "vsr-anm-svd", sol.converged);
}

/// Gridless estimator via the structured covariance fit.
inline DoaEstimate estimate_vsr_sce(const SnapshotMatrix& x, std::size_t k,
                                    const std::vector<double>& grid_deg,
                                    const GridlessOptions& options = {}) {
    detail::check_estimate_inputs(x, k);
    const SnapshotMatrix y = reconstruct(x);

    SceProblem problem;
    problem.sigma = sample_covariance(y);
    problem.tau = options.tau_override ? *options.tau_override
                                       : tau_rule(x.cols(), options.use_log10, options.tau_scale);
    const SceSolution sol = solve_sce(problem, options.solver);
    return detail::read_out(toeplitz_embed(sol.u), k, grid_deg, "vsr-sce", sol.converged);
}

} // namespace vsrdoa
