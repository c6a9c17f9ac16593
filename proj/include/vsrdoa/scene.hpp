#pragma once

// Scenario definition and synthetic snapshot generation for a two
// dimensional vector hydrophone: one pressure channel p and two orthogonal
// particle velocity channels (v_x, v_y). Up to two far-field uncorrelated
// narrowband sources impinge with azimuths theta_k; the sensor response to a
// source at theta is [1, cos(theta), sin(theta)].
//
// Under the VectorSensor noise model an isotropic field puts power sigma_n^2
// on the pressure channel and sigma_n^2/2 on each velocity channel; Uniform
// puts sigma_n^2 on all three. Signals are circularly symmetric complex
// Gaussian, so all covariances are analytic.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "vsrdoa/errors.hpp"
#include "vsrdoa/linalg.hpp"
#include "vsrdoa/rng.hpp"

namespace vsrdoa {

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

enum class NoiseModel { VectorSensor, Uniform };

/// A 3xT block of snapshots, rows ordered (p, v_x, v_y) for raw data and
/// (v_x - j v_y, p, v_x + j v_y) after reconstruction.
using SnapshotMatrix = ComplexMatrix;

struct Scenario {
    std::vector<double> source_angles_deg; // each in [-180, 180)
    std::vector<double> source_powers;     // sigma_s_k^2, positive
    std::size_t snapshots = 0;             // T
    double snr_db = 0.0;                   // referenced to source 1 on the pressure channel
    std::uint64_t seed = 0;
    NoiseModel noise_model = NoiseModel::VectorSensor;

    std::size_t source_count() const { return source_angles_deg.size(); }

    /// Throws InvalidInput naming the offending field.
    void validate() const {
        const std::size_t k = source_angles_deg.size();
        if (k < 1 || k > 2)
            throw InvalidInput("scenario.source_angles_deg: need 1 or 2 sources, got " + std::to_string(k));
        if (source_powers.size() != k)
            throw InvalidInput("scenario.source_powers: length must match source_angles_deg");
        for (double a : source_angles_deg) {
            if (!std::isfinite(a) || a < -180.0 || a >= 180.0)
                throw InvalidInput("scenario.source_angles_deg: angles must lie in [-180, 180)");
        }
        if (k == 2 && source_angles_deg[0] == source_angles_deg[1])
            throw InvalidInput("scenario.source_angles_deg: angles must be distinct");
        for (double p : source_powers) {
            if (!(p > 0.0) || !std::isfinite(p))
                throw InvalidInput("scenario.source_powers: powers must be positive");
        }
        if (snapshots < 1) throw InvalidInput("scenario.snapshots: must be >= 1");
        if (!std::isfinite(snr_db)) throw InvalidInput("scenario.snr_db: must be finite");
    }
};

/// Raw manifold [1, cos(theta), sin(theta)].
inline std::array<cxd, 3> steering_raw(double theta_deg) {
    const double th = deg_to_rad(theta_deg);
    return {cxd{1.0, 0.0}, cxd{std::cos(th), 0.0}, cxd{std::sin(th), 0.0}};
}

/// Total noise power sigma_n^2 (pressure-channel reference) such that
/// 10*log10(sigma_s1^2 / sigma_n^2) equals the scenario SNR.
inline double noise_power_for_snr(const Scenario& sc) {
    return sc.source_powers.at(0) * std::pow(10.0, -sc.snr_db / 10.0);
}

namespace detail {

inline ComplexMatrix steering_matrix_raw(const std::vector<double>& angles_deg) {
    ComplexMatrix a(3, angles_deg.size());
    for (std::size_t k = 0; k < angles_deg.size(); ++k) {
        const auto col = steering_raw(angles_deg[k]);
        for (std::size_t i = 0; i < 3; ++i) a(i, k) = col[i];
    }
    return a;
}

} // namespace detail

/// Draws X = A(theta) S + N. Signal rows are i.i.d. circularly symmetric
/// complex Gaussian at the per-source power; noise rows follow the scenario
/// noise model. Deterministic in the scenario seed: sources are drawn first
/// (source by source, snapshot by snapshot), then the three noise channels.
inline SnapshotMatrix generate(const Scenario& sc) {
    sc.validate();
    const std::size_t k = sc.source_count();
    const std::size_t t = sc.snapshots;
    const double sigma_n2 = noise_power_for_snr(sc);
    const ComplexMatrix a = detail::steering_matrix_raw(sc.source_angles_deg);

    GaussianRng rng(sc.seed);
    ComplexMatrix x(3, t);
    for (std::size_t s = 0; s < k; ++s) {
        const double power = sc.source_powers[s];
        for (std::size_t n = 0; n < t; ++n) {
            const cxd sig = rng.complex_gaussian(power);
            for (std::size_t i = 0; i < 3; ++i) x(i, n) += a(i, s) * sig;
        }
    }
    const double pv = sc.noise_model == NoiseModel::VectorSensor ? 0.5 * sigma_n2 : sigma_n2;
    const std::array<double, 3> channel_noise = {sigma_n2, pv, pv};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t n = 0; n < t; ++n) x(i, n) += rng.complex_gaussian(channel_noise[i]);
    return x;
}

/// Test hook: every source emits the constant signal 1 and there is no
/// noise, so each column is the sum of the raw steering vectors. Not used by
/// the benchmarks.
inline SnapshotMatrix generate_constant_signal(const Scenario& sc) {
    sc.validate();
    const ComplexMatrix a = detail::steering_matrix_raw(sc.source_angles_deg);
    ComplexMatrix x(3, sc.snapshots);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t n = 0; n < sc.snapshots; ++n)
            for (std::size_t s = 0; s < sc.source_count(); ++s) x(i, n) += a(i, s);
    return x;
}

/// (1/T) X X^H.
inline ComplexMatrix sample_covariance(const SnapshotMatrix& x) {
    if (x.cols() < 1) throw InvalidInput("sample_covariance: need at least one snapshot");
    const std::size_t m = x.rows();
    const double inv_t = 1.0 / static_cast<double>(x.cols());
    ComplexMatrix r(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            cxd s{};
            for (std::size_t n = 0; n < x.cols(); ++n) s += x(i, n) * std::conj(x(j, n));
            s *= inv_t;
            r(i, j) = s;
            r(j, i) = std::conj(s);
        }
    return r;
}

} // namespace vsrdoa
