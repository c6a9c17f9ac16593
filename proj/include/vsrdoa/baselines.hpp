#pragma once

// Baseline spectral estimators on the raw manifold a(theta) = [1, cos, sin]:
//
//   CBF    P = a^H R a / (a^H a)
//   MVDR   P = 1 / (a^H R^-1 a), R diagonally loaded by 1e-8 tr(R)/3
//   MUSIC  subspace spectrum on the raw manifold (shared readout)
//   IAA    iterative adaptive approach (Yardibi et al. 2010):
//            R = A diag(p) A^H,  p_g <- (a_g^H R^-1 S R^-1 a_g) / (a_g^H R^-1 a_g)^2
//          with S the sample covariance; initialized from the matched filter
//          p_g = a_g^H S a_g / ||a_g||^4; 15 iterations by default.
//   SPICE  covariance-fitting power iteration (Stoica et al. 2011) with the
//          grid steering columns extended by the three per-channel noise
//          columns e_i (the sensor noise is not white across channels):
//            b_k   = sqrt(a_k^H R^-1 S R^-1 a_k),  R = A~ diag(p) A~^H
//            rho   = sum_j sqrt(w_j) p_j b_j
//            p_k <- p_k b_k / (sqrt(w_k) rho)
//          plain weights  w_k = ||a_k||^2 / tr(S)
//          SPICE+ weights w_k = a_k^H S^-1 a_k
//          The fitting criterion tr(R^-1 S) + sum_k w_k p_k is non-increasing
//          across iterations; 50 iterations by default.
//
// Iteration counts are fixed (not convergence-tested) so benchmark runs stay
// deterministic; both are overridable.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vsrdoa/errors.hpp"
#include "vsrdoa/gridless.hpp"
#include "vsrdoa/linalg.hpp"
#include "vsrdoa/scene.hpp"

namespace vsrdoa {

inline SpatialSpectrum cbf_spectrum(const ComplexMatrix& r, const std::vector<double>& grid_deg) {
    if (r.rows() != 3 || r.cols() != 3) throw InvalidInput("cbf: covariance must be 3x3");
    if (grid_deg.empty()) throw InvalidInput("cbf: empty grid");
    const ComplexMatrix rh = r.hermitian_part();
    SpatialSpectrum s;
    s.grid_deg = grid_deg;
    s.power.resize(grid_deg.size());
    s.method = "cbf";
    for (std::size_t g = 0; g < grid_deg.size(); ++g) {
        const auto a = steering_raw(grid_deg[g]);
        cxd quad{};
        double nrm = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) quad += std::conj(a[i]) * rh(i, j) * a[j];
            nrm += std::norm(a[i]);
        }
        s.power[g] = std::max(quad.real(), 0.0) / nrm;
    }
    return s;
}

namespace detail {

/// R^-1 after the fixed diagonal loading 1e-8 tr(R)/3.
inline ComplexMatrix loaded_inverse(const ComplexMatrix& r) {
    ComplexMatrix loaded = r.hermitian_part();
    const double eps = 1e-8 * loaded.trace().real() / 3.0;
    for (std::size_t i = 0; i < loaded.rows(); ++i) loaded(i, i) += eps;
    return solve_hermitian(loaded, ComplexMatrix::identity(loaded.rows()));
}

} // namespace detail

inline SpatialSpectrum mvdr_spectrum(const ComplexMatrix& r, const std::vector<double>& grid_deg) {
    if (r.rows() != 3 || r.cols() != 3) throw InvalidInput("mvdr: covariance must be 3x3");
    if (grid_deg.empty()) throw InvalidInput("mvdr: empty grid");
    const ComplexMatrix rinv = detail::loaded_inverse(r);
    SpatialSpectrum s;
    s.grid_deg = grid_deg;
    s.power.resize(grid_deg.size());
    s.method = "mvdr";
    for (std::size_t g = 0; g < grid_deg.size(); ++g) {
        const auto a = steering_raw(grid_deg[g]);
        cxd quad{};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) quad += std::conj(a[i]) * rinv(i, j) * a[j];
        s.power[g] = 1.0 / std::max(quad.real(), 1e-300);
    }
    return s;
}

inline SpatialSpectrum music_raw(const ComplexMatrix& r, std::size_t k,
                                 const std::vector<double>& grid_deg) {
    SpatialSpectrum s = music_spectrum(r, Manifold::Raw, k, grid_deg);
    s.method = "music";
    return s;
}

inline SpatialSpectrum iaa_spectrum(const SnapshotMatrix& x, const std::vector<double>& grid_deg,
                                    std::size_t iterations = 15) {
    if (x.rows() != 3 || x.cols() < 1) throw InvalidInput("iaa: expected 3xT snapshots");
    if (!x.is_finite()) throw InvalidInput("iaa: non-finite snapshots");
    if (grid_deg.empty()) throw InvalidInput("iaa: empty grid");

    const std::size_t g_count = grid_deg.size();
    const ComplexMatrix sample = sample_covariance(x);
    ComplexMatrix a(3, g_count);
    for (std::size_t g = 0; g < g_count; ++g) {
        const auto col = steering_raw(grid_deg[g]);
        for (std::size_t i = 0; i < 3; ++i) a(i, g) = col[i];
    }

    // matched-filter initialization
    std::vector<double> p(g_count);
    for (std::size_t g = 0; g < g_count; ++g) {
        cxd quad{};
        double nrm = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) quad += std::conj(a(i, g)) * sample(i, j) * a(j, g);
            nrm += std::norm(a(i, g));
        }
        p[g] = std::max(quad.real(), 0.0) / (nrm * nrm);
    }

    for (std::size_t it = 0; it < iterations; ++it) {
        ComplexMatrix r(3, 3);
        for (std::size_t g = 0; g < g_count; ++g)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) r(i, j) += p[g] * a(i, g) * std::conj(a(j, g));
        const ComplexMatrix rinv = detail::loaded_inverse(r);
        const ComplexMatrix w = rinv * a; // columns R^-1 a_g
        for (std::size_t g = 0; g < g_count; ++g) {
            cxd num{};
            cxd den{};
            for (std::size_t i = 0; i < 3; ++i) {
                den += std::conj(a(i, g)) * w(i, g);
                for (std::size_t j = 0; j < 3; ++j) num += std::conj(w(i, g)) * sample(i, j) * w(j, g);
            }
            const double d = std::max(den.real(), 1e-300);
            p[g] = std::max(num.real(), 0.0) / (d * d);
        }
    }

    SpatialSpectrum s;
    s.grid_deg = grid_deg;
    s.power = std::move(p);
    s.method = "iaa";
    return s;
}

enum class SpiceVariant { Spice, SpicePlus };

/// SPICE power iteration. criterion_trace, when given, receives the fitting
/// criterion tr(R^-1 S) + sum w_k p_k once per iteration (before the first
/// update and after each one).
inline SpatialSpectrum spice_spectrum(const SnapshotMatrix& x, const std::vector<double>& grid_deg,
                                      SpiceVariant variant = SpiceVariant::Spice,
                                      std::size_t iterations = 50,
                                      std::vector<double>* criterion_trace = nullptr) {
    if (x.rows() != 3 || x.cols() < 1) throw InvalidInput("spice: expected 3xT snapshots");
    if (!x.is_finite()) throw InvalidInput("spice: non-finite snapshots");
    if (grid_deg.empty()) throw InvalidInput("spice: empty grid");

    const std::size_t g_count = grid_deg.size();
    const std::size_t m = g_count + 3; // grid columns plus per-channel noise columns
    const ComplexMatrix sample = sample_covariance(x);
    const double tr_s = std::max(sample.trace().real(), 1e-300);

    ComplexMatrix a(3, m);
    for (std::size_t g = 0; g < g_count; ++g) {
        const auto col = steering_raw(grid_deg[g]);
        for (std::size_t i = 0; i < 3; ++i) a(i, g) = col[i];
    }
    for (std::size_t i = 0; i < 3; ++i) a(i, g_count + i) = 1.0;

    std::vector<double> w(m);
    if (variant == SpiceVariant::Spice) {
        for (std::size_t k = 0; k < m; ++k) {
            double nrm = 0.0;
            for (std::size_t i = 0; i < 3; ++i) nrm += std::norm(a(i, k));
            w[k] = nrm / tr_s;
        }
    } else {
        const ComplexMatrix sinv = detail::loaded_inverse(sample);
        for (std::size_t k = 0; k < m; ++k) {
            cxd quad{};
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) quad += std::conj(a(i, k)) * sinv(i, j) * a(j, k);
            w[k] = std::max(quad.real(), 1e-300);
        }
    }

    // matched-filter initialization, as for IAA
    std::vector<double> p(m);
    for (std::size_t k = 0; k < m; ++k) {
        cxd quad{};
        double nrm = 0.0;
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = 0; j < 3; ++j) quad += std::conj(a(i, k)) * sample(i, j) * a(j, k);
            nrm += std::norm(a(i, k));
        }
        p[k] = std::max(quad.real(), 0.0) / (nrm * nrm);
    }

    std::vector<double> b(m);
    for (std::size_t it = 0; it <= iterations; ++it) {
        ComplexMatrix r(3, 3);
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) r(i, j) += p[k] * a(i, k) * std::conj(a(j, k));
        const ComplexMatrix rinv = detail::loaded_inverse(r);

        if (criterion_trace) {
            double crit = 0.0;
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j) crit += (rinv(i, j) * sample(j, i)).real();
            for (std::size_t k = 0; k < m; ++k) crit += w[k] * p[k];
            criterion_trace->push_back(crit);
        }
        if (it == iterations) break;

        const ComplexMatrix wm = rinv * a;
        double rho = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            cxd quad{};
            for (std::size_t i = 0; i < 3; ++i)
                for (std::size_t j = 0; j < 3; ++j)
                    quad += std::conj(wm(i, k)) * sample(i, j) * wm(j, k);
            b[k] = std::sqrt(std::max(quad.real(), 0.0));
            rho += std::sqrt(w[k]) * p[k] * b[k];
        }
        if (!(rho > 1e-300)) break; // zero data: keep current powers
        for (std::size_t k = 0; k < m; ++k) p[k] = p[k] * b[k] / (std::sqrt(w[k]) * rho);
    }

    SpatialSpectrum s;
    s.grid_deg = grid_deg;
    s.power.assign(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(g_count));
    s.method = variant == SpiceVariant::Spice ? "spice" : "spice+";
    return s;
}

} // namespace vsrdoa
