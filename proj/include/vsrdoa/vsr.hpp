#pragma once

// Vector signal reconstruction: the fixed linear map G that turns raw
// (p, v_x, v_y) data into the three channels (v_x - j v_y, p, v_x + j v_y).
// A source at azimuth theta then steers as [e^{-j theta}, 1, e^{j theta}],
// the manifold of a half-wavelength three-element uniform linear array, so
// the signal covariance becomes Hermitian Toeplitz. The same map sends the
// anisotropic vector-sensor noise covariance diag(1, 1/2, 1/2) sigma_n^2 to
// an exact sigma_n^2 * I, which is what the gridless estimators assume.

#include <array>
#include <cmath>
#include <complex>

#include "vsrdoa/linalg.hpp"
#include "vsrdoa/scene.hpp"

namespace vsrdoa {

/// The reconstruction matrix G = [[0, 1, -j], [1, 0, 0], [0, 1, j]].
inline const ComplexMatrix& reconstruction_matrix() {
    static const ComplexMatrix g = ComplexMatrix::from_rows({
        {cxd{0, 0}, cxd{1, 0}, cxd{0, -1}},
        {cxd{1, 0}, cxd{0, 0}, cxd{0, 0}},
        {cxd{0, 0}, cxd{1, 0}, cxd{0, 1}},
    });
    return g;
}

/// Y = G X, written out entrywise: y1 = v_x - j v_y, y2 = p, y3 = v_x + j v_y.
inline SnapshotMatrix reconstruct(const SnapshotMatrix& x) {
    if (x.rows() != 3) throw InvalidInput("reconstruct: expected 3 channel rows");
    SnapshotMatrix y(3, x.cols());
    for (std::size_t t = 0; t < x.cols(); ++t) {
        const cxd p = x(0, t), vx = x(1, t), vy = x(2, t);
        const cxd jvy = cxd{-vy.imag(), vy.real()}; // j * v_y
        y(0, t) = vx - jvy;
        y(1, t) = p;
        y(2, t) = vx + jvy;
    }
    return y;
}

/// Reconstructed manifold [e^{-j theta}, 1, e^{j theta}]; equals
/// G * steering_raw(theta) exactly.
inline std::array<cxd, 3> steering_reconstructed(double theta_deg) {
    const double th = deg_to_rad(theta_deg);
    const cxd e{std::cos(th), std::sin(th)};
    return {std::conj(e), cxd{1.0, 0.0}, e};
}

/// Hermitian Toeplitz 3x3 parameterized by its first row: entry (i, j) is
/// u_{j-i} above the diagonal and the conjugate below.
struct HermitianToeplitz3 {
    double u0 = 0.0;
    cxd u1{};
    cxd u2{};
};

inline ComplexMatrix toeplitz_embed(const HermitianToeplitz3& u) {
    ComplexMatrix m(3, 3);
    m(0, 0) = m(1, 1) = m(2, 2) = u.u0;
    m(0, 1) = m(1, 2) = u.u1;
    m(1, 0) = m(2, 1) = std::conj(u.u1);
    m(0, 2) = u.u2;
    m(2, 0) = std::conj(u.u2);
    return m;
}

/// Diagonal averaging: the nearest Hermitian Toeplitz matrix in Frobenius
/// norm. Inverse of toeplitz_embed on already-Toeplitz input.
inline HermitianToeplitz3 toeplitz_project(const ComplexMatrix& m) {
    if (m.rows() != 3 || m.cols() != 3) throw InvalidInput("toeplitz_project: expected 3x3");
    HermitianToeplitz3 u;
    u.u0 = (m(0, 0).real() + m(1, 1).real() + m(2, 2).real()) / 3.0;
    // average each diagonal with the conjugate of its mirror below
    u.u1 = 0.25 * (m(0, 1) + m(1, 2) + std::conj(m(1, 0)) + std::conj(m(2, 1)));
    u.u2 = 0.5 * (m(0, 2) + std::conj(m(2, 0)));
    return u;
}

/// Analytic covariance of reconstructed data:
/// sum_k sigma_s_k^2 phi(theta_k) phi(theta_k)^H + sigma_n^2 I.
inline ComplexMatrix population_covariance_reconstructed(const std::vector<double>& angles_deg,
                                                         const std::vector<double>& powers,
                                                         double noise_power) {
    if (angles_deg.size() != powers.size())
        throw InvalidInput("population_covariance_reconstructed: angle/power length mismatch");
    ComplexMatrix r(3, 3);
    for (std::size_t k = 0; k < angles_deg.size(); ++k) {
        const auto phi = steering_reconstructed(angles_deg[k]);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) r(i, j) += powers[k] * phi[i] * std::conj(phi[j]);
    }
    for (std::size_t i = 0; i < 3; ++i) r(i, i) += noise_power;
    return r;
}

inline ComplexMatrix population_covariance_reconstructed(const Scenario& sc) {
    sc.validate();
    return population_covariance_reconstructed(sc.source_angles_deg, sc.source_powers,
                                               noise_power_for_snr(sc));
}

} // namespace vsrdoa
