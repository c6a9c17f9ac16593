#pragma once

// Purpose-built solvers for the two semidefinite programs behind the
// gridless estimators. Both share the same operator-splitting scheme
// (scaled-form ADMM) on the lifted Hermitian variable:
//
//   atomic-norm program, W = [[Q, Z^H], [Z, T(u)]] of size (L+3):
//     minimize  lambda/(2 sqrt(N)) (tr Q + tr T(u)) + 1/2 ||Z - Y||_F^2
//     subject to W >= 0
//
//   structured covariance program, W = T(u) of size 3:
//     minimize  1/2 ||T(u) - Sigma||_F^2 + tau tr T(u)
//     subject to T(u) >= 0
//
// The objective prox is closed form in both cases (quadratic in the data
// block, linear in the diagonals, Toeplitz handled by diagonal averaging)
// and the constraint step is a PSD eigenvalue clip, so one iteration costs
// one eigendecomposition of a matrix no larger than 6x6. The penalty
// parameter starts at rho_init and is residual-balanced during the first
// adapt_rho_iterations, then frozen so the tail is a plain fixed-parameter
// splitting iteration. Everything is deterministic: identical inputs give
// bit-identical outputs.
//
// Merit function: the splitting iteration is Douglas-Rachford on the dual,
// so its fixed-point map is firmly nonexpansive at fixed rho and the step
// norm ||s_k - s_{k-1}|| with s_k = V_k + U_k (equivalently W_k - V_{k-1})
// is non-increasing once rho is frozen. That step norm is the solver's
// merit and is recorded in merit_trace. The raw objective is NOT a descent
// quantity for this scheme: it can ring with damped oscillations near the
// solution (observed amplitude ~1e-5 on small-lambda instances), which is
// expected splitting behaviour, so objective_trace is diagnostic only.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "vsrdoa/errors.hpp"
#include "vsrdoa/linalg.hpp"
#include "vsrdoa/vsr.hpp"

namespace vsrdoa {

/// Eigenvalue clipping at zero: the nearest PSD matrix in Frobenius norm.
/// Hermitian input expected (it is symmetrized first).
inline ComplexMatrix psd_project(const ComplexMatrix& m) {
    const HermitianEig e = hermitian_eig(m);
    const std::size_t n = m.rows();
    if (e.eigenvalues.front() >= 0.0) return m.hermitian_part();
    ComplexMatrix p(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const double lk = e.eigenvalues[k];
        if (lk <= 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            const cxd scaled = lk * e.eigenvectors(i, k);
            for (std::size_t j = i; j < n; ++j) p(i, j) += scaled * std::conj(e.eigenvectors(j, k));
        }
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) p(i, j) = std::conj(p(j, i));
    return p;
}

struct SolverOptions {
    double tolerance = 1e-7;            // relative to 1 + data Frobenius norm
    std::size_t max_iterations = 200000;
    double rho_init = 1.0;
    std::size_t adapt_rho_iterations = 100; // residual balancing window, then rho is frozen
    bool record_objective_trace = false;    // fills objective_trace and merit_trace
};

struct AnmProblem {
    ComplexMatrix y_sv;   // 3xL data block, 1 <= L <= 3
    double lambda = 0.0;  // > 0
    double n_norm = 3.0;  // the N in lambda / (2 sqrt(N))

    void validate() const {
        if (y_sv.rows() != 3 || y_sv.cols() < 1 || y_sv.cols() > 3)
            throw InvalidInput("anm: data block must be 3xL with 1 <= L <= 3");
        if (!y_sv.is_finite()) throw InvalidInput("anm: non-finite data");
        if (!(lambda > 0.0)) throw InvalidInput("anm: lambda must be positive");
        if (!(n_norm > 0.0)) throw InvalidInput("anm: n_norm must be positive");
    }
};

struct AnmSolution {
    ComplexMatrix z;      // 3xL
    HermitianToeplitz3 u;
    ComplexMatrix q;      // LxL Hermitian
    double objective = 0.0;
    std::size_t iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
    std::vector<double> objective_trace; // filled when requested, diagnostic only
    std::vector<double> merit_trace;     // fixed-point step norms, monotone after the rho freeze
};

struct SceProblem {
    ComplexMatrix sigma; // 3x3 Hermitian PSD sample covariance
    double tau = 0.0;    // > 0 in normal use; 0 reduces to Toeplitz projection

    void validate() const {
        if (sigma.rows() != 3 || sigma.cols() != 3) throw InvalidInput("sce: covariance must be 3x3");
        if (!sigma.is_finite()) throw InvalidInput("sce: non-finite covariance");
        if (!(tau >= 0.0)) throw InvalidInput("sce: tau must be non-negative");
    }
};

struct SceSolution {
    HermitianToeplitz3 u;
    double objective = 0.0;
    std::size_t iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    bool converged = false;
    bool closed_form = false; // unconstrained stationary point was already PSD
    std::vector<double> objective_trace; // diagnostic only
    std::vector<double> merit_trace;     // fixed-point step norms, monotone after the rho freeze
};

namespace detail {

struct AnmBlocks {
    // Index layout inside the lifted matrix: [0, l) is the Q block,
    // [l, l+3) the Toeplitz block; Z sits at rows [l, l+3) x cols [0, l).
    std::size_t l;
    std::size_t n() const { return l + 3; }
};

inline double anm_objective(const AnmProblem& p, double c, const ComplexMatrix& w, AnmBlocks b) {
    double tr = 0.0;
    for (std::size_t i = 0; i < b.n(); ++i) tr += w(i, i).real();
    double fit = 0.0;
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t j = 0; j < b.l; ++j) fit += std::norm(w(b.l + r, j) - p.y_sv(r, j));
    return c * tr + 0.5 * fit;
}

// Closed-form minimizer of the objective plus (rho/2)||W - M||_F^2 over the
// structured set {[[Q, Z^H], [Z, T(u)]]}.
inline void anm_structured_prox(const AnmProblem& p, double c, double rho, const ComplexMatrix& m,
                                ComplexMatrix& w, AnmBlocks b) {
    const std::size_t l = b.l;
    // Q block: Hermitian part of M_Q shifted by -c/rho on the diagonal
    for (std::size_t i = 0; i < l; ++i) {
        for (std::size_t j = i; j < l; ++j) {
            cxd v = 0.5 * (m(i, j) + std::conj(m(j, i)));
            if (i == j) v = cxd{v.real() - c / rho, 0.0};
            w(i, j) = v;
            w(j, i) = std::conj(v);
        }
    }
    // Z block: data proximal step
    const double denom = 1.0 + 2.0 * rho;
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t j = 0; j < l; ++j) {
            const cxd mz = 0.5 * (m(l + r, j) + std::conj(m(j, l + r)));
            const cxd z = (p.y_sv(r, j) + 2.0 * rho * mz) / denom;
            w(l + r, j) = z;
            w(j, l + r) = std::conj(z);
        }
    }
    // Toeplitz block: diagonal averages of M_T, diagonal shifted by -c/rho
    HermitianToeplitz3 u;
    u.u0 = (m(l, l).real() + m(l + 1, l + 1).real() + m(l + 2, l + 2).real()) / 3.0 - c / rho;
    u.u1 = 0.25 * (m(l, l + 1) + m(l + 1, l + 2) + std::conj(m(l + 1, l)) + std::conj(m(l + 2, l + 1)));
    u.u2 = 0.5 * (m(l, l + 2) + std::conj(m(l + 2, l)));
    w(l, l) = w(l + 1, l + 1) = w(l + 2, l + 2) = u.u0;
    w(l, l + 1) = w(l + 1, l + 2) = u.u1;
    w(l + 1, l) = w(l + 2, l + 1) = std::conj(u.u1);
    w(l, l + 2) = u.u2;
    w(l + 2, l) = std::conj(u.u2);
}

} // namespace detail

/// Solves the lifted atomic-norm program. Returns the best iterate flagged
/// non-converged when the iteration cap is hit; throws NumericalFailure if
/// the iterates lose finiteness.
inline AnmSolution solve_anm(const AnmProblem& problem, const SolverOptions& options = {}) {
    problem.validate();
    if (options.max_iterations == 0) throw InvalidInput("solver: max_iterations must be >= 1");
    const detail::AnmBlocks b{problem.y_sv.cols()};
    const std::size_t l = b.l, n = b.n();
    const double c = problem.lambda / (2.0 * std::sqrt(problem.n_norm));
    const double scale = 1.0 + problem.y_sv.frobenius_norm();

    // Warm start from the PSD completion [[V s V^H, Y^H], [Y, U s U^H]].
    ComplexMatrix v(n, n);
    {
        const ThinSvd svd = thin_svd(problem.y_sv);
        for (std::size_t k = 0; k < 3; ++k) {
            const double s = svd.singular_values[k];
            if (s <= 0.0) continue;
            for (std::size_t i = 0; i < n; ++i) {
                const cxd bi = i < l ? svd.v(i, k) : svd.u(i - l, k);
                for (std::size_t j = 0; j < n; ++j) {
                    const cxd bj = j < l ? svd.v(j, k) : svd.u(j - l, k);
                    v(i, j) += s * bi * std::conj(bj);
                }
            }
        }
    }
    ComplexMatrix u_dual(n, n);
    ComplexMatrix w(n, n), m(n, n);

    double rho = options.rho_init;
    AnmSolution best;
    double best_residual = std::numeric_limits<double>::infinity();
    AnmSolution out;
    if (options.record_objective_trace) out.objective_trace.reserve(1024);

    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m(i, j) = v(i, j) - u_dual(i, j);
        detail::anm_structured_prox(problem, c, rho, m, w, b);
        if (!w.is_finite()) throw NumericalFailure("anm: non-finite iterate");

        ComplexMatrix v_new = psd_project(w + u_dual);
        double pr = 0.0, du = 0.0, fp = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                pr += std::norm(w(i, j) - v_new(i, j));
                du += std::norm(v_new(i, j) - v(i, j));
                fp += std::norm(w(i, j) - v(i, j));
            }
        pr = std::sqrt(pr);
        du = rho * std::sqrt(du);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) u_dual(i, j) += w(i, j) - v_new(i, j);
        v = std::move(v_new);

        if (options.record_objective_trace) {
            out.objective_trace.push_back(detail::anm_objective(problem, c, w, b));
            out.merit_trace.push_back(std::sqrt(fp));
        }

        const double res = std::max(pr, du);
        if (res < best_residual) {
            best_residual = res;
            best.z = ComplexMatrix(3, l);
            for (std::size_t r = 0; r < 3; ++r)
                for (std::size_t j = 0; j < l; ++j) best.z(r, j) = w(l + r, j);
            best.q = ComplexMatrix(l, l);
            for (std::size_t i = 0; i < l; ++i)
                for (std::size_t j = 0; j < l; ++j) best.q(i, j) = w(i, j);
            best.u.u0 = w(l, l).real();
            best.u.u1 = w(l, l + 1);
            best.u.u2 = w(l, l + 2);
            best.objective = detail::anm_objective(problem, c, w, b);
            best.primal_residual = pr;
            best.dual_residual = du;
        }
        if (pr <= options.tolerance * scale && du <= options.tolerance * scale) {
            ++iter;
            break;
        }
        if (iter < options.adapt_rho_iterations) {
            if (pr > 10.0 * du) {
                rho *= 2.0;
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t j2 = 0; j2 < n; ++j2) u_dual(k, j2) *= 0.5;
            } else if (du > 10.0 * pr) {
                rho *= 0.5;
                for (std::size_t k = 0; k < n; ++k)
                    for (std::size_t j2 = 0; j2 < n; ++j2) u_dual(k, j2) *= 2.0;
            }
        }
    }

    best.iterations = iter;
    best.converged = best.primal_residual <= options.tolerance * scale &&
                     best.dual_residual <= options.tolerance * scale;
    best.objective_trace = std::move(out.objective_trace);
    best.merit_trace = std::move(out.merit_trace);
    return best;
}

/// Solves the structured covariance program. When the unconstrained
/// stationary point (diagonal averages of Sigma with the trace penalty
/// absorbed into u0) is already PSD it is returned directly; otherwise the
/// splitting iteration runs with the PSD constraint active.
inline SceSolution solve_sce(const SceProblem& problem, const SolverOptions& options = {}) {
    problem.validate();
    if (options.max_iterations == 0) throw InvalidInput("solver: max_iterations must be >= 1");
    const ComplexMatrix sigma = problem.sigma.hermitian_part();
    const double tau = problem.tau;
    const double scale = 1.0 + sigma.frobenius_norm();

    const auto objective = [&](const HermitianToeplitz3& u) {
        const ComplexMatrix t = toeplitz_embed(u);
        double fit = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) fit += std::norm(t(i, j) - sigma(i, j));
        return 0.5 * fit + tau * 3.0 * u.u0;
    };

    SceSolution out;

    HermitianToeplitz3 u_free = toeplitz_project(sigma);
    u_free.u0 -= tau;
    {
        const HermitianEig e = hermitian_eig(toeplitz_embed(u_free));
        if (e.eigenvalues.front() >= -1e-12 * std::max(1.0, std::abs(u_free.u0))) {
            out.u = u_free;
            out.objective = objective(u_free);
            out.closed_form = true;
            out.converged = true;
            return out;
        }
    }

    ComplexMatrix v = psd_project(toeplitz_embed(u_free));
    ComplexMatrix u_dual(3, 3);
    double rho = options.rho_init;
    HermitianToeplitz3 u_cur;
    double best_residual = std::numeric_limits<double>::infinity();
    if (options.record_objective_trace) out.objective_trace.reserve(1024);

    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        // structured prox: Toeplitz averages of (Sigma + rho M) / (1 + rho)
        ComplexMatrix m(3, 3);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                m(i, j) = (sigma(i, j) + rho * (v(i, j) - u_dual(i, j))) / (1.0 + rho);
        u_cur = toeplitz_project(m);
        u_cur.u0 -= tau / (1.0 + rho);
        const ComplexMatrix w = toeplitz_embed(u_cur);
        if (!w.is_finite()) throw NumericalFailure("sce: non-finite iterate");

        ComplexMatrix v_new = psd_project(w + u_dual);
        double pr = 0.0, du = 0.0, fp = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                pr += std::norm(w(i, j) - v_new(i, j));
                du += std::norm(v_new(i, j) - v(i, j));
                fp += std::norm(w(i, j) - v(i, j));
            }
        pr = std::sqrt(pr);
        du = rho * std::sqrt(du);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) u_dual(i, j) += w(i, j) - v_new(i, j);
        v = std::move(v_new);

        if (options.record_objective_trace) {
            out.objective_trace.push_back(objective(u_cur));
            out.merit_trace.push_back(std::sqrt(fp));
        }

        const double res = std::max(pr, du);
        if (res < best_residual) {
            best_residual = res;
            out.u = u_cur;
            out.primal_residual = pr;
            out.dual_residual = du;
        }
        if (pr <= options.tolerance * scale && du <= options.tolerance * scale) {
            ++iter;
            break;
        }
        if (iter < options.adapt_rho_iterations) {
            if (pr > 10.0 * du) {
                rho *= 2.0;
                for (std::size_t k = 0; k < 3; ++k)
                    for (std::size_t j2 = 0; j2 < 3; ++j2) u_dual(k, j2) *= 0.5;
            } else if (du > 10.0 * pr) {
                rho *= 0.5;
                for (std::size_t k = 0; k < 3; ++k)
                    for (std::size_t j2 = 0; j2 < 3; ++j2) u_dual(k, j2) *= 2.0;
            }
        }
    }

    out.iterations = iter;
    out.objective = objective(out.u);
    out.converged = out.primal_residual <= options.tolerance * scale &&
                    out.dual_residual <= options.tolerance * scale;
    return out;
}

} // namespace vsrdoa
