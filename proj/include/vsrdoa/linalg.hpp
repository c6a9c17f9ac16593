#pragma once

// Dense complex linear algebra for the small matrices this library works
// with: 3x3 covariances, lifted solver blocks up to 6x6, and 3xT snapshot
// blocks. Eigendecomposition uses cyclic complex Jacobi rotations, which is
// exact enough and branch-predictable at these sizes; the thin SVD of a 3xT
// block goes through the 3x3 Gram matrix.

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include "vsrdoa/errors.hpp"

namespace vsrdoa {

using cxd = std::complex<double>;

/// Row-major dense complex matrix.
class ComplexMatrix {
public:
    ComplexMatrix() = default;

    ComplexMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), a_(rows * cols) {}

    static ComplexMatrix identity(std::size_t n) {
        ComplexMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    /// Builds from nested row lists, e.g. {{1, 0}, {0, 1}}.
    static ComplexMatrix from_rows(std::initializer_list<std::initializer_list<cxd>> rows) {
        const std::size_t r = rows.size();
        const std::size_t c = r == 0 ? 0 : rows.begin()->size();
        ComplexMatrix m(r, c);
        std::size_t i = 0;
        for (const auto& row : rows) {
            assert(row.size() == c);
            std::size_t j = 0;
            for (const auto& v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    cxd& operator()(std::size_t i, std::size_t j) {
        assert(i < rows_ && j < cols_);
        return a_[i * cols_ + j];
    }
    const cxd& operator()(std::size_t i, std::size_t j) const {
        assert(i < rows_ && j < cols_);
        return a_[i * cols_ + j];
    }

    const std::vector<cxd>& data() const { return a_; }

    ComplexMatrix adjoint() const {
        ComplexMatrix m(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) m(j, i) = std::conj((*this)(i, j));
        return m;
    }

    ComplexMatrix& operator+=(const ComplexMatrix& o) {
        assert(same_shape(o));
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] += o.a_[k];
        return *this;
    }
    ComplexMatrix& operator-=(const ComplexMatrix& o) {
        assert(same_shape(o));
        for (std::size_t k = 0; k < a_.size(); ++k) a_[k] -= o.a_[k];
        return *this;
    }
    ComplexMatrix& operator*=(cxd s) {
        for (auto& v : a_) v *= s;
        return *this;
    }

    friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
    friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
    friend ComplexMatrix operator*(ComplexMatrix a, cxd s) { return a *= s; }
    friend ComplexMatrix operator*(cxd s, ComplexMatrix a) { return a *= s; }

    friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
        assert(a.cols_ == b.rows_);
        ComplexMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cxd aik = a(i, k);
                if (aik == cxd{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        }
        return c;
    }

    cxd trace() const {
        assert(rows_ == cols_);
        cxd t{};
        for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
        return t;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : a_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool is_finite() const {
        for (const auto& v : a_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
        return true;
    }

    /// (A + A^H)/2.
    ComplexMatrix hermitian_part() const {
        assert(rows_ == cols_);
        ComplexMatrix m(rows_, cols_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                m(i, j) = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
        return m;
    }

    bool same_shape(const ComplexMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cxd> a_;
};

struct HermitianEig {
    std::vector<double> eigenvalues; // ascending
    ComplexMatrix eigenvectors;      // orthonormal columns, aligned with eigenvalues
};

namespace detail {

// One cyclic Jacobi pass: annihilates A(p,q) with a complex rotation and
// accumulates it into V. A stays Hermitian up to roundoff.
inline void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, std::size_t p, std::size_t q) {
    const cxd apq = a(p, q);
    const double r = std::abs(apq);
    if (r == 0.0) return;
    const cxd w = apq / r; // unit phase of the pivot
    const double app = a(p, p).real();
    const double aqq = a(q, q).real();
    const double tau = (aqq - app) / (2.0 * r);
    const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;
    const cxd sw = s * w;
    const cxd swc = s * std::conj(w);

    const std::size_t n = a.rows();
    // columns: A <- A * J with J[p][p]=c, J[p][q]=s*w, J[q][p]=-s*conj(w), J[q][q]=c
    for (std::size_t i = 0; i < n; ++i) {
        const cxd aip = a(i, p), aiq = a(i, q);
        a(i, p) = c * aip - swc * aiq;
        a(i, q) = sw * aip + c * aiq;
    }
    // rows: A <- J^H * A
    for (std::size_t j = 0; j < n; ++j) {
        const cxd apj = a(p, j), aqj = a(q, j);
        a(p, j) = c * apj - sw * aqj;
        a(q, j) = swc * apj + c * aqj;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const cxd vip = v(i, p), viq = v(i, q);
        v(i, p) = c * vip - swc * viq;
        v(i, q) = sw * vip + c * viq;
    }
}

inline double off_diagonal_norm(const ComplexMatrix& a) {
    double s = 0.0;
    const std::size_t n = a.rows();
    for (std::size_t p = 0; p + 1 < n; ++p)
        for (std::size_t q = p + 1; q < n; ++q) s += std::norm(a(p, q));
    return std::sqrt(2.0 * s);
}

} // namespace detail

/// Eigendecomposition of a Hermitian matrix (input is symmetrized first).
/// Eigenvalues come back ascending with matching orthonormal eigenvectors.
inline HermitianEig hermitian_eig(const ComplexMatrix& a_in) {
    if (a_in.rows() != a_in.cols()) throw InvalidInput("hermitian_eig: matrix must be square");
    if (!a_in.is_finite()) throw InvalidInput("hermitian_eig: non-finite entries");
    const std::size_t n = a_in.rows();

    ComplexMatrix a = a_in.hermitian_part();
    ComplexMatrix v = ComplexMatrix::identity(n);
    const double scale = std::max(a.frobenius_norm(), 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        if (detail::off_diagonal_norm(a) <= 1e-15 * scale) break;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                if (std::abs(a(p, q)) > 1e-18 * scale) detail::jacobi_rotate(a, v, p, q);
    }

    HermitianEig e;
    e.eigenvalues.resize(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return diag[i] < diag[j]; });
    e.eigenvectors = ComplexMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        e.eigenvalues[j] = diag[order[j]];
        for (std::size_t i = 0; i < n; ++i) e.eigenvectors(i, j) = v(i, order[j]);
    }
    return e;
}

struct ThinSvd {
    ComplexMatrix u;                    // 3x3 (rows x rows), unitary
    std::vector<double> singular_values; // descending, length rows
    ComplexMatrix v;                    // cols x rows; columns beyond the rank are zero
};

/// Thin SVD of a wide or square block, A = U diag(s) V^H, computed from the
/// Gram matrix A A^H. Intended for 3xT snapshot blocks; any rows <= 8 works.
inline ThinSvd thin_svd(const ComplexMatrix& a) {
    if (!a.is_finite()) throw InvalidInput("thin_svd: non-finite entries");
    const std::size_t m = a.rows(), n = a.cols();
    if (n < 1) throw InvalidInput("thin_svd: empty matrix");

    ComplexMatrix gram(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i; j < m; ++j) {
            cxd s{};
            for (std::size_t t = 0; t < n; ++t) s += a(i, t) * std::conj(a(j, t));
            gram(i, j) = s;
            gram(j, i) = std::conj(s);
        }

    const HermitianEig eig = hermitian_eig(gram);

    ThinSvd r;
    r.u = ComplexMatrix(m, m);
    r.singular_values.resize(m);
    r.v = ComplexMatrix(n, m);
    double smax = 0.0;
    for (std::size_t j = 0; j < m; ++j) smax = std::max(smax, eig.eigenvalues[j]);
    smax = std::sqrt(std::max(smax, 0.0));

    for (std::size_t j = 0; j < m; ++j) {
        const std::size_t src = m - 1 - j; // flip ascending -> descending
        const double sv = std::sqrt(std::max(eig.eigenvalues[src], 0.0));
        r.singular_values[j] = sv;
        for (std::size_t i = 0; i < m; ++i) r.u(i, j) = eig.eigenvectors(i, src);
        if (sv > 1e-12 * smax && sv > 0.0) {
            // v_j = A^H u_j / s_j
            for (std::size_t t = 0; t < n; ++t) {
                cxd acc{};
                for (std::size_t i = 0; i < m; ++i) acc += std::conj(a(i, t)) * r.u(i, j);
                r.v(t, j) = acc / sv;
            }
        }
        // columns for (numerically) zero singular values stay zero; they do not
        // contribute to U diag(s) V^H
    }
    return r;
}

/// Solves A X = B for Hermitian positive definite A via Cholesky. A is
/// symmetrized first; if it is not safely PD it gets a trace-scaled diagonal
/// bump of 1e-8 * tr(A)/n before factorization.
inline ComplexMatrix solve_hermitian(const ComplexMatrix& a_in, const ComplexMatrix& b) {
    if (a_in.rows() != a_in.cols()) throw InvalidInput("solve_hermitian: matrix must be square");
    if (a_in.rows() != b.rows()) throw InvalidInput("solve_hermitian: shape mismatch");
    if (!a_in.is_finite() || !b.is_finite()) throw InvalidInput("solve_hermitian: non-finite entries");
    const std::size_t n = a_in.rows(), m = b.cols();

    ComplexMatrix a = a_in.hermitian_part();
    {
        const HermitianEig eig = hermitian_eig(a);
        const double lmax = eig.eigenvalues.back();
        const double lmin = eig.eigenvalues.front();
        if (!(lmin > 1e-12 * lmax)) {
            const double bump = 1e-8 * a.trace().real() / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) a(i, i) += bump;
        }
    }

    // Cholesky A = L L^H
    ComplexMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(l(j, k));
        if (!(d > 1e-300)) throw SingularMatrix("solve_hermitian: matrix singular after regularization");
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            cxd s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }

    // forward then backward substitution, column by column of B
    ComplexMatrix x(n, m);
    std::vector<cxd> y(n);
    for (std::size_t col = 0; col < m; ++col) {
        for (std::size_t i = 0; i < n; ++i) {
            cxd s = b(i, col);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
            y[i] = s / l(i, i).real();
        }
        for (std::size_t ii = n; ii-- > 0;) {
            cxd s = y[ii];
            for (std::size_t k = ii + 1; k < n; ++k) s -= std::conj(l(k, ii)) * x(k, col);
            x(ii, col) = s / l(ii, ii).real();
        }
    }
    return x;
}

} // namespace vsrdoa
