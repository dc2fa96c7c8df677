#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "coralign/error.hpp"
#include "coralign/matrix.hpp"

namespace coralign {

inline std::vector<double> column_means(const Matrix& x) {
    std::vector<double> mean(x.cols(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) mean[j] += x(i, j);
    }
    for (double& m : mean) m /= static_cast<double>(x.rows());
    return mean;
}

/// Column-mean-centered sample covariance with divisor n-1.
/// Rows are samples, columns are features.
inline SymmetricMatrix covariance(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) {
        throw ValidationError("covariance: need at least 2 rows, got " + std::to_string(n));
    }
    const std::vector<double> mean = column_means(x);

    // Upper triangle, then mirror, so the result is exactly symmetric.
    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) {
            double da = x(i, a) - mean[a];
            if (da == 0.0) continue;
            for (std::size_t b = a; b < d; ++b) {
                cov(a, b) += da * (x(i, b) - mean[b]);
            }
        }
    }
    const double div = static_cast<double>(n - 1);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            cov(a, b) /= div;
            cov(b, a) = cov(a, b);
        }
    }
    return SymmetricMatrix(cov);
}

/// S + lam * I.
inline SymmetricMatrix regularize(const SymmetricMatrix& s, double lam) {
    if (lam < 0.0) {
        throw ValidationError("regularize: lambda must be nonnegative");
    }
    Matrix m = s.as_matrix();
    for (std::size_t i = 0; i < s.dimension(); ++i) m(i, i) += lam;
    return SymmetricMatrix(m);
}

/// Cholesky factor L with L L^T = S. A pivot below 1e-12 throws
/// NotPositiveDefiniteError, which is the cue for the eigendecomposition
/// fallback in CORAL.
inline LowerTriangular cholesky(const SymmetricMatrix& s) {
    constexpr double kPivotTol = 1e-12;
    const std::size_t n = s.dimension();
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = s(j, j);
        for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
        if (pivot < kPivotTol) {
            throw NotPositiveDefiniteError(
                "cholesky: non-positive pivot at column " + std::to_string(j));
        }
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double sum = s(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
            l(i, j) = sum / ljj;
        }
    }
    return LowerTriangular(l);
}

/// Solve L X = B by forward substitution, one column of B at a time.
inline Matrix solve_lower_triangular(const LowerTriangular& l, const Matrix& b) {
    const std::size_t n = l.dimension();
    if (b.rows() != n) {
        throw ValidationError("solve_lower_triangular: dimension mismatch");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (l(i, i) == 0.0) {
            throw SingularError("solve_lower_triangular: zero diagonal at " + std::to_string(i));
        }
    }
    Matrix x(n, b.cols());
    for (std::size_t c = 0; c < b.cols(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = b(i, c);
            for (std::size_t k = 0; k < i; ++k) sum -= l(i, k) * x(k, c);
            x(i, c) = sum / l(i, i);
        }
    }
    return x;
}

struct EigenDecomposition {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // orthonormal columns, column k pairs with eigenvalues[k]
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            sum += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(2.0 * sum);
}

}  // namespace detail

/// Symmetric eigendecomposition by cyclic Jacobi sweeps.
/// Convergence: off-diagonal Frobenius norm <= 1e-12 * ||S||_F within
/// 100 sweeps. Sign convention: each eigenvector's first
/// largest-magnitude entry is nonnegative.
inline EigenDecomposition sym_eigen(const SymmetricMatrix& s) {
    constexpr int kMaxSweeps = 100;
    const std::size_t n = s.dimension();
    Matrix a = s.as_matrix();
    Matrix v = Matrix::identity(n);
    const double threshold = 1e-12 * frobenius_norm(a);

    bool converged = detail::off_diagonal_norm(a) <= threshold;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p);
                const double aqq = a(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = tau >= 0.0
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = t * c;

                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a(i, p);
                    const double aiq = a(i, q);
                    a(i, p) = c * aip - sn * aiq;
                    a(p, i) = a(i, p);
                    a(i, q) = sn * aip + c * aiq;
                    a(q, i) = a(i, q);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = c * vip - sn * viq;
                    v(i, q) = sn * vip + c * viq;
                }
            }
        }
        converged = detail::off_diagonal_norm(a) <= threshold;
    }
    if (!converged) {
        throw NumericalError("sym_eigen: Jacobi iteration did not converge in 100 sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.eigenvalues[k] = a(src, src);
        std::size_t imax = 0;
        for (std::size_t i = 1; i < n; ++i) {
            if (std::abs(v(i, src)) > std::abs(v(imax, src))) imax = i;
        }
        const double sign = v(imax, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            out.eigenvectors(i, k) = sign * v(i, src);
        }
    }
    return out;
}

}  // namespace coralign
