#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "coralign/error.hpp"
#include "coralign/linalg.hpp"
#include "coralign/matrix.hpp"

namespace coralign {

struct CoralOptions {
    // The composition L_s^{-1} L_t applied as z A^T does not reproduce the
    // target covariance; the whitening-recoloring map A = L_t L_s^{-1}
    // does, and is the default. The literal variant stays available for
    // comparison.
    bool literal_formula = false;
    bool align_means = true;
};

struct CoralParams {
    Matrix transform;  // d x d; rows map as (z - source_mean) A^T + target_mean
    std::vector<double> source_mean;
    std::vector<double> target_mean;
    double lambda = 0.0;
    bool used_fallback = false;
    bool literal_formula = false;

    std::size_t dim() const { return transform.rows(); }
};

namespace detail {

// Square-root factor from the eigendecomposition, F = V diag(sqrt(max(l_i, floor))).
inline Matrix eigen_factor(const EigenDecomposition& eig, double floor) {
    const std::size_t d = eig.eigenvectors.rows();
    Matrix f(d, d);
    for (std::size_t j = 0; j < d; ++j) {
        const double scale = std::sqrt(std::max(eig.eigenvalues[j], floor));
        for (std::size_t i = 0; i < d; ++i) {
            f(i, j) = eig.eigenvectors(i, j) * scale;
        }
    }
    return f;
}

// Inverse of the factor above: diag(1/sqrt(max(l_i, floor))) V^T.
inline Matrix eigen_factor_inverse(const EigenDecomposition& eig, double floor) {
    const std::size_t d = eig.eigenvectors.rows();
    Matrix inv(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        const double scale = 1.0 / std::sqrt(std::max(eig.eigenvalues[i], floor));
        for (std::size_t j = 0; j < d; ++j) {
            inv(i, j) = eig.eigenvectors(j, i) * scale;
        }
    }
    return inv;
}

}  // namespace detail

/// Fit the alignment map from regularized covariances
/// Sigma_s = cov(X_s) + lambda I and Sigma_t = cov(X_t) + lambda I via
/// their Cholesky factors. If either factorization fails, falls back to
/// eigendecomposition factors with eigenvalues floored at
/// max(lambda, 1e-12).
inline CoralParams fit_coral(const Matrix& x_source, const Matrix& x_target, double lambda,
                             const CoralOptions& options = {}) {
    if (x_source.cols() != x_target.cols()) {
        throw ValidationError("fit_coral: domain feature dimensions differ");
    }
    if (x_source.rows() < 2 || x_target.rows() < 2) {
        throw ValidationError("fit_coral: need at least 2 samples per domain");
    }
    const std::size_t d = x_source.cols();
    const SymmetricMatrix sigma_s = regularize(covariance(x_source), lambda);
    const SymmetricMatrix sigma_t = regularize(covariance(x_target), lambda);

    CoralParams params;
    params.lambda = lambda;
    params.literal_formula = options.literal_formula;
    if (options.align_means) {
        params.source_mean = column_means(x_source);
        params.target_mean = column_means(x_target);
    } else {
        params.source_mean.assign(d, 0.0);
        params.target_mean.assign(d, 0.0);
    }

    try {
        const LowerTriangular l_s = cholesky(sigma_s);
        const LowerTriangular l_t = cholesky(sigma_t);
        if (options.literal_formula) {
            params.transform = solve_lower_triangular(l_s, l_t.as_matrix());
        } else {
            const Matrix l_s_inv = solve_lower_triangular(l_s, Matrix::identity(d));
            params.transform = matmul(l_t.as_matrix(), l_s_inv);
        }
    } catch (const NotPositiveDefiniteError&) {
        const double floor = std::max(lambda, 1e-12);
        const EigenDecomposition eig_s = sym_eigen(sigma_s);
        const EigenDecomposition eig_t = sym_eigen(sigma_t);
        const Matrix f_t = detail::eigen_factor(eig_t, floor);
        const Matrix f_s_inv = detail::eigen_factor_inverse(eig_s, floor);
        if (options.literal_formula) {
            params.transform = matmul(f_s_inv, f_t);
        } else {
            params.transform = matmul(f_t, f_s_inv);
        }
        params.used_fallback = true;
    }
    if (!params.transform.all_finite()) {
        throw NumericalError("fit_coral: non-finite transform");
    }
    return params;
}

/// Row map z -> (z - source_mean) A^T + target_mean.
inline Matrix apply_coral(const CoralParams& params, const Matrix& x) {
    const std::size_t d = params.dim();
    if (x.cols() != d) {
        throw ValidationError("apply_coral: feature dimension mismatch");
    }
    Matrix out(x.rows(), d);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            double sum = params.target_mean[k];
            for (std::size_t j = 0; j < d; ++j) {
                sum += (x(i, j) - params.source_mean[j]) * params.transform(k, j);
            }
            out(i, k) = sum;
        }
    }
    return out;
}

}  // namespace coralign
