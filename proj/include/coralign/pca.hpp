#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "coralign/error.hpp"
#include "coralign/linalg.hpp"
#include "coralign/matrix.hpp"

namespace coralign {

/// PCA basis fitted on pooled source + target rows. `components` holds
/// one orthonormal row per retained direction.
struct PcaParams {
    std::vector<double> mean;
    Matrix components;                       // n_components x d_in
    std::vector<double> explained_variance;  // descending
    bool clamped = false;          // requested components exceeded the rank limit
    bool low_sample_warning = false;  // combined rows < 3 * n_components

    std::size_t input_dim() const { return mean.size(); }
    std::size_t n_components() const { return components.rows(); }
};

/// Fit PCA on the concatenation of both domains (labels never enter).
/// The requested component count is clamped to min(d, n_fit - 1).
inline PcaParams fit_joint_pca(const Matrix& x_source, const Matrix& x_target,
                               std::size_t n_components) {
    if (x_source.cols() != x_target.cols()) {
        throw ValidationError("fit_joint_pca: domain feature dimensions differ");
    }
    if (n_components < 1) {
        throw ValidationError("fit_joint_pca: n_components must be at least 1");
    }
    const std::size_t d = x_source.cols();
    const std::size_t n = x_source.rows() + x_target.rows();
    if (n < 2) {
        throw ValidationError("fit_joint_pca: need at least 2 combined samples");
    }

    Matrix combined(n, d);
    for (std::size_t i = 0; i < x_source.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) combined(i, j) = x_source(i, j);
    }
    for (std::size_t i = 0; i < x_target.rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) combined(x_source.rows() + i, j) = x_target(i, j);
    }

    PcaParams params;
    params.mean = column_means(combined);

    const EigenDecomposition eig = sym_eigen(covariance(combined));

    const std::size_t rank_limit = std::min(d, n - 1);
    const std::size_t keep = std::min(n_components, rank_limit);
    params.clamped = n_components > rank_limit;
    params.low_sample_warning = n < 3 * keep;

    params.components = Matrix(keep, d);
    params.explained_variance.resize(keep);
    for (std::size_t k = 0; k < keep; ++k) {
        params.explained_variance[k] = std::max(eig.eigenvalues[k], 0.0);
        for (std::size_t j = 0; j < d; ++j) {
            params.components(k, j) = eig.eigenvectors(j, k);
        }
    }
    return params;
}

/// (X - mean) * components^T.
inline Matrix apply_pca(const PcaParams& params, const Matrix& x) {
    if (x.cols() != params.input_dim()) {
        throw ValidationError("apply_pca: feature dimension mismatch");
    }
    const std::size_t k = params.n_components();
    Matrix out(x.rows(), k);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            double sum = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) {
                sum += (x(i, j) - params.mean[j]) * params.components(c, j);
            }
            out(i, c) = sum;
        }
    }
    return out;
}

}  // namespace coralign
