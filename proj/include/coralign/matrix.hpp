#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "coralign/error.hpp"

namespace coralign {

/// Dense real matrix, row-major. The workhorse container for sample
/// matrices (n x d, one row per sample) and transform matrices.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0) {
            throw ValidationError("Matrix dimensions must be at least 1x1");
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    bool all_finite() const {
        for (double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ValidationError("matmul: inner dimensions differ (" +
                              std::to_string(a.cols()) + " vs " +
                              std::to_string(b.rows()) + ")");
    }
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out(i, j) += aik * b(k, j);
            }
        }
    }
    return out;
}

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = a(i, j);
        }
    }
    return out;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

/// Symmetric matrix. Construction symmetrizes S <- (S + S^T)/2 and
/// rejects inputs whose asymmetry exceeds an absolute 1e-9.
class SymmetricMatrix {
public:
    SymmetricMatrix() = default;

    explicit SymmetricMatrix(const Matrix& m, double tol = 1e-9) {
        if (m.rows() != m.cols()) {
            throw ValidationError("SymmetricMatrix: input is not square");
        }
        dim_ = m.rows();
        data_ = Matrix(dim_, dim_);
        for (std::size_t i = 0; i < dim_; ++i) {
            for (std::size_t j = 0; j < dim_; ++j) {
                if (std::abs(m(i, j) - m(j, i)) > tol) {
                    throw ValidationError(
                        "SymmetricMatrix: asymmetry above tolerance at (" +
                        std::to_string(i) + "," + std::to_string(j) + ")");
                }
                data_(i, j) = 0.5 * (m(i, j) + m(j, i));
            }
        }
    }

    std::size_t dimension() const { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
    const Matrix& as_matrix() const { return data_; }

    friend bool operator==(const SymmetricMatrix&, const SymmetricMatrix&) = default;

private:
    std::size_t dim_ = 0;
    Matrix data_;
};

/// Lower-triangular factor with strictly positive diagonal (a Cholesky
/// factor). Strictly-upper entries are exactly zero.
class LowerTriangular {
public:
    LowerTriangular() = default;

    explicit LowerTriangular(const Matrix& m) : data_(m) {
        if (m.rows() != m.cols()) {
            throw ValidationError("LowerTriangular: input is not square");
        }
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (!(m(i, i) > 0.0)) {
                throw ValidationError("LowerTriangular: diagonal must be strictly positive");
            }
            for (std::size_t j = i + 1; j < m.cols(); ++j) {
                if (m(i, j) != 0.0) {
                    throw ValidationError("LowerTriangular: nonzero above diagonal");
                }
            }
        }
    }

    std::size_t dimension() const { return data_.rows(); }
    double operator()(std::size_t i, std::size_t j) const { return data_(i, j); }
    const Matrix& as_matrix() const { return data_; }

private:
    Matrix data_;
};

}  // namespace coralign
