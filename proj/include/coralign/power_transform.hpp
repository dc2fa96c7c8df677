#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "coralign/error.hpp"
#include "coralign/matrix.hpp"

namespace coralign {

/// Fitted per-feature Yeo-Johnson lambdas plus post-transform
/// standardization statistics. Constant features are flagged and get
/// lambda 1 with a unit std substitute so downstream selection can drop
/// them via a zero F-score.
struct PowerParams {
    std::vector<double> lambdas;
    std::vector<double> post_means;
    std::vector<double> post_stds;
    std::vector<bool> constant_features;

    std::size_t dim() const { return lambdas.size(); }
};

/// Piecewise Yeo-Johnson map. The lambda=0 / lambda=2 branches are taken
/// within 1e-10 of the seam; expm1/log1p keep the nearby branches
/// continuous to full precision. Total on finite inputs: results are
/// clamped to +-1e300 where the power would overflow.
inline double yj_value(double x, double lambda) {
    constexpr double kBranchEps = 1e-10;
    constexpr double kMaxExponent = 700.0;
    constexpr double kClamp = 1e300;
    double r;
    if (x >= 0.0) {
        if (std::abs(lambda) < kBranchEps) return std::log1p(x);
        double e = lambda * std::log1p(x);
        if (e > kMaxExponent) e = kMaxExponent;
        r = std::expm1(e) / lambda;
    } else {
        const double two_minus = 2.0 - lambda;
        if (std::abs(two_minus) < kBranchEps) return -std::log1p(-x);
        double e = two_minus * std::log1p(-x);
        if (e > kMaxExponent) e = kMaxExponent;
        r = -std::expm1(e) / two_minus;
    }
    if (r > kClamp) r = kClamp;
    if (r < -kClamp) r = -kClamp;
    return r;
}

/// Gaussian profile log-likelihood of the transformed column:
///   -(n/2) ln sigma^2(psi_lambda(x)) + (lambda-1) sum sign(x) ln(1+|x|)
/// sigma^2 uses divisor n. Returns -inf when the transformed column has
/// (near-)zero variance.
inline double yj_log_likelihood(std::span<const double> column, double lambda) {
    const std::size_t n = column.size();
    if (n < 2) {
        throw ValidationError("yj_log_likelihood: need at least 2 values");
    }
    double mean = 0.0;
    std::vector<double> transformed(n);
    for (std::size_t i = 0; i < n; ++i) {
        transformed[i] = yj_value(column[i], lambda);
        mean += transformed[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : transformed) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    if (var < 1e-24) {
        return -std::numeric_limits<double>::infinity();
    }
    double jacobian = 0.0;
    for (double x : column) {
        const double term = std::log1p(std::abs(x));
        jacobian += x < 0.0 ? -term : term;
    }
    return -0.5 * static_cast<double>(n) * std::log(var) + (lambda - 1.0) * jacobian;
}

namespace detail {

// Golden-section maximization of the profile likelihood on [-5, 5].
inline double maximize_yj_likelihood(std::span<const double> column, double tol = 1e-5) {
    constexpr double kInvPhi = 0.6180339887498949;
    double a = -5.0, b = 5.0;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = yj_log_likelihood(column, c);
    double fd = yj_log_likelihood(column, d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = yj_log_likelihood(column, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = yj_log_likelihood(column, d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

/// Fit per-feature lambda by MLE, then record post-transform mean and
/// std (divisor n-1) for standardization.
inline PowerParams fit_power(const Matrix& x) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) {
        throw ValidationError("fit_power: need at least 2 samples");
    }
    PowerParams params;
    params.lambdas.resize(d);
    params.post_means.resize(d);
    params.post_stds.resize(d);
    params.constant_features.assign(d, false);

    std::vector<double> column(n);
    for (std::size_t j = 0; j < d; ++j) {
        double lo = x(0, j), hi = x(0, j);
        for (std::size_t i = 0; i < n; ++i) {
            column[i] = x(i, j);
            lo = std::min(lo, column[i]);
            hi = std::max(hi, column[i]);
        }
        if (lo == hi) {
            params.constant_features[j] = true;
            params.lambdas[j] = 1.0;
            params.post_means[j] = yj_value(lo, 1.0);
            params.post_stds[j] = 1.0;
            continue;
        }
        const double lambda = detail::maximize_yj_likelihood(column);
        params.lambdas[j] = lambda;
        double mean = 0.0;
        std::vector<double> transformed(n);
        for (std::size_t i = 0; i < n; ++i) {
            transformed[i] = yj_value(column[i], lambda);
            mean += transformed[i];
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : transformed) ss += (v - mean) * (v - mean);
        double std_dev = std::sqrt(ss / static_cast<double>(n - 1));
        if (std_dev < 1e-12) {
            params.constant_features[j] = true;
            std_dev = 1.0;
        }
        params.post_means[j] = mean;
        params.post_stds[j] = std_dev;
    }
    return params;
}

/// (psi_lambda(x) - post_mean) / post_std, per feature.
inline Matrix apply_power(const PowerParams& params, const Matrix& x) {
    if (x.cols() != params.dim()) {
        throw ValidationError("apply_power: feature dimension mismatch");
    }
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < x.cols(); ++j) {
            out(i, j) = (yj_value(x(i, j), params.lambdas[j]) - params.post_means[j]) /
                        params.post_stds[j];
        }
    }
    return out;
}

}  // namespace coralign
