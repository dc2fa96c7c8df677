#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "coralign/error.hpp"
#include "coralign/matrix.hpp"

namespace coralign {

/// Result of top-k ANOVA selection: retained original-feature indices
/// (ascending) plus the F-statistic of every original feature.
struct SelectedFeatures {
    std::vector<std::size_t> indices;
    std::vector<double> scores;
    bool clamped = false;  // set when k exceeded the feature count
};

/// Two-class ANOVA F-statistic per feature:
///   F = MS_between / MS_within,
/// MS_between = sum_c n_c (mean_c - mean)^2 / (C-1),
/// MS_within = sum_c sum_i (x_ci - mean_c)^2 / (n-C).
/// Zero within-class variance with nonzero between-class variance gives
/// a +inf sentinel; both (near-)zero gives 0.
inline std::vector<double> anova_f_scores(const Matrix& x, const std::vector<int>& y) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (y.size() != n) {
        throw ValidationError("anova_f_scores: labels/rows length mismatch");
    }
    if (n < 3) {
        throw ValidationError("anova_f_scores: need at least 3 samples");
    }
    std::size_t n1 = 0;
    for (int label : y) n1 += static_cast<std::size_t>(label);
    const std::size_t n0 = n - n1;
    if (n0 == 0 || n1 == 0) {
        throw ValidationError("anova_f_scores: both classes must be present");
    }

    constexpr double kTiny = 1e-24;
    std::vector<double> scores(d);
    std::vector<double> mean0(d, 0.0), mean1(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto& m = y[i] == 0 ? mean0 : mean1;
        for (std::size_t j = 0; j < d; ++j) m[j] += x(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) {
        mean0[j] /= static_cast<double>(n0);
        mean1[j] /= static_cast<double>(n1);
    }
    std::vector<double> within(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& m = y[i] == 0 ? mean0 : mean1;
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = x(i, j) - m[j];
            within[j] += dev * dev;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double grand = (static_cast<double>(n0) * mean0[j] +
                              static_cast<double>(n1) * mean1[j]) / static_cast<double>(n);
        const double ms_between =
            static_cast<double>(n0) * (mean0[j] - grand) * (mean0[j] - grand) +
            static_cast<double>(n1) * (mean1[j] - grand) * (mean1[j] - grand);
        const double ms_within = within[j] / static_cast<double>(n - 2);
        if (ms_within < kTiny) {
            scores[j] = ms_between < kTiny ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            scores[j] = ms_between / ms_within;
        }
    }
    return scores;
}

/// Keep the k highest-F features; ties break toward the lower original
/// index. k > d keeps everything and sets the clamped flag.
inline SelectedFeatures fit_select(const Matrix& x, const std::vector<int>& y, std::size_t k) {
    if (k < 1) {
        throw ValidationError("fit_select: k must be at least 1");
    }
    SelectedFeatures sel;
    sel.scores = anova_f_scores(x, y);
    const std::size_t d = sel.scores.size();
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sel.scores[a] != sel.scores[b]) return sel.scores[a] > sel.scores[b];
        return a < b;
    });
    const std::size_t keep = std::min(k, d);
    sel.clamped = k > d;
    sel.indices.assign(order.begin(), order.begin() + keep);
    std::sort(sel.indices.begin(), sel.indices.end());
    return sel;
}

/// Column projection onto the selected indices; row order and the
/// ascending-index column order are preserved.
inline Matrix apply_select(const SelectedFeatures& sel, const Matrix& x) {
    if (sel.indices.empty()) {
        throw ValidationError("apply_select: empty selection");
    }
    if (x.cols() <= sel.indices.back()) {
        throw ValidationError("apply_select: feature dimension mismatch");
    }
    Matrix out(x.rows(), sel.indices.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < sel.indices.size(); ++j) {
            out(i, j) = x(i, sel.indices[j]);
        }
    }
    return out;
}

}  // namespace coralign
