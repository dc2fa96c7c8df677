#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "coralign/error.hpp"

namespace coralign {

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

/// Vertices of the threshold sweep, one per unique score plus the +inf
/// sentinel; tied scores move together.
struct RocCurve {
    std::vector<double> thresholds;  // descending, thresholds[0] = +inf
    std::vector<double> fpr;
    std::vector<double> tpr;
};

struct MetricsReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double acc_class0 = 0.0;
    double acc_class1 = 0.0;
    std::optional<double> auc;
    std::optional<double> eer;
    ConfusionCounts confusion;
    // 0/0 ratios are reported as 0 and flagged here.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool acc_class0_undefined = false;
    bool roc_undefined = false;  // single-class evaluation; auc/eer unset
};

namespace detail {

inline void check_labels01(const std::vector<int>& y, const char* who) {
    for (int label : y) {
        if (label != 0 && label != 1) {
            throw ValidationError(std::string(who) + ": labels must be 0 or 1");
        }
    }
}

}  // namespace detail

/// Positive class is 1. Ratios with zero denominator become 0 and set
/// the corresponding flag; f1 = 0 when precision + recall = 0.
inline MetricsReport classification_metrics(const std::vector<int>& y,
                                            const std::vector<int>& y_hat) {
    if (y.size() != y_hat.size()) {
        throw ValidationError("classification_metrics: length mismatch");
    }
    if (y.empty()) {
        throw ValidationError("classification_metrics: empty input");
    }
    detail::check_labels01(y, "classification_metrics");
    detail::check_labels01(y_hat, "classification_metrics");

    MetricsReport report;
    ConfusionCounts& cm = report.confusion;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == 1) {
            (y_hat[i] == 1 ? cm.tp : cm.fn) += 1;
        } else {
            (y_hat[i] == 1 ? cm.fp : cm.tn) += 1;
        }
    }
    const double n = static_cast<double>(y.size());
    report.accuracy = static_cast<double>(cm.tp + cm.tn) / n;
    if (cm.tp + cm.fp == 0) {
        report.precision_undefined = true;
    } else {
        report.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    }
    if (cm.tp + cm.fn == 0) {
        report.recall_undefined = true;
    } else {
        report.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    }
    if (report.precision + report.recall > 0.0) {
        report.f1 = 2.0 * report.precision * report.recall / (report.precision + report.recall);
    }
    if (cm.tn + cm.fp == 0) {
        report.acc_class0_undefined = true;
    } else {
        report.acc_class0 = static_cast<double>(cm.tn) / static_cast<double>(cm.tn + cm.fp);
    }
    report.acc_class1 = report.recall;
    return report;
}

/// Threshold sweep at the unique scores, descending, preceded by a +inf
/// sentinel; a sample is positive iff score >= threshold.
inline RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& y) {
    if (scores.size() != y.size()) {
        throw ValidationError("roc_curve: length mismatch");
    }
    detail::check_labels01(y, "roc_curve");
    for (double s : scores) {
        if (!std::isfinite(s)) {
            throw ValidationError("roc_curve: scores must be finite");
        }
    }
    std::size_t n_pos = 0;
    for (int label : y) {
        n_pos += static_cast<std::size_t>(label);
    }
    const std::size_t n_neg = y.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw ValidationError("roc_curve: both classes required");
    }

    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.thresholds.push_back(std::numeric_limits<double>::infinity());
    curve.fpr.push_back(0.0);
    curve.tpr.push_back(0.0);

    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (y[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.thresholds.push_back(threshold);
        curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(n_neg));
        curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(n_pos));
    }
    return curve;
}

/// Trapezoidal area; identical to the tie-adjusted pair-ordering statistic.
inline double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < curve.fpr.size(); ++k) {
        area += (curve.fpr[k + 1] - curve.fpr[k]) * (curve.tpr[k + 1] + curve.tpr[k]) / 2.0;
    }
    return area;
}

/// Rate at which FPR = FNR, located by the sign change of FPR - FNR
/// along the curve and resolved by linear interpolation; an exact
/// vertex hit returns that vertex's value.
inline double eer(const RocCurve& curve) {
    const auto fnr = [&](std::size_t k) { return 1.0 - curve.tpr[k]; };
    for (std::size_t k = 0; k < curve.fpr.size(); ++k) {
        const double diff = curve.fpr[k] - fnr(k);
        if (diff == 0.0) {
            return curve.fpr[k];
        }
        if (diff > 0.0) {
            // Sign change inside the previous segment (diff starts at -1).
            const double prev = curve.fpr[k - 1] - fnr(k - 1);
            const double alpha = -prev / (diff - prev);
            return curve.fpr[k - 1] + alpha * (curve.fpr[k] - curve.fpr[k - 1]);
        }
    }
    throw NumericalError("eer: no crossing found");  // unreachable on a valid curve
}

}  // namespace coralign
