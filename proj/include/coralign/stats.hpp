#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "coralign/error.hpp"

namespace coralign {

struct TTestResult {
    double mean_diff = 0.0;
    double sd_diff = 0.0;
    double t_statistic = 0.0;
    std::size_t degrees_freedom = 0;
    bool significant_at_05 = false;
    bool significant_at_01 = false;
    bool significant_at_001 = false;
};

namespace detail {

// Two-sided critical values, alpha in {0.05, 0.01, 0.001}, df 1..30.
// df beyond 30 clamps to the last row (conservative: critical values
// only shrink with df).
inline constexpr std::array<std::array<double, 3>, 30> kTCritical = {{
    {12.7062, 63.6567, 636.6192},
    {4.3027, 9.9248, 31.5991},
    {3.1824, 5.8409, 12.9240},
    {2.7764, 4.6041, 8.6103},
    {2.5706, 4.0321, 6.8688},
    {2.4469, 3.7074, 5.9588},
    {2.3646, 3.4995, 5.4079},
    {2.3060, 3.3554, 5.0413},
    {2.2622, 3.2498, 4.7809},
    {2.2281, 3.1693, 4.5869},
    {2.2010, 3.1058, 4.4370},
    {2.1788, 3.0545, 4.3178},
    {2.1604, 3.0123, 4.2208},
    {2.1448, 2.9768, 4.1405},
    {2.1314, 2.9467, 4.0728},
    {2.1199, 2.9208, 4.0150},
    {2.1098, 2.8982, 3.9651},
    {2.1009, 2.8784, 3.9216},
    {2.0930, 2.8609, 3.8834},
    {2.0860, 2.8453, 3.8495},
    {2.0796, 2.8314, 3.8193},
    {2.0739, 2.8188, 3.7921},
    {2.0687, 2.8073, 3.7676},
    {2.0639, 2.7969, 3.7454},
    {2.0595, 2.7874, 3.7251},
    {2.0555, 2.7787, 3.7066},
    {2.0518, 2.7707, 3.6896},
    {2.0484, 2.7633, 3.6739},
    {2.0452, 2.7564, 3.6594},
    {2.0423, 2.7500, 3.6460},
}};

inline const std::array<double, 3>& t_critical_row(std::size_t df) {
    if (df < 1) {
        throw ValidationError("t_critical_row: df must be at least 1");
    }
    const std::size_t index = df <= kTCritical.size() ? df - 1 : kTCritical.size() - 1;
    return kTCritical[index];
}

}  // namespace detail

/// Two-sided paired t-test on d = a - b, sd with divisor n - 1.
/// Zero-variance differences are an error, not an infinite statistic.
inline TTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ValidationError("paired_t_test: length mismatch");
    }
    const std::size_t n = a.size();
    if (n < 2) {
        throw ValidationError("paired_t_test: need at least 2 pairs");
    }

    TTestResult result;
    result.degrees_freedom = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
        result.mean_diff += a[i] - b[i];
    }
    result.mean_diff /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = (a[i] - b[i]) - result.mean_diff;
        ss += dev * dev;
    }
    result.sd_diff = std::sqrt(ss / static_cast<double>(n - 1));
    if (result.sd_diff <= 0.0) {
        throw DegenerateVarianceError("paired_t_test: differences have zero variance");
    }
    result.t_statistic =
        result.mean_diff / (result.sd_diff / std::sqrt(static_cast<double>(n)));

    const auto& critical = detail::t_critical_row(result.degrees_freedom);
    const double abs_t = std::abs(result.t_statistic);
    result.significant_at_05 = abs_t > critical[0];
    result.significant_at_01 = abs_t > critical[1];
    result.significant_at_001 = abs_t > critical[2];
    return result;
}

}  // namespace coralign
