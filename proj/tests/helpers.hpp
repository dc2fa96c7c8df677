#pragma once

#include <cmath>
#include <cstddef>

#include "coralign/linalg.hpp"
#include "coralign/matrix.hpp"
#include "coralign/rng.hpp"

namespace test_helpers {

inline coralign::Matrix random_matrix(coralign::SplitMix64& rng, std::size_t n, std::size_t d) {
    coralign::Matrix m(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) m(i, j) = rng.next_gaussian();
    }
    return m;
}

// SPD test matrix M^T M + I; smallest eigenvalue is at least 1.
inline coralign::SymmetricMatrix random_spd(coralign::SplitMix64& rng, std::size_t d) {
    const coralign::Matrix m = random_matrix(rng, d, d);
    coralign::Matrix s = matmul(transpose(m), m);
    for (std::size_t i = 0; i < d; ++i) s(i, i) += 1.0;
    return coralign::SymmetricMatrix(s);
}

inline coralign::SymmetricMatrix random_symmetric(coralign::SplitMix64& rng, std::size_t d) {
    coralign::Matrix s(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i; j < d; ++j) {
            const double v = rng.next_gaussian();
            s(i, j) = v;
            s(j, i) = v;
        }
    }
    return coralign::SymmetricMatrix(s);
}

inline double max_abs_diff(const coralign::Matrix& a, const coralign::Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
        }
    }
    return worst;
}

inline double relative_frobenius_error(const coralign::Matrix& got,
                                       const coralign::Matrix& want) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < got.rows(); ++i) {
        for (std::size_t j = 0; j < got.cols(); ++j) {
            const double d = got(i, j) - want(i, j);
            num += d * d;
            den += want(i, j) * want(i, j);
        }
    }
    return std::sqrt(num) / std::sqrt(den);
}

}  // namespace test_helpers
