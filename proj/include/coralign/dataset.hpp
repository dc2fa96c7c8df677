#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "coralign/error.hpp"
#include "coralign/linalg.hpp"
#include "coralign/matrix.hpp"
#include "coralign/rng.hpp"

namespace coralign {

/// Sample matrix plus optional binary labels (0 = bona fide, 1 = deepfake)
/// and per-row ids. `labels` is empty for unlabeled (adaptation) data,
/// otherwise holds one label per row.
struct LabeledDataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> ids;

    bool labeled() const { return !labels.empty(); }
    std::size_t size() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

struct SplitSpec {
    double train_fraction = 0.8;
    std::int64_t seed = 42;
};

struct SyntheticShiftSpec {
    std::size_t n_source = 0;
    std::size_t n_target = 0;
    std::size_t d_informative = 0;
    std::size_t d_noise = 0;
    double class_separation = 3.0;
    double rotation_strength = 0.0;
    double translation_strength = 0.0;
    double skew_strength = 0.0;
    double target_label_fraction = 0.5;
    std::int64_t seed = 42;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline double parse_double(std::string_view tok, std::size_t line_no) {
    double value = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) {
        throw ValidationError("CSV parse error at line " + std::to_string(line_no) +
                              ": bad numeric value '" + std::string(tok) + "'");
    }
    return value;
}

inline std::vector<std::string> synthesized_ids(std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = std::to_string(i);
    return ids;
}

// Round-half-up per-class test count, clamped so both partitions stay
// nonempty within the class.
inline std::size_t test_count_for_class(std::size_t n_c, double train_fraction) {
    const double want = static_cast<double>(n_c) * (1.0 - train_fraction);
    auto count = static_cast<std::size_t>(std::floor(want + 0.5));
    if (count < 1) count = 1;
    if (count > n_c - 1) count = n_c - 1;
    return count;
}

inline LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.features = Matrix(rows.size(), ds.dim());
    out.ids.reserve(rows.size());
    if (ds.labeled()) out.labels.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t r = rows[i];
        for (std::size_t j = 0; j < ds.dim(); ++j) out.features(i, j) = ds.features(r, j);
        out.ids.push_back(ds.ids.empty() ? std::to_string(r) : ds.ids[r]);
        if (ds.labeled()) out.labels.push_back(ds.labels[r]);
    }
    return out;
}

// Modified Gram-Schmidt on columns; m must have full column rank.
inline Matrix orthonormalize_columns(Matrix m) {
    const std::size_t n = m.rows();
    for (std::size_t k = 0; k < m.cols(); ++k) {
        for (std::size_t prev = 0; prev < k; ++prev) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += m(i, prev) * m(i, k);
            for (std::size_t i = 0; i < n; ++i) m(i, k) -= dot * m(i, prev);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += m(i, k) * m(i, k);
        norm = std::sqrt(norm);
        if (norm < 1e-12) {
            throw NumericalError("orthonormalize_columns: rank-deficient input");
        }
        for (std::size_t i = 0; i < n; ++i) m(i, k) /= norm;
    }
    return m;
}

// Eigenvalue ratios of the within-class correlation blocks, and the
// largest principal angle of the synthetic rotation at strength 1.
// kThetaMax stays below the point where any rotation plane at the
// documented strengths crosses pi/2, past which a covariance-matched
// alignment can no longer pick the sign of the plane.
constexpr double kInformativeSpread = 256.0;
constexpr double kNoiseSpread = 1024.0;
constexpr double kThetaMax = 1.8849555921538759;  // 0.6 * pi
constexpr double kOffsetBias = -0.75;

/// Coloring factor F such that F F^T is a correlation matrix (exact unit
/// diagonal) with a geometric eigenvalue profile spanning `spread`, in a
/// seeded random eigenbasis.
inline Matrix correlation_factor(std::size_t k, double spread, std::uint64_t seed,
                                 const std::string& tag) {
    if (k == 1) {
        Matrix f(1, 1);
        f(0, 0) = 1.0;
        return f;
    }
    SplitMix64 rng(seed, tag);
    Matrix g(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) g(i, j) = rng.next_gaussian();
    }
    const Matrix q = orthonormalize_columns(std::move(g));
    std::vector<double> lam(k);
    for (std::size_t i = 0; i < k; ++i) {
        lam[i] = std::pow(spread, 1.0 - static_cast<double>(i) / static_cast<double>(k - 1));
    }
    Matrix c(k, k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            double sum = 0.0;
            for (std::size_t m = 0; m < k; ++m) sum += q(i, m) * lam[m] * q(j, m);
            c(i, j) = sum;
            c(j, i) = sum;
        }
    }
    std::vector<double> scale(k);
    for (std::size_t i = 0; i < k; ++i) scale[i] = 1.0 / std::sqrt(c(i, i));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            const double v = c(i, j) * scale[i] * scale[j];
            c(i, j) = v;
            c(j, i) = v;
        }
        c(i, i) = 1.0;
    }
    return cholesky(SymmetricMatrix(c)).as_matrix();
}

/// exp(A) by power series. Callers scale A so its spectral norm is at
/// most ~2, where 40 terms are past double round-off.
inline Matrix matrix_exponential(const Matrix& a) {
    const std::size_t d = a.rows();
    Matrix result = Matrix::identity(d);
    Matrix term = Matrix::identity(d);
    for (int k = 1; k <= 40; ++k) {
        term = matmul(term, a);
        const double inv = 1.0 / static_cast<double>(k);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                term(i, j) *= inv;
                result(i, j) += term(i, j);
            }
        }
    }
    return result;
}

// Class-1 offset in the whitened informative coordinates: weights follow
// the coloring factor's column norms raised to kOffsetBias (loading the
// separation toward the low-variance directions of the correlation), and
// the vector norm is exactly class_separation, which makes the class
// separation exactly class_separation in within-class Mahalanobis
// distance, supported on the informative dimensions only.
inline std::vector<double> class_offset(const Matrix& f_informative, double class_separation) {
    const std::size_t k = f_informative.cols();
    std::vector<double> offset(k);
    double norm_sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double col_sq = 0.0;
        for (std::size_t i = 0; i < k; ++i) col_sq += f_informative(i, j) * f_informative(i, j);
        offset[j] = std::pow(std::sqrt(col_sq), kOffsetBias);
        norm_sq += offset[j] * offset[j];
    }
    const double scale = class_separation / std::sqrt(norm_sq);
    for (double& v : offset) v *= scale;
    return offset;
}

// Samples one domain: within-class draws are colored by the shared
// correlation factors, class 1 is offset by `offset` in the whitened
// informative coordinates, and noise dimensions carry no label
// information. Row draws are label-block ordered, then rows are shuffled
// by a separate stream.
inline LabeledDataset make_gaussian_domain(const SyntheticShiftSpec& spec, std::size_t n,
                                           double label_fraction, std::string_view tag,
                                           const Matrix& f_informative, const Matrix& f_noise,
                                           const std::vector<double>& offset) {
    const std::size_t d_inf = spec.d_informative;
    const std::size_t d_noi = spec.d_noise;
    const std::size_t d = d_inf + d_noi;
    std::size_t n1 = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * label_fraction + 0.5));
    if (n1 < 1) n1 = 1;
    if (n1 > n - 1) n1 = n - 1;
    const std::size_t n0 = n - n1;

    LabeledDataset ds;
    ds.features = Matrix(n, d);
    ds.labels.resize(n);
    SplitMix64 rng(static_cast<std::uint64_t>(spec.seed), tag);
    std::vector<double> z(d_inf);
    std::vector<double> w(d_noi);
    for (std::size_t i = 0; i < n; ++i) {
        const int label = i < n0 ? 0 : 1;
        ds.labels[i] = label;
        for (std::size_t j = 0; j < d_inf; ++j) {
            z[j] = rng.next_gaussian() + (label == 1 ? offset[j] : 0.0);
        }
        for (std::size_t j = 0; j < d_noi; ++j) w[j] = rng.next_gaussian();
        for (std::size_t r = 0; r < d_inf; ++r) {
            double sum = 0.0;
            for (std::size_t j = 0; j <= r; ++j) sum += f_informative(r, j) * z[j];
            ds.features(i, r) = sum;
        }
        for (std::size_t r = 0; r < d_noi; ++r) {
            double sum = 0.0;
            for (std::size_t j = 0; j <= r; ++j) sum += f_noise(r, j) * w[j];
            ds.features(i, d_inf + r) = sum;
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 order_rng(static_cast<std::uint64_t>(spec.seed), std::string(tag) + "_order");
    order_rng.shuffle(order);
    LabeledDataset shuffled = take_rows(ds, order);
    shuffled.ids = synthesized_ids(n);
    return shuffled;
}

}  // namespace detail

/// Read an embedding CSV: header `[id,]f0,...,f{d-1}[,label]`, decimal
/// reals, label in {0,1}, `\n` separated, no quoting. Row order is
/// preserved; missing ids are synthesized as row indices.
inline LabeledDataset read_embeddings_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("CSV schema error: empty file: " + path);
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = detail::split_fields(line);
    std::size_t col = 0;
    const bool has_id = !header.empty() && header[0] == "id";
    if (has_id) col = 1;
    const bool has_label = header.size() > col && header.back() == "label";
    const std::size_t d = header.size() - col - (has_label ? 1 : 0);
    if (d == 0) {
        throw ValidationError("CSV schema error: no feature columns in header of " + path);
    }
    for (std::size_t j = 0; j < d; ++j) {
        const std::string expected = "f" + std::to_string(j);
        if (header[col + j] != expected) {
            throw ValidationError("CSV schema error: expected column '" + expected +
                                  "', found '" + std::string(header[col + j]) + "'");
        }
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::vector<std::string> ids;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = detail::split_fields(line);
        if (fields.size() != header.size()) {
            throw ValidationError("CSV schema error at line " + std::to_string(line_no) +
                                  ": expected " + std::to_string(header.size()) +
                                  " fields, found " + std::to_string(fields.size()));
        }
        std::size_t f = 0;
        if (has_id) ids.emplace_back(fields[f++]);
        for (std::size_t j = 0; j < d; ++j) {
            values.push_back(detail::parse_double(fields[f++], line_no));
        }
        if (has_label) {
            const std::string_view tok = fields[f];
            if (tok == "0") {
                labels.push_back(0);
            } else if (tok == "1") {
                labels.push_back(1);
            } else {
                throw ValidationError("CSV parse error at line " + std::to_string(line_no) +
                                      ": label must be 0 or 1, found '" + std::string(tok) + "'");
            }
        }
    }
    const std::size_t n = values.size() / d;
    if (n == 0) {
        throw ValidationError("CSV schema error: no data rows in " + path);
    }

    LabeledDataset ds;
    ds.features = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = values[i * d + j];
    }
    ds.labels = std::move(labels);
    ds.ids = has_id ? std::move(ids) : detail::synthesized_ids(n);
    return ds;
}

/// Write the canonical CSV. Values use 17 significant digits so a
/// read-back reproduces every double exactly.
inline void write_features_csv(const LabeledDataset& ds, const std::string& path) {
    if (ds.features.empty()) {
        throw ValidationError("write_features_csv: refusing to write an empty dataset");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    out << "id";
    for (std::size_t j = 0; j < ds.dim(); ++j) out << ",f" << j;
    if (ds.labeled()) out << ",label";
    out << '\n';

    const std::vector<std::string> ids =
        ds.ids.empty() ? detail::synthesized_ids(ds.size()) : ds.ids;
    char buf[64];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ids[i];
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features(i, j));
            out << ',' << buf;
        }
        if (ds.labeled()) out << ',' << ds.labels[i];
        out << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

/// Per-class seeded split. Test counts use round-half-up on
/// n_c * (1 - train_fraction), clamped so both partitions keep at least
/// one sample of every present class. Row order within each partition
/// follows the original dataset order.
inline std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds,
                                                                  const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
        throw ValidationError("stratified_split: train_fraction must be in (0,1)");
    }
    if (!ds.labeled()) {
        throw ValidationError("stratified_split: dataset has no labels");
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);

    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    for (auto& [label, rows] : by_class) {
        if (rows.size() < 2) {
            throw ValidationError("stratified_split: class " + std::to_string(label) +
                                  " has fewer than 2 samples");
        }
        const std::size_t n_test = detail::test_count_for_class(rows.size(), spec.train_fraction);
        SplitMix64 rng(static_cast<std::uint64_t>(spec.seed),
                       "stratified_split/class" + std::to_string(label));
        rng.shuffle(rows);
        test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + n_test);
        train_rows.insert(train_rows.end(), rows.begin() + n_test, rows.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {detail::take_rows(ds, train_rows), detail::take_rows(ds, test_rows)};
}

/// Desk-scale surrogate for a cross-domain transfer: source is two
/// Gaussian class clusters, correlated within class, plus pure-noise
/// dimensions; target repeats the class structure and is then shifted by
/// a bounded-angle random rotation scaled by rotation_strength, a mean
/// translation, and a monotone power skew on a random half of the
/// dimensions. Fully deterministic per seed.
inline std::pair<LabeledDataset, LabeledDataset> generate_synthetic_domains(
    const SyntheticShiftSpec& spec) {
    if (spec.n_source < 2 || spec.n_target < 2) {
        throw ValidationError("generate_synthetic_domains: need at least 2 samples per domain");
    }
    if (spec.d_informative < 1) {
        throw ValidationError("generate_synthetic_domains: d_informative must be at least 1");
    }
    if (spec.rotation_strength < 0.0 || spec.translation_strength < 0.0 ||
        spec.skew_strength < 0.0) {
        throw ValidationError("generate_synthetic_domains: strengths must be nonnegative");
    }
    if (!(spec.target_label_fraction > 0.0 && spec.target_label_fraction < 1.0)) {
        throw ValidationError("generate_synthetic_domains: target_label_fraction must be in (0,1)");
    }

    const auto seed = static_cast<std::uint64_t>(spec.seed);
    const Matrix f_informative =
        detail::correlation_factor(spec.d_informative, detail::kInformativeSpread, seed,
                                   "synth/within_informative");
    const Matrix f_noise =
        spec.d_noise > 0
            ? detail::correlation_factor(spec.d_noise, detail::kNoiseSpread, seed,
                                         "synth/within_noise")
            : Matrix();

    const std::vector<double> offset =
        detail::class_offset(f_informative, spec.class_separation);

    LabeledDataset source = detail::make_gaussian_domain(spec, spec.n_source, 0.5, "synth/source",
                                                         f_informative, f_noise, offset);
    LabeledDataset target =
        detail::make_gaussian_domain(spec, spec.n_target, spec.target_label_fraction,
                                     "synth/target", f_informative, f_noise, offset);
    const std::size_t d = spec.d_informative + spec.d_noise;
    const std::size_t n = target.size();

    // R = exp(s * kThetaMax * K / rho(K)) for random skew-symmetric K,
    // rho its spectral norm: the largest rotation angle over all planes
    // is exactly s * kThetaMax, and s = 0 gives the identity.
    if (spec.rotation_strength > 0.0 && d > 1) {
        SplitMix64 rng(seed, "synth/rotation");
        Matrix g(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.next_gaussian();
        }
        Matrix skew(d, d);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) skew(i, j) = 0.5 * (g(i, j) - g(j, i));
        }
        const Matrix sq = matmul(transpose(skew), skew);
        const double top = sym_eigen(SymmetricMatrix(sq)).eigenvalues.front();
        const double rho = std::sqrt(std::max(top, 0.0));
        if (rho > 0.0) {
            const double scale = spec.rotation_strength * detail::kThetaMax / rho;
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = 0; j < d; ++j) skew(i, j) *= scale;
            }
            const Matrix rotation = detail::matrix_exponential(skew);
            target.features = matmul(target.features, transpose(rotation));
        }
    }

    if (spec.translation_strength > 0.0) {
        SplitMix64 rng(static_cast<std::uint64_t>(spec.seed), "synth/translation");
        std::vector<double> v(d);
        double norm = 0.0;
        for (double& x : v) {
            x = rng.next_gaussian();
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    target.features(i, j) += v[j] * spec.translation_strength / norm;
                }
            }
        }
    }

    if (spec.skew_strength > 0.0) {
        std::vector<std::size_t> dims(d);
        std::iota(dims.begin(), dims.end(), 0);
        SplitMix64 rng(static_cast<std::uint64_t>(spec.seed), "synth/skew_dims");
        rng.shuffle(dims);
        const double expo = 1.0 + spec.skew_strength;
        for (std::size_t k = 0; k < d / 2; ++k) {
            const std::size_t j = dims[k];
            for (std::size_t i = 0; i < n; ++i) {
                const double x = target.features(i, j);
                target.features(i, j) = std::copysign(std::pow(std::abs(x), expo), x);
            }
        }
    }

    return {std::move(source), std::move(target)};
}

}  // namespace coralign
