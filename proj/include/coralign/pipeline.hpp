#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coralign/coral.hpp"
#include "coralign/dataset.hpp"
#include "coralign/error.hpp"
#include "coralign/feature_selection.hpp"
#include "coralign/logistic_regression.hpp"
#include "coralign/matrix.hpp"
#include "coralign/metrics.hpp"
#include "coralign/pca.hpp"
#include "coralign/power_transform.hpp"
#include "coralign/stats.hpp"

namespace coralign {

enum class PowerFitDomain { source_only, joint };

struct PipelineConfig {
    bool enable_power = true;
    bool enable_select = true;
    bool enable_pca = true;
    bool enable_coral = true;
    std::size_t k_select = 512;
    std::size_t n_components = 256;
    double coral_lambda = 1e-6;
    bool coral_literal_formula = false;
    bool coral_align_means = true;
    PowerFitDomain power_fit_domain = PowerFitDomain::source_only;
    double logreg_c = 0.01;
    double threshold = 0.5;
    std::int64_t seed = 42;
};

/// Throws on out-of-range values; returns non-fatal warnings.
inline std::vector<std::string> validate_config(const PipelineConfig& config) {
    if (config.k_select < 1) {
        throw ValidationError("config: k_select must be at least 1");
    }
    if (config.n_components < 1) {
        throw ValidationError("config: n_components must be at least 1");
    }
    if (config.coral_lambda < 0.0) {
        throw ValidationError("config: coral_lambda must be nonnegative");
    }
    if (config.logreg_c <= 0.0) {
        throw ValidationError("config: logreg_c must be positive");
    }
    if (config.threshold < 0.0 || config.threshold > 1.0) {
        throw ValidationError("config: threshold must lie in [0,1]");
    }
    std::vector<std::string> warnings;
    if (config.enable_select && config.enable_pca && config.k_select < config.n_components) {
        warnings.push_back("config: k_select < n_components; PCA will clamp to the "
                           "selected feature count");
    }
    return warnings;
}

/// Source training data plus the unlabeled target sample that drives
/// adaptation. Test labels live only in target_test; no fit operation
/// accepts them.
struct TransferRun {
    LabeledDataset source;
    Matrix target_unlabeled;
    LabeledDataset target_test;
};

struct FittedPipeline {
    PipelineConfig config;
    std::optional<PowerParams> power;
    std::optional<SelectedFeatures> selection;
    std::optional<PcaParams> pca;
    std::optional<CoralParams> coral;
    LogRegModel model;
    std::vector<std::string> warnings;

    std::size_t input_dim() const {
        if (power) return power->dim();
        if (selection) return selection->scores.size();
        if (pca) return pca->input_dim();
        return model.dim();
    }
};

namespace detail {

template <typename Fn>
auto run_stage(const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(stage) + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(std::string(stage) + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(stage) + ": " + e.what());
    }
}

inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
    Matrix out(top.rows() + bottom.rows(), top.cols());
    for (std::size_t i = 0; i < top.rows(); ++i) {
        for (std::size_t j = 0; j < top.cols(); ++j) out(i, j) = top(i, j);
    }
    for (std::size_t i = 0; i < bottom.rows(); ++i) {
        for (std::size_t j = 0; j < bottom.cols(); ++j) out(top.rows() + i, j) = bottom(i, j);
    }
    return out;
}

}  // namespace detail

/// Stage order: power transform (fit on source or pooled domains per
/// power_fit_domain, applied to both) -> ANOVA top-k on source labels
/// (applied to both) -> joint PCA on both -> CORAL source->target
/// (applied to source only) -> weighted logistic regression on the
/// aligned source. Disabled stages drop out and the chain contracts.
inline FittedPipeline fit_pipeline(const TransferRun& run, const PipelineConfig& config) {
    FittedPipeline fp;
    fp.config = config;
    fp.warnings = validate_config(config);

    if (!run.source.labeled()) {
        throw ValidationError("fit_pipeline: source must be labeled");
    }
    if (run.source.dim() != run.target_unlabeled.cols()) {
        throw ValidationError("fit_pipeline: source and target dimensions differ");
    }

    Matrix source = run.source.features;
    Matrix target = run.target_unlabeled;

    if (config.enable_power) {
        detail::run_stage("power_transform", [&] {
            if (config.power_fit_domain == PowerFitDomain::joint) {
                fp.power = fit_power(detail::vstack(source, target));
            } else {
                fp.power = fit_power(source);
            }
            source = apply_power(*fp.power, source);
            target = apply_power(*fp.power, target);
            return 0;
        });
    }
    if (config.enable_select) {
        detail::run_stage("feature_selection", [&] {
            fp.selection = fit_select(source, run.source.labels, config.k_select);
            if (fp.selection->clamped) {
                fp.warnings.push_back("feature_selection: k_select exceeds feature count; "
                                      "kept all " +
                                      std::to_string(fp.selection->indices.size()) +
                                      " features");
            }
            source = apply_select(*fp.selection, source);
            target = apply_select(*fp.selection, target);
            return 0;
        });
    }
    if (config.enable_pca) {
        detail::run_stage("pca", [&] {
            fp.pca = fit_joint_pca(source, target, config.n_components);
            if (fp.pca->clamped) {
                fp.warnings.push_back("pca: n_components clamped to " +
                                      std::to_string(fp.pca->n_components()));
            }
            if (fp.pca->low_sample_warning) {
                fp.warnings.push_back("pca: sample count is low for the retained "
                                      "component count");
            }
            source = apply_pca(*fp.pca, source);
            target = apply_pca(*fp.pca, target);
            return 0;
        });
    }
    if (config.enable_coral) {
        detail::run_stage("coral", [&] {
            CoralOptions options;
            options.literal_formula = config.coral_literal_formula;
            options.align_means = config.coral_align_means;
            fp.coral = fit_coral(source, target, config.coral_lambda, options);
            if (fp.coral->used_fallback) {
                fp.warnings.push_back("coral: covariance factorization fell back to "
                                      "eigendecomposition");
            }
            source = apply_coral(*fp.coral, source);
            return 0;
        });
    }
    detail::run_stage("classifier", [&] {
        const ClassWeights weights = balanced_weights(run.source.labels);
        fp.model = fit_logreg(source, run.source.labels, config.logreg_c, weights);
        return 0;
    });
    return fp;
}

/// Target-side map: power -> select -> PCA. CORAL moves source into the
/// target distribution, so target features never pass through it.
inline Matrix transform_for_inference(const FittedPipeline& fp, const Matrix& x) {
    Matrix out = x;
    if (fp.power) {
        out = apply_power(*fp.power, out);
    }
    if (fp.selection) {
        out = apply_select(*fp.selection, out);
    }
    if (fp.pca) {
        out = apply_pca(*fp.pca, out);
    }
    return out;
}

/// Metrics on a labeled target test set. With a single-class test set
/// the ROC is undefined: auc/eer stay unset and the report is flagged.
inline MetricsReport evaluate(const FittedPipeline& fp, const LabeledDataset& target_test) {
    if (!target_test.labeled()) {
        throw ValidationError("evaluate: test set must be labeled");
    }
    const Matrix transformed = transform_for_inference(fp, target_test.features);
    const std::vector<double> scores = predict_proba(fp.model, transformed);
    std::vector<int> y_hat(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        y_hat[i] = scores[i] >= fp.config.threshold ? 1 : 0;
    }
    MetricsReport report = classification_metrics(target_test.labels, y_hat);

    const bool has0 = std::find(target_test.labels.begin(), target_test.labels.end(), 0) !=
                      target_test.labels.end();
    const bool has1 = std::find(target_test.labels.begin(), target_test.labels.end(), 1) !=
                      target_test.labels.end();
    if (has0 && has1) {
        const RocCurve curve = roc_curve(scores, target_test.labels);
        report.auc = auc(curve);
        report.eer = eer(curve);
    } else {
        report.roc_undefined = true;
    }
    return report;
}

struct AblationRow {
    std::string label;
    MetricsReport metrics;
    double delta_accuracy = 0.0;  // versus the previous rung; 0 for the baseline
    std::optional<double> delta_auc;
    std::optional<double> delta_eer;
};

struct AblationReport {
    std::vector<AblationRow> rows;
    double total_delta_accuracy = 0.0;  // final minus baseline
};

/// The cumulative-enabling ladder, one fit and evaluation per rung,
/// same data and config fields throughout.
inline AblationReport run_ablation(const TransferRun& run, const PipelineConfig& config) {
    struct Rung {
        const char* label;
        bool power, select, pca, coral;
    };
    static constexpr Rung kLadder[] = {
        {"Baseline (Raw Wav2Vec)", false, false, false, false},
        {"+ Power Transform", true, false, false, false},
        {"+ Feature Selection", true, true, false, false},
        {"+ PCA", true, true, true, false},
        {"+ CORAL", true, true, true, true},
    };

    AblationReport report;
    for (const Rung& rung : kLadder) {
        PipelineConfig rung_config = config;
        rung_config.enable_power = rung.power;
        rung_config.enable_select = rung.select;
        rung_config.enable_pca = rung.pca;
        rung_config.enable_coral = rung.coral;

        AblationRow row;
        row.label = rung.label;
        row.metrics = evaluate(fit_pipeline(run, rung_config), run.target_test);
        if (!report.rows.empty()) {
            const MetricsReport& prev = report.rows.back().metrics;
            row.delta_accuracy = row.metrics.accuracy - prev.accuracy;
            if (row.metrics.auc && prev.auc) {
                row.delta_auc = *row.metrics.auc - *prev.auc;
            }
            if (row.metrics.eer && prev.eer) {
                row.delta_eer = *row.metrics.eer - *prev.eer;
            }
        }
        report.rows.push_back(std::move(row));
    }
    report.total_delta_accuracy =
        report.rows.back().metrics.accuracy - report.rows.front().metrics.accuracy;
    return report;
}

struct SeedOutcome {
    std::int64_t seed = 0;
    double baseline_accuracy = 0.0;
    double full_accuracy = 0.0;
};

struct MultiSeedReport {
    std::vector<SeedOutcome> rows;
    double baseline_mean = 0.0;
    double baseline_sd = 0.0;
    double full_mean = 0.0;
    double full_sd = 0.0;
    std::optional<TTestResult> t_test;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::pair<double, double> mean_and_sd(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace detail

/// For each seed (ascending, duplicates rejected) the factory produces a
/// fresh TransferRun; a baseline (all stages off) and the configured full
/// pipeline are fitted and scored. The t-test compares full against
/// baseline accuracies; zero-variance differences downgrade to a warning.
template <typename RunFactory>
MultiSeedReport multi_seed_run(RunFactory&& make_run, const PipelineConfig& config,
                               std::vector<std::int64_t> seeds) {
    if (seeds.size() < 2) {
        throw ValidationError("multi_seed_run: need at least 2 seeds");
    }
    std::sort(seeds.begin(), seeds.end());
    if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end()) {
        throw ValidationError("multi_seed_run: duplicate seed");
    }

    MultiSeedReport report;
    std::vector<double> baseline_accs;
    std::vector<double> full_accs;
    for (std::int64_t seed : seeds) {
        const TransferRun run = make_run(seed);

        PipelineConfig baseline_config = config;
        baseline_config.seed = seed;
        baseline_config.enable_power = false;
        baseline_config.enable_select = false;
        baseline_config.enable_pca = false;
        baseline_config.enable_coral = false;
        PipelineConfig full_config = config;
        full_config.seed = seed;

        SeedOutcome outcome;
        outcome.seed = seed;
        outcome.baseline_accuracy =
            evaluate(fit_pipeline(run, baseline_config), run.target_test).accuracy;
        outcome.full_accuracy =
            evaluate(fit_pipeline(run, full_config), run.target_test).accuracy;
        baseline_accs.push_back(outcome.baseline_accuracy);
        full_accs.push_back(outcome.full_accuracy);
        report.rows.push_back(outcome);
    }

    std::tie(report.baseline_mean, report.baseline_sd) = detail::mean_and_sd(baseline_accs);
    std::tie(report.full_mean, report.full_sd) = detail::mean_and_sd(full_accs);
    try {
        report.t_test = paired_t_test(full_accs, baseline_accs);
    } catch (const DegenerateVarianceError&) {
        report.warnings.push_back("t-test skipped: accuracy differences have zero variance");
    }
    return report;
}

}  // namespace coralign
