#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coralign/dataset.hpp"
#include "coralign/error.hpp"
#include "coralign/matrix.hpp"
#include "coralign/metrics.hpp"
#include "coralign/pipeline.hpp"
#include "coralign/stats.hpp"

namespace coralign {

// Insertion-ordered documents keep output bytes stable across runs.
using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty()) {
        throw ValidationError("model file: expected a non-empty 2-d array");
    }
    Matrix m(j.size(), j[0].size());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (j[i].size() != m.cols()) {
            throw ValidationError("model file: ragged 2-d array");
        }
        for (std::size_t k = 0; k < m.cols(); ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

}  // namespace detail

inline Json to_json(const PipelineConfig& config) {
    Json j;
    j["enable_power"] = config.enable_power;
    j["enable_select"] = config.enable_select;
    j["enable_pca"] = config.enable_pca;
    j["enable_coral"] = config.enable_coral;
    j["k_select"] = config.k_select;
    j["n_components"] = config.n_components;
    j["coral_lambda"] = config.coral_lambda;
    j["coral_literal_formula"] = config.coral_literal_formula;
    j["coral_align_means"] = config.coral_align_means;
    j["power_fit_domain"] =
        config.power_fit_domain == PowerFitDomain::joint ? "joint" : "source_only";
    j["logreg_c"] = config.logreg_c;
    j["threshold"] = config.threshold;
    j["seed"] = config.seed;
    return j;
}

inline PipelineConfig config_from_json(const Json& j) try {
    PipelineConfig config;
    config.enable_power = j.at("enable_power").get<bool>();
    config.enable_select = j.at("enable_select").get<bool>();
    config.enable_pca = j.at("enable_pca").get<bool>();
    config.enable_coral = j.at("enable_coral").get<bool>();
    config.k_select = j.at("k_select").get<std::size_t>();
    config.n_components = j.at("n_components").get<std::size_t>();
    config.coral_lambda = j.at("coral_lambda").get<double>();
    config.coral_literal_formula = j.at("coral_literal_formula").get<bool>();
    config.coral_align_means = j.at("coral_align_means").get<bool>();
    const std::string domain = j.at("power_fit_domain").get<std::string>();
    if (domain == "source_only") {
        config.power_fit_domain = PowerFitDomain::source_only;
    } else if (domain == "joint") {
        config.power_fit_domain = PowerFitDomain::joint;
    } else {
        throw ValidationError("config: power_fit_domain must be source_only or joint");
    }
    config.logreg_c = j.at("logreg_c").get<double>();
    config.threshold = j.at("threshold").get<double>();
    config.seed = j.at("seed").get<std::int64_t>();
    return config;
} catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
}

inline Json to_json(const FittedPipeline& fp) {
    Json j;
    j["format_version"] = kFormatVersion;
    j["config"] = to_json(fp.config);
    if (fp.power) {
        Json stage;
        stage["lambdas"] = fp.power->lambdas;
        stage["post_means"] = fp.power->post_means;
        stage["post_stds"] = fp.power->post_stds;
        stage["constant_features"] = fp.power->constant_features;
        j["power"] = std::move(stage);
    }
    if (fp.selection) {
        Json stage;
        stage["indices"] = fp.selection->indices;
        stage["scores"] = fp.selection->scores;
        stage["clamped"] = fp.selection->clamped;
        j["selection"] = std::move(stage);
    }
    if (fp.pca) {
        Json stage;
        stage["mean"] = fp.pca->mean;
        stage["components"] = detail::matrix_to_json(fp.pca->components);
        stage["explained_variance"] = fp.pca->explained_variance;
        stage["clamped"] = fp.pca->clamped;
        stage["low_sample_warning"] = fp.pca->low_sample_warning;
        j["pca"] = std::move(stage);
    }
    if (fp.coral) {
        Json stage;
        stage["transform"] = detail::matrix_to_json(fp.coral->transform);
        stage["source_mean"] = fp.coral->source_mean;
        stage["target_mean"] = fp.coral->target_mean;
        stage["lambda"] = fp.coral->lambda;
        stage["used_fallback"] = fp.coral->used_fallback;
        stage["literal_formula"] = fp.coral->literal_formula;
        j["coral"] = std::move(stage);
    }
    Json model;
    model["weights"] = fp.model.weights;
    model["intercept"] = fp.model.intercept;
    model["c_inverse_reg"] = fp.model.c_inverse_reg;
    model["converged"] = fp.model.converged;
    model["iterations"] = fp.model.iterations;
    j["model"] = std::move(model);
    j["warnings"] = fp.warnings;
    return j;
}

inline FittedPipeline pipeline_from_json(const Json& j) try {
    if (!j.contains("format_version") || j.at("format_version").get<int>() != kFormatVersion) {
        throw ValidationError("model file: unsupported format_version");
    }
    FittedPipeline fp;
    fp.config = config_from_json(j.at("config"));
    if (j.contains("power")) {
        const Json& stage = j.at("power");
        PowerParams params;
        params.lambdas = stage.at("lambdas").get<std::vector<double>>();
        params.post_means = stage.at("post_means").get<std::vector<double>>();
        params.post_stds = stage.at("post_stds").get<std::vector<double>>();
        params.constant_features = stage.at("constant_features").get<std::vector<bool>>();
        fp.power = std::move(params);
    }
    if (j.contains("selection")) {
        const Json& stage = j.at("selection");
        SelectedFeatures selection;
        selection.indices = stage.at("indices").get<std::vector<std::size_t>>();
        selection.scores = stage.at("scores").get<std::vector<double>>();
        selection.clamped = stage.at("clamped").get<bool>();
        fp.selection = std::move(selection);
    }
    if (j.contains("pca")) {
        const Json& stage = j.at("pca");
        PcaParams params;
        params.mean = stage.at("mean").get<std::vector<double>>();
        params.components = detail::matrix_from_json(stage.at("components"));
        params.explained_variance = stage.at("explained_variance").get<std::vector<double>>();
        params.clamped = stage.at("clamped").get<bool>();
        params.low_sample_warning = stage.at("low_sample_warning").get<bool>();
        fp.pca = std::move(params);
    }
    if (j.contains("coral")) {
        const Json& stage = j.at("coral");
        CoralParams params;
        params.transform = detail::matrix_from_json(stage.at("transform"));
        params.source_mean = stage.at("source_mean").get<std::vector<double>>();
        params.target_mean = stage.at("target_mean").get<std::vector<double>>();
        params.lambda = stage.at("lambda").get<double>();
        params.used_fallback = stage.at("used_fallback").get<bool>();
        params.literal_formula = stage.at("literal_formula").get<bool>();
        fp.coral = std::move(params);
    }
    const Json& model = j.at("model");
    fp.model.weights = model.at("weights").get<std::vector<double>>();
    fp.model.intercept = model.at("intercept").get<double>();
    fp.model.c_inverse_reg = model.at("c_inverse_reg").get<double>();
    fp.model.converged = model.at("converged").get<bool>();
    fp.model.iterations = model.at("iterations").get<std::size_t>();
    fp.warnings = j.at("warnings").get<std::vector<std::string>>();
    return fp;
} catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
}

inline Json to_json(const MetricsReport& report) {
    Json j;
    j["accuracy"] = report.accuracy;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["f1"] = report.f1;
    if (report.auc) j["auc"] = *report.auc;
    if (report.eer) j["eer"] = *report.eer;
    j["acc_class0"] = report.acc_class0;
    j["acc_class1"] = report.acc_class1;
    Json confusion;
    confusion["tp"] = report.confusion.tp;
    confusion["fp"] = report.confusion.fp;
    confusion["tn"] = report.confusion.tn;
    confusion["fn"] = report.confusion.fn;
    j["confusion"] = std::move(confusion);
    std::vector<std::string> warnings;
    if (report.precision_undefined) {
        warnings.push_back("precision undefined (no positive predictions); reported as 0");
    }
    if (report.recall_undefined) {
        warnings.push_back("recall undefined (no positive samples); reported as 0");
    }
    if (report.acc_class0_undefined) {
        warnings.push_back("acc_class0 undefined (no negative samples); reported as 0");
    }
    if (report.roc_undefined) {
        warnings.push_back("single-class test set: auc and eer omitted");
    }
    if (!warnings.empty()) j["warnings"] = warnings;
    return j;
}

inline Json to_json(const TTestResult& result) {
    Json j;
    j["mean_diff"] = result.mean_diff;
    j["sd_diff"] = result.sd_diff;
    j["t_statistic"] = result.t_statistic;
    j["degrees_freedom"] = result.degrees_freedom;
    j["significant_at_05"] = result.significant_at_05;
    j["significant_at_01"] = result.significant_at_01;
    j["significant_at_001"] = result.significant_at_001;
    return j;
}

inline Json to_json(const AblationReport& report) {
    Json j;
    Json rows = Json::array();
    for (const AblationRow& row : report.rows) {
        Json r;
        r["label"] = row.label;
        r["metrics"] = to_json(row.metrics);
        r["delta_accuracy"] = row.delta_accuracy;
        if (row.delta_auc) r["delta_auc"] = *row.delta_auc;
        if (row.delta_eer) r["delta_eer"] = *row.delta_eer;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    j["total_delta_accuracy"] = report.total_delta_accuracy;
    return j;
}

/// Flat companion table: label,accuracy,auc,eer,delta_accuracy. An
/// undefined auc/eer leaves its field empty.
inline std::string ablation_to_csv(const AblationReport& report) {
    const auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    std::string out = "label,accuracy,auc,eer,delta_accuracy\n";
    for (const AblationRow& row : report.rows) {
        out += row.label;
        out += ',' + fmt(row.metrics.accuracy);
        out += ',';
        if (row.metrics.auc) out += fmt(*row.metrics.auc);
        out += ',';
        if (row.metrics.eer) out += fmt(*row.metrics.eer);
        out += ',' + fmt(row.delta_accuracy);
        out += '\n';
    }
    return out;
}

inline Json to_json(const MultiSeedReport& report) {
    Json j;
    Json rows = Json::array();
    for (const SeedOutcome& outcome : report.rows) {
        Json r;
        r["seed"] = outcome.seed;
        r["baseline_accuracy"] = outcome.baseline_accuracy;
        r["full_accuracy"] = outcome.full_accuracy;
        rows.push_back(std::move(r));
    }
    j["rows"] = std::move(rows);
    Json summary;
    summary["baseline_mean"] = report.baseline_mean;
    summary["baseline_sd"] = report.baseline_sd;
    summary["full_mean"] = report.full_mean;
    summary["full_sd"] = report.full_sd;
    j["summary"] = std::move(summary);
    j["t_test"] = report.t_test ? to_json(*report.t_test) : Json(nullptr);
    j["warnings"] = report.warnings;
    return j;
}

/// Input document for the synthetic-domain generator command: the shift
/// parameters plus how much of the target becomes the unlabeled
/// adaptation set (the rest is the labeled test set).
struct SynthCommandSpec {
    SyntheticShiftSpec shift;
    double target_adaptation_fraction = 0.5;
};

inline SynthCommandSpec synth_spec_from_json(const Json& j) try {
    static const char* kKnown[] = {
        "n_source",        "n_target",           "d_informative",
        "d_noise",         "class_separation",   "rotation_strength",
        "translation_strength", "skew_strength", "target_label_fraction",
        "seed",            "target_adaptation_fraction"};
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* key : kKnown) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw ValidationError("synth spec: unknown key '" + item.key() + "'");
        }
    }
    SynthCommandSpec spec;
    spec.shift.n_source = j.at("n_source").get<std::size_t>();
    spec.shift.n_target = j.at("n_target").get<std::size_t>();
    spec.shift.d_informative = j.at("d_informative").get<std::size_t>();
    spec.shift.d_noise = j.value("d_noise", spec.shift.d_noise);
    spec.shift.class_separation = j.value("class_separation", spec.shift.class_separation);
    spec.shift.rotation_strength = j.value("rotation_strength", spec.shift.rotation_strength);
    spec.shift.translation_strength =
        j.value("translation_strength", spec.shift.translation_strength);
    spec.shift.skew_strength = j.value("skew_strength", spec.shift.skew_strength);
    spec.shift.target_label_fraction =
        j.value("target_label_fraction", spec.shift.target_label_fraction);
    spec.shift.seed = j.value("seed", spec.shift.seed);
    spec.target_adaptation_fraction =
        j.value("target_adaptation_fraction", spec.target_adaptation_fraction);
    if (!(spec.target_adaptation_fraction > 0.0 && spec.target_adaptation_fraction < 1.0)) {
        throw ValidationError("synth spec: target_adaptation_fraction must be in (0,1)");
    }
    return spec;
} catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
}

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path + " for writing");
    }
    out << text;
    if (!out) {
        throw IoError("failed writing " + path);
    }
}

}  // namespace coralign
