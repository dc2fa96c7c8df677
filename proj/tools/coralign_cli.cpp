// Command-line surface for the domain-adaptation pipeline.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation failure,
// 3 numerical failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "coralign/coralign.hpp"

namespace {

using coralign::LabeledDataset;
using coralign::Matrix;
using coralign::PipelineConfig;
using coralign::TransferRun;

// Stage toggles arrive as --no-* flags so that the paper defaults (all
// stages on) need no flags at all.
struct ConfigFlags {
    PipelineConfig config;
    bool no_power = false;
    bool no_select = false;
    bool no_pca = false;
    bool no_coral = false;
    bool no_align_means = false;
    std::string power_fit_domain = "source_only";
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
    cmd->add_flag("--no-power", flags.no_power, "Disable the power transform stage");
    cmd->add_flag("--no-select", flags.no_select, "Disable ANOVA feature selection");
    cmd->add_flag("--no-pca", flags.no_pca, "Disable joint PCA");
    cmd->add_flag("--no-coral", flags.no_coral, "Disable CORAL alignment");
    cmd->add_option("--k-select", flags.config.k_select,
                    "Features kept by ANOVA top-k selection")
        ->capture_default_str();
    cmd->add_option("--n-components", flags.config.n_components, "PCA components retained")
        ->capture_default_str();
    cmd->add_option("--coral-lambda", flags.config.coral_lambda,
                    "Covariance regularization added before factorization")
        ->capture_default_str();
    cmd->add_flag("--coral-literal-formula", flags.config.coral_literal_formula,
                  "Compose the alignment as L_s^{-1} L_t instead of the "
                  "covariance-matching L_t L_s^{-1}");
    cmd->add_flag("--no-coral-align-means", flags.no_align_means,
                  "Align covariances only, leaving means untouched");
    cmd->add_option("--power-fit-domain", flags.power_fit_domain,
                    "Data the power transform is fitted on")
        ->capture_default_str()
        ->check(CLI::IsMember({"source_only", "joint"}));
    cmd->add_option("--logreg-c", flags.config.logreg_c,
                    "Inverse regularization strength C of the classifier")
        ->capture_default_str();
    cmd->add_option("--threshold", flags.config.threshold,
                    "Decision threshold on the deepfake probability")
        ->capture_default_str();
    cmd->add_option("--seed", flags.config.seed, "Random seed")->capture_default_str();
}

PipelineConfig resolve_config(const ConfigFlags& flags) {
    PipelineConfig config = flags.config;
    config.enable_power = !flags.no_power;
    config.enable_select = !flags.no_select;
    config.enable_pca = !flags.no_pca;
    config.enable_coral = !flags.no_coral;
    config.coral_align_means = !flags.no_align_means;
    config.power_fit_domain = flags.power_fit_domain == "joint"
                                  ? coralign::PowerFitDomain::joint
                                  : coralign::PowerFitDomain::source_only;
    for (const std::string& warning : coralign::validate_config(config)) {
        std::cerr << "warning: " << warning << '\n';
    }
    return config;
}

LabeledDataset read_labeled(const std::string& path, const char* role) {
    LabeledDataset ds = coralign::read_embeddings_csv(path);
    if (!ds.labeled()) {
        throw coralign::ValidationError(std::string(role) + " file " + path +
                                        " must have a label column");
    }
    return ds;
}

// Accepts "a..b" (inclusive) or a comma-separated list.
std::vector<std::int64_t> parse_seeds(const std::string& text) {
    const auto parse_one = [&](const std::string& token) {
        try {
            std::size_t used = 0;
            const long long value = std::stoll(token, &used);
            if (used != token.size()) {
                throw std::invalid_argument(token);
            }
            return static_cast<std::int64_t>(value);
        } catch (const std::exception&) {
            throw coralign::ValidationError("--seeds: cannot parse '" + token + "'");
        }
    };
    std::vector<std::int64_t> seeds;
    const std::size_t dots = text.find("..", 1);  // skip a leading sign
    if (dots != std::string::npos) {
        const std::int64_t lo = parse_one(text.substr(0, dots));
        const std::int64_t hi = parse_one(text.substr(dots + 2));
        if (lo > hi) {
            throw coralign::ValidationError("--seeds: empty range " + text);
        }
        if (hi - lo >= 10000) {
            throw coralign::ValidationError("--seeds: range too large");
        }
        for (std::int64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::size_t end = comma == std::string::npos ? text.size() : comma;
        seeds.push_back(parse_one(text.substr(start, end - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return seeds;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const std::string& warning : warnings) {
        std::cerr << "warning: " << warning << '\n';
    }
}

void setup_split(CLI::App& app) {
    auto* cmd = app.add_subcommand("split", "Stratified train/test split of a labeled CSV");
    auto input = std::make_shared<std::string>();
    auto train_out = std::make_shared<std::string>();
    auto test_out = std::make_shared<std::string>();
    auto ratio = std::make_shared<double>(0.8);
    auto seed = std::make_shared<std::int64_t>(42);
    cmd->add_option("--input", *input, "Labeled embeddings CSV")->required();
    cmd->add_option("--train-out", *train_out, "Output CSV, training portion")->required();
    cmd->add_option("--test-out", *test_out, "Output CSV, test portion")->required();
    cmd->add_option("--ratio", *ratio, "Training fraction")->capture_default_str();
    cmd->add_option("--seed", *seed, "Random seed")->capture_default_str();
    cmd->callback([=] {
        const LabeledDataset ds = read_labeled(*input, "--input");
        const auto [train, test] = coralign::stratified_split(ds, {*ratio, *seed});
        coralign::write_features_csv(train, *train_out);
        coralign::write_features_csv(test, *test_out);
        std::cout << "split " << ds.size() << " rows into " << train.size() << " train / "
                  << test.size() << " test\n";
    });
}

void setup_synth(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "synth", "Generate a synthetic source/target pair with controlled shift");
    auto spec_path = std::make_shared<std::string>();
    auto source_out = std::make_shared<std::string>();
    auto target_train_out = std::make_shared<std::string>();
    auto target_test_out = std::make_shared<std::string>();
    cmd->add_option("--spec", *spec_path, "Generator spec JSON")->required();
    cmd->add_option("--source-out", *source_out, "Output CSV, labeled source domain")
        ->required();
    cmd->add_option("--target-train-out", *target_train_out,
                    "Output CSV, unlabeled target adaptation set")
        ->required();
    cmd->add_option("--target-test-out", *target_test_out,
                    "Output CSV, labeled target test set")
        ->required();
    cmd->callback([=] {
        const coralign::SynthCommandSpec spec =
            coralign::synth_spec_from_json(coralign::read_json_file(*spec_path));
        auto [source, target] = coralign::generate_synthetic_domains(spec.shift);
        auto [target_adapt, target_test] = coralign::stratified_split(
            target, {spec.target_adaptation_fraction, spec.shift.seed});
        target_adapt.labels.clear();  // the adaptation set is unlabeled by contract
        coralign::write_features_csv(source, *source_out);
        coralign::write_features_csv(target_adapt, *target_train_out);
        coralign::write_features_csv(target_test, *target_test_out);
        std::cout << "wrote " << source.size() << " source, " << target_adapt.size()
                  << " target adaptation, " << target_test.size() << " target test rows\n";
    });
}

void setup_fit(CLI::App& app) {
    auto* cmd = app.add_subcommand("fit", "Fit the adaptation pipeline and classifier");
    auto source_path = std::make_shared<std::string>();
    auto target_path = std::make_shared<std::string>();
    auto model_out = std::make_shared<std::string>();
    auto flags = std::make_shared<ConfigFlags>();
    cmd->add_option("--source", *source_path, "Labeled source-domain CSV")->required();
    cmd->add_option("--target", *target_path, "Unlabeled target-domain CSV")->required();
    cmd->add_option("--model-out", *model_out, "Output model JSON")->required();
    add_config_flags(cmd, *flags);
    cmd->callback([=] {
        const PipelineConfig config = resolve_config(*flags);
        TransferRun run;
        run.source = read_labeled(*source_path, "--source");
        LabeledDataset target = coralign::read_embeddings_csv(*target_path);
        if (target.labeled()) {
            std::cerr << "note: ignoring label column in " << *target_path
                      << " (fitting never sees target labels)\n";
        }
        run.target_unlabeled = std::move(target.features);
        const coralign::FittedPipeline fp = coralign::fit_pipeline(run, config);
        print_warnings(fp.warnings);
        coralign::write_json_file(*model_out, coralign::to_json(fp));
        std::cout << "fitted pipeline: input dim " << fp.input_dim() << ", classifier dim "
                  << fp.model.dim() << (fp.model.converged ? "" : " (not converged)")
                  << ", wrote " << *model_out << '\n';
    });
}

void setup_eval(CLI::App& app) {
    auto* cmd = app.add_subcommand("eval", "Evaluate a fitted model on a labeled test CSV");
    auto model_path = std::make_shared<std::string>();
    auto test_path = std::make_shared<std::string>();
    auto report_out = std::make_shared<std::string>();
    cmd->add_option("--model", *model_path, "Model JSON from fit")->required();
    cmd->add_option("--test", *test_path, "Labeled test CSV")->required();
    cmd->add_option("--report-out", *report_out, "Output metrics JSON")->required();
    cmd->callback([=] {
        const coralign::FittedPipeline fp =
            coralign::pipeline_from_json(coralign::read_json_file(*model_path));
        const LabeledDataset test = read_labeled(*test_path, "--test");
        const coralign::MetricsReport report = coralign::evaluate(fp, test);
        if (report.roc_undefined) {
            std::cerr << "warning: single-class test set; auc/eer omitted\n";
        }
        coralign::write_json_file(*report_out, coralign::to_json(report));
        std::printf("accuracy %.4f", report.accuracy);
        if (report.auc) std::printf("  auc %.4f", *report.auc);
        if (report.eer) std::printf("  eer %.4f", *report.eer);
        std::printf("\n");
        std::cout << "wrote " << *report_out << '\n';
    });
}

std::string csv_sibling(const std::string& json_path) {
    const std::string suffix = ".json";
    if (json_path.size() > suffix.size() &&
        json_path.compare(json_path.size() - suffix.size(), suffix.size(), suffix) == 0) {
        return json_path.substr(0, json_path.size() - suffix.size()) + ".csv";
    }
    return json_path + ".csv";
}

void setup_ablate(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "ablate", "Run the cumulative stage-enabling ladder and report per-stage deltas");
    auto source_path = std::make_shared<std::string>();
    auto target_path = std::make_shared<std::string>();
    auto test_path = std::make_shared<std::string>();
    auto report_out = std::make_shared<std::string>();
    auto flags = std::make_shared<ConfigFlags>();
    cmd->add_option("--source", *source_path, "Labeled source-domain CSV")->required();
    cmd->add_option("--target", *target_path, "Unlabeled target adaptation CSV")->required();
    cmd->add_option("--test", *test_path, "Labeled target test CSV")->required();
    cmd->add_option("--report-out", *report_out, "Output report JSON (CSV written alongside)")
        ->required();
    add_config_flags(cmd, *flags);
    cmd->callback([=] {
        const PipelineConfig config = resolve_config(*flags);
        TransferRun run;
        run.source = read_labeled(*source_path, "--source");
        LabeledDataset target = coralign::read_embeddings_csv(*target_path);
        run.target_unlabeled = std::move(target.features);
        run.target_test = read_labeled(*test_path, "--test");
        const coralign::AblationReport report = coralign::run_ablation(run, config);

        coralign::write_json_file(*report_out, coralign::to_json(report));
        coralign::write_text_file(csv_sibling(*report_out),
                                  coralign::ablation_to_csv(report));

        double delta_sum = 0.0;
        for (const coralign::AblationRow& row : report.rows) {
            delta_sum += row.delta_accuracy;
            std::printf("%-24s accuracy %.4f", row.label.c_str(), row.metrics.accuracy);
            if (row.metrics.auc) std::printf("  auc %.4f", *row.metrics.auc);
            if (row.metrics.eer) std::printf("  eer %.4f", *row.metrics.eer);
            std::printf("  delta %+.4f\n", row.delta_accuracy);
        }
        std::printf("deltas sum to %+.4f; final minus baseline %+.4f\n", delta_sum,
                    report.total_delta_accuracy);
        std::cout << "wrote " << *report_out << " and " << csv_sibling(*report_out) << '\n';
    });
}

void setup_multiseed(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "multiseed", "Baseline-vs-full comparison across seeds with a paired t-test");
    auto source_path = std::make_shared<std::string>();
    auto target_path = std::make_shared<std::string>();
    auto seeds_text = std::make_shared<std::string>("0..9");
    auto ratio = std::make_shared<double>(0.8);
    auto transductive = std::make_shared<bool>(false);
    auto report_out = std::make_shared<std::string>();
    auto flags = std::make_shared<ConfigFlags>();
    cmd->add_option("--source", *source_path, "Labeled source-domain CSV")->required();
    cmd->add_option("--target", *target_path, "Labeled target-domain CSV (re-split per seed)")
        ->required();
    cmd->add_option("--seeds", *seeds_text, "Seed list: a..b or comma-separated")
        ->capture_default_str();
    cmd->add_option("--ratio", *ratio,
                    "Per-seed train fraction (source) and adaptation fraction (target)")
        ->capture_default_str();
    cmd->add_flag("--transductive", *transductive,
                  "Adapt on all target features, test rows included (still unlabeled); "
                  "default keeps adaptation and test rows disjoint");
    cmd->add_option("--report-out", *report_out, "Output report JSON")->required();
    add_config_flags(cmd, *flags);
    cmd->callback([=] {
        const PipelineConfig config = resolve_config(*flags);
        const std::vector<std::int64_t> seeds = parse_seeds(*seeds_text);
        const LabeledDataset source = read_labeled(*source_path, "--source");
        const LabeledDataset target = read_labeled(*target_path, "--target");

        const auto factory = [&](std::int64_t seed) {
            TransferRun run;
            run.source = coralign::stratified_split(source, {*ratio, seed}).first;
            auto [adapt, test] = coralign::stratified_split(target, {*ratio, seed});
            run.target_unlabeled =
                *transductive ? target.features : std::move(adapt.features);
            run.target_test = std::move(test);
            return run;
        };
        const coralign::MultiSeedReport report =
            coralign::multi_seed_run(factory, config, seeds);
        print_warnings(report.warnings);
        coralign::write_json_file(*report_out, coralign::to_json(report));

        std::printf("baseline %.4f +- %.4f   full %.4f +- %.4f\n", report.baseline_mean,
                    report.baseline_sd, report.full_mean, report.full_sd);
        if (report.t_test) {
            std::printf("paired t(%zu) = %.3f%s\n", report.t_test->degrees_freedom,
                        report.t_test->t_statistic,
                        report.t_test->significant_at_001  ? ", p < 0.001"
                        : report.t_test->significant_at_01 ? ", p < 0.01"
                        : report.t_test->significant_at_05 ? ", p < 0.05"
                                                           : "");
        }
        std::cout << "wrote " << *report_out << '\n';
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Unsupervised domain adaptation for speech-embedding deepfake detection:\n"
        "power transform, ANOVA selection, joint PCA, CORAL alignment, and a\n"
        "weighted logistic regression, with split/synth/eval/ablation tooling."};
    app.require_subcommand(1);
    setup_split(app);
    setup_synth(app);
    setup_fit(app);
    setup_eval(app);
    setup_ablate(app);
    setup_multiseed(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const coralign::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const coralign::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const coralign::NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
