#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "coralign/dataset.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const fs::path kDir = fs::temp_directory_path() / "coralign_cli_tests";

std::string path_of(const std::string& name) { return (kDir / name).string(); }

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

CliResult run_cli(const std::string& args) {
    const std::string out_path = path_of("stdout.txt");
    const std::string err_path = path_of("stderr.txt");
    const std::string command = std::string("\"") + CORALIGN_CLI_PATH + "\" " + args + " >" +
                                out_path + " 2>" + err_path;
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    result.err = slurp(err_path);
    return result;
}

// Generates the shared fixture CSVs once via the synth command itself.
void ensure_fixture() {
    static bool ready = false;
    if (ready) return;
    fs::remove_all(kDir);
    fs::create_directories(kDir);
    std::ofstream spec(path_of("spec.json"));
    spec << R"({
  "n_source": 400,
  "n_target": 400,
  "d_informative": 6,
  "d_noise": 2,
  "class_separation": 2.5,
  "rotation_strength": 0.5,
  "translation_strength": 0.5,
  "skew_strength": 0.3,
  "seed": 7
})";
    spec.close();
    const CliResult r = run_cli("synth --spec " + path_of("spec.json") + " --source-out " +
                                path_of("source.csv") + " --target-train-out " +
                                path_of("target_train.csv") + " --target-test-out " +
                                path_of("target_test.csv"));
    REQUIRE(r.exit_code == 0);
    ready = true;
}

}  // namespace

TEST_CASE("synth writes the three domain files", "[cli]") {
    ensure_fixture();
    CHECK(fs::exists(path_of("source.csv")));
    CHECK(fs::exists(path_of("target_train.csv")));
    CHECK(fs::exists(path_of("target_test.csv")));

    const coralign::LabeledDataset source =
        coralign::read_embeddings_csv(path_of("source.csv"));
    CHECK(source.size() == 400);
    CHECK(source.dim() == 8);
    CHECK(source.labeled());

    // The adaptation set is unlabeled by construction.
    const coralign::LabeledDataset adapt =
        coralign::read_embeddings_csv(path_of("target_train.csv"));
    CHECK(adapt.size() == 200);
    CHECK_FALSE(adapt.labeled());

    const coralign::LabeledDataset test =
        coralign::read_embeddings_csv(path_of("target_test.csv"));
    CHECK(test.size() == 200);
    CHECK(test.labeled());
}

TEST_CASE("synth is deterministic and rejects bad specs", "[cli]") {
    ensure_fixture();
    const CliResult r = run_cli("synth --spec " + path_of("spec.json") + " --source-out " +
                                path_of("source2.csv") + " --target-train-out " +
                                path_of("target_train2.csv") + " --target-test-out " +
                                path_of("target_test2.csv"));
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(path_of("source2.csv")) == slurp(path_of("source.csv")));
    CHECK(slurp(path_of("target_train2.csv")) == slurp(path_of("target_train.csv")));
    CHECK(slurp(path_of("target_test2.csv")) == slurp(path_of("target_test.csv")));

    std::ofstream bad(path_of("bad_spec.json"));
    bad << R"({"n_source": 50, "n_target": 50, "d_informative": 2, "rotation": 1.0})";
    bad.close();
    const CliResult fail = run_cli("synth --spec " + path_of("bad_spec.json") +
                                   " --source-out " + path_of("nope_source.csv") +
                                   " --target-train-out " + path_of("nope_train.csv") +
                                   " --target-test-out " + path_of("nope_test.csv"));
    CHECK(fail.exit_code == 2);
    CHECK(fail.err.find("unknown key") != std::string::npos);
    CHECK_FALSE(fs::exists(path_of("nope_source.csv")));
    CHECK_FALSE(fs::exists(path_of("nope_train.csv")));
    CHECK_FALSE(fs::exists(path_of("nope_test.csv")));
}

TEST_CASE("split produces a deterministic stratified partition", "[cli]") {
    ensure_fixture();
    const std::string base = "split --input " + path_of("source.csv") + " --train-out " +
                             path_of("train.csv") + " --test-out " + path_of("test.csv");
    const CliResult r = run_cli(base);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("320 train / 80 test") != std::string::npos);

    const coralign::LabeledDataset train =
        coralign::read_embeddings_csv(path_of("train.csv"));
    const coralign::LabeledDataset test = coralign::read_embeddings_csv(path_of("test.csv"));
    CHECK(train.size() == 320);
    CHECK(test.size() == 80);

    const CliResult again = run_cli("split --input " + path_of("source.csv") +
                                    " --train-out " + path_of("train_b.csv") +
                                    " --test-out " + path_of("test_b.csv"));
    REQUIRE(again.exit_code == 0);
    CHECK(slurp(path_of("train_b.csv")) == slurp(path_of("train.csv")));
    CHECK(slurp(path_of("test_b.csv")) == slurp(path_of("test.csv")));

    const CliResult bad = run_cli("split --input " + path_of("source.csv") +
                                  " --train-out " + path_of("never_train.csv") +
                                  " --test-out " + path_of("never_test.csv") +
                                  " --ratio 1.0");
    CHECK(bad.exit_code == 2);
    CHECK_FALSE(fs::exists(path_of("never_train.csv")));
    CHECK_FALSE(fs::exists(path_of("never_test.csv")));
}

TEST_CASE("fit writes a complete model document", "[cli]") {
    ensure_fixture();
    const CliResult r = run_cli("fit --source " + path_of("source.csv") + " --target " +
                                path_of("target_train.csv") + " --model-out " +
                                path_of("model.json"));
    REQUIRE(r.exit_code == 0);
    const Json model = Json::parse(slurp(path_of("model.json")));
    CHECK(model.contains("power"));
    CHECK(model.contains("selection"));
    CHECK(model.contains("pca"));
    CHECK(model.contains("coral"));
    CHECK(model.contains("model"));
    CHECK(model.at("format_version").get<int>() == 1);

    const CliResult again = run_cli("fit --source " + path_of("source.csv") + " --target " +
                                    path_of("target_train.csv") + " --model-out " +
                                    path_of("model_b.json"));
    REQUIRE(again.exit_code == 0);
    CHECK(slurp(path_of("model_b.json")) == slurp(path_of("model.json")));
}

TEST_CASE("fit honors stage and size flags", "[cli]") {
    ensure_fixture();
    const CliResult no_coral = run_cli(
        "fit --source " + path_of("source.csv") + " --target " + path_of("target_train.csv") +
        " --model-out " + path_of("model_nc.json") + " --no-coral --k-select 8" +
        " --n-components 8");
    REQUIRE(no_coral.exit_code == 0);
    const Json nc = Json::parse(slurp(path_of("model_nc.json")));
    CHECK_FALSE(nc.contains("coral"));
    CHECK(nc.contains("pca"));

    const CliResult clamped = run_cli(
        "fit --source " + path_of("source.csv") + " --target " + path_of("target_train.csv") +
        " --model-out " + path_of("model_clamp.json") + " --k-select 4 --n-components 16");
    REQUIRE(clamped.exit_code == 0);
    CHECK(clamped.err.find("k_select < n_components") != std::string::npos);
    const Json clamp = Json::parse(slurp(path_of("model_clamp.json")));
    CHECK(clamp.at("pca").at("components").size() == 4);
    CHECK(clamp.at("pca").at("clamped").get<bool>());
    bool warned = false;
    for (const auto& w : clamp.at("warnings")) {
        if (w.get<std::string>().find("k_select < n_components") != std::string::npos) {
            warned = true;
        }
    }
    CHECK(warned);
}

TEST_CASE("eval reports the full metric suite", "[cli]") {
    ensure_fixture();
    const CliResult r = run_cli("eval --model " + path_of("model.json") + " --test " +
                                path_of("target_test.csv") + " --report-out " +
                                path_of("report.json"));
    REQUIRE(r.exit_code == 0);
    const Json report = Json::parse(slurp(path_of("report.json")));
    for (const char* key : {"accuracy", "precision", "recall", "f1", "auc", "eer",
                            "acc_class0", "acc_class1", "confusion"}) {
        CHECK(report.contains(key));
    }

    // Single-class test file: auc/eer omitted, warning recorded.
    coralign::LabeledDataset test = coralign::read_embeddings_csv(path_of("target_test.csv"));
    coralign::LabeledDataset ones;
    std::size_t n1 = 0;
    for (int label : test.labels) n1 += static_cast<std::size_t>(label);
    ones.features = coralign::Matrix(n1, test.dim());
    std::size_t row = 0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (test.labels[i] != 1) continue;
        for (std::size_t j = 0; j < test.dim(); ++j) ones.features(row, j) = test.features(i, j);
        ones.labels.push_back(1);
        ++row;
    }
    coralign::write_features_csv(ones, path_of("test_ones.csv"));
    const CliResult single = run_cli("eval --model " + path_of("model.json") + " --test " +
                                     path_of("test_ones.csv") + " --report-out " +
                                     path_of("report_ones.json"));
    REQUIRE(single.exit_code == 0);
    const Json degenerate = Json::parse(slurp(path_of("report_ones.json")));
    CHECK_FALSE(degenerate.contains("auc"));
    CHECK_FALSE(degenerate.contains("eer"));
    CHECK(degenerate.contains("warnings"));
    CHECK(single.err.find("single-class") != std::string::npos);
}

TEST_CASE("ablate emits the five-rung ladder with a CSV sibling", "[cli]") {
    ensure_fixture();
    const std::string args = "ablate --source " + path_of("source.csv") + " --target " +
                             path_of("target_train.csv") + " --test " +
                             path_of("target_test.csv") + " --report-out " +
                             path_of("ablation.json") + " --k-select 8 --n-components 8";
    const CliResult r = run_cli(args);
    REQUIRE(r.exit_code == 0);

    const Json report = Json::parse(slurp(path_of("ablation.json")));
    const std::vector<std::string> labels{"Baseline (Raw Wav2Vec)", "+ Power Transform",
                                          "+ Feature Selection", "+ PCA", "+ CORAL"};
    REQUIRE(report.at("rows").size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(report.at("rows")[i].at("label").get<std::string>() == labels[i]);
    }
    CHECK(r.out.find("deltas sum to") != std::string::npos);

    const std::string csv = slurp(path_of("ablation.csv"));
    CHECK(csv.rfind("label,accuracy,auc,eer,delta_accuracy\n", 0) == 0);

    const CliResult again = run_cli("ablate --source " + path_of("source.csv") + " --target " +
                                    path_of("target_train.csv") + " --test " +
                                    path_of("target_test.csv") + " --report-out " +
                                    path_of("ablation_b.json") + " --k-select 8" +
                                    " --n-components 8");
    REQUIRE(again.exit_code == 0);
    CHECK(slurp(path_of("ablation_b.json")) == slurp(path_of("ablation.json")));
    CHECK(slurp(path_of("ablation_b.csv")) == slurp(path_of("ablation.csv")));
}

TEST_CASE("multiseed runs the seed sweep with a t-test", "[cli]") {
    ensure_fixture();
    const std::string args = "multiseed --source " + path_of("source.csv") + " --target " +
                             path_of("target_test.csv") + " --seeds 0..4 --report-out " +
                             path_of("multiseed.json") + " --k-select 8 --n-components 8";
    const CliResult r = run_cli(args);
    REQUIRE(r.exit_code == 0);

    const Json report = Json::parse(slurp(path_of("multiseed.json")));
    REQUIRE(report.at("rows").size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(report.at("rows")[i].at("seed").get<int>() == static_cast<int>(i));
    }
    if (!report.at("t_test").is_null()) {
        CHECK(report.at("t_test").at("degrees_freedom").get<int>() == 4);
    } else {
        CHECK_FALSE(report.at("warnings").empty());
    }

    // Summary matches a hand recomputation over the emitted rows.
    double mean = 0.0;
    for (const auto& row : report.at("rows")) {
        mean += row.at("full_accuracy").get<double>();
    }
    mean /= 5.0;
    CHECK(std::abs(report.at("summary").at("full_mean").get<double>() - mean) <= 1e-12);

    const CliResult one_seed = run_cli("multiseed --source " + path_of("source.csv") +
                                       " --target " + path_of("target_test.csv") +
                                       " --seeds 3 --report-out " + path_of("never.json"));
    CHECK(one_seed.exit_code == 2);
    CHECK_FALSE(fs::exists(path_of("never.json")));
}

TEST_CASE("multiseed transductive flag widens the adaptation set", "[cli]") {
    ensure_fixture();
    const std::string common = "multiseed --source " + path_of("source.csv") + " --target " +
                               path_of("target_test.csv") +
                               " --seeds 0..2 --transductive --k-select 8 --n-components 8";
    const CliResult r = run_cli(common + " --report-out " + path_of("multiseed_t.json"));
    REQUIRE(r.exit_code == 0);
    const Json report = Json::parse(slurp(path_of("multiseed_t.json")));
    CHECK(report.at("rows").size() == 3);

    const CliResult again = run_cli(common + " --report-out " + path_of("multiseed_t2.json"));
    REQUIRE(again.exit_code == 0);
    CHECK(slurp(path_of("multiseed_t2.json")) == slurp(path_of("multiseed_t.json")));
}

TEST_CASE("exit codes distinguish failure classes", "[cli]") {
    ensure_fixture();
    const CliResult missing = run_cli("fit --source " + path_of("ghost.csv") + " --target " +
                                      path_of("target_train.csv") + " --model-out " +
                                      path_of("never_model.json"));
    CHECK(missing.exit_code == 1);
    CHECK_FALSE(fs::exists(path_of("never_model.json")));

    std::ofstream bad(path_of("bad_rows.csv"));
    bad << "id,f0,label\na,1.0,3\n";
    bad.close();
    const CliResult invalid = run_cli("split --input " + path_of("bad_rows.csv") +
                                      " --train-out " + path_of("never_train2.csv") +
                                      " --test-out " + path_of("never_test2.csv"));
    CHECK(invalid.exit_code == 2);

    const CliResult unknown = run_cli("fit --source a --target b --model-out c --frobnicate");
    CHECK(unknown.exit_code == 2);

    const CliResult no_sub = run_cli("");
    CHECK(no_sub.exit_code == 2);
}

TEST_CASE("help text lists the configuration surface", "[cli]") {
    ensure_fixture();
    const CliResult top = run_cli("--help");
    CHECK(top.exit_code == 0);
    for (const char* sub : {"split", "synth", "fit", "eval", "ablate", "multiseed"}) {
        CHECK(top.out.find(sub) != std::string::npos);
    }

    const CliResult fit_help = run_cli("fit --help");
    CHECK(fit_help.exit_code == 0);
    for (const char* flag :
         {"--no-power", "--no-select", "--no-pca", "--no-coral", "--k-select",
          "--n-components", "--coral-lambda", "--coral-literal-formula",
          "--no-coral-align-means", "--power-fit-domain", "--logreg-c", "--threshold",
          "--seed"}) {
        CHECK(fit_help.out.find(flag) != std::string::npos);
    }
    // Paper defaults surface in the help text.
    CHECK(fit_help.out.find("512") != std::string::npos);
    CHECK(fit_help.out.find("256") != std::string::npos);
    CHECK(fit_help.out.find("0.01") != std::string::npos);
    CHECK(fit_help.out.find("42") != std::string::npos);

    const CliResult ms_help = run_cli("multiseed --help");
    CHECK(ms_help.exit_code == 0);
    CHECK(ms_help.out.find("--transductive") != std::string::npos);
    CHECK(ms_help.out.find("--seeds") != std::string::npos);
}
