#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "ctxzsl/pipeline.hpp"
#include "ctxzsl/synth.hpp"
#include "test_helpers.hpp"

using ctxzsl::BinarizePolicy;
using ctxzsl::DatasetSplit;
using ctxzsl::Error;
using ctxzsl::Hyperparameters;
using ctxzsl::LoadedDataset;
using ctxzsl::MetricsReport;
using ctxzsl::ModelKind;
using ctxzsl::RunOutput;
using ctxzsl::SynthConfig;
using test_helpers::TempDir;
using test_helpers::read_file;
using test_helpers::write_file;

namespace {

// One small dataset on disk, shared by every pipeline test.
struct PipelineFixture {
  TempDir dir{"pipeline"};
  SynthConfig cfg;
  LoadedDataset dataset;
  DatasetSplit split;

  PipelineFixture()
      : cfg(make_config()), dataset(prepare(dir, cfg)), split(make_split()) {}

  static SynthConfig make_config() {
    SynthConfig cfg;
    cfg.num_attributes = 10;
    cfg.num_novel = 2;
    cfg.num_instances = 150;
    cfg.embed_dim = 8;
    cfg.feature_dim = 12;
    cfg.feature_noise = 0.5;
    cfg.contradiction_pairs = 0;
    cfg.seed = 17;
    return cfg;
  }

  static LoadedDataset prepare(TempDir& dir, const SynthConfig& cfg) {
    const ctxzsl::SynthDataset data = ctxzsl::generate(cfg);
    ctxzsl::write_synth_dataset(data, cfg, dir.str());
    return ctxzsl::load_dataset(dir.file("features.csv"), dir.file("annotations.csv"),
                                dir.file("vectors.txt"), /*l2_normalize=*/false);
  }

  DatasetSplit make_split() const {
    ctxzsl::SplitConfig split_cfg;
    split_cfg.num_novel = 2;
    split_cfg.num_splits = 1;
    split_cfg.seed = 5;
    return ctxzsl::generate_split(dataset.data.annotations.vocabulary(),
                                  dataset.data.annotations, split_cfg, 0);
  }
};

const PipelineFixture& fixture() {
  static PipelineFixture fx;
  return fx;
}

}  // namespace

TEST_CASE("model kind names round-trip") {
  const std::vector<ModelKind>& kinds = ctxzsl::all_model_kinds();
  REQUIRE(kinds.size() == 6);
  for (ModelKind kind : kinds) {
    CHECK(ctxzsl::parse_model_kind(ctxzsl::model_kind_name(kind)) == kind);
  }
  CHECK(std::string(ctxzsl::model_kind_name(ModelKind::kTexCazsl)) == "texcazsl");
  CHECK(std::string(ctxzsl::model_kind_name(ModelKind::kCoCazsl)) == "cocazsl");
  CHECK_THROWS_AS((void)ctxzsl::parse_model_kind("svm"), Error);
}

TEST_CASE("load_dataset aligns and embeds the full vocabulary") {
  const PipelineFixture& fx = fixture();
  CHECK(fx.dataset.data.features.ids() == fx.dataset.data.annotations.ids());
  CHECK(fx.dataset.embedded.vocabulary.names() ==
        fx.dataset.data.annotations.vocabulary().names());
  CHECK(fx.dataset.embedded.vectors.cols() ==
        static_cast<Eigen::Index>(fx.cfg.num_attributes));
  CHECK(fx.dataset.embedded.vectors.rows() ==
        static_cast<Eigen::Index>(fx.cfg.embed_dim));

  const LoadedDataset normalized =
      ctxzsl::load_dataset(fx.dir.file("features.csv"), fx.dir.file("annotations.csv"),
                           fx.dir.file("vectors.txt"), /*l2_normalize=*/true);
  for (Eigen::Index n = 0; n < normalized.data.features.data().cols(); ++n) {
    CHECK(normalized.data.features.data().col(n).norm() ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("run_model produces aligned scores for every kind") {
  const PipelineFixture& fx = fixture();
  const Hyperparameters hyper;
  for (ModelKind kind : ctxzsl::all_model_kinds()) {
    const std::string kind_name = ctxzsl::model_kind_name(kind);
    CAPTURE(kind_name);
    const RunOutput out = ctxzsl::run_model(fx.dataset, fx.split, kind, hyper);
    CHECK(out.scores.vocabulary().names() == fx.split.novel().names());
    CHECK(out.scores.ids() == fx.split.test_ids());
    CHECK(out.scores.scores().allFinite());
    CHECK(out.binary.has_value() == (kind == ModelKind::kDmp));
    CHECK(out.known.has_value() ==
          (kind == ModelKind::kTexCazsl || kind == ModelKind::kCoCazsl));
    CHECK(out.bilinear.has_value() == (kind == ModelKind::kCoCazsl));
    // dmp carries the exdap-trained projection it decodes with.
    CHECK(out.regressor.has_value() ==
          (kind == ModelKind::kWve || kind == ModelKind::kExdap ||
           kind == ModelKind::kDmp));
    CHECK(out.eszsl.has_value() == (kind == ModelKind::kEszsl));

    const MetricsReport report =
        ctxzsl::evaluate_scores(out.scores, fx.dataset.data.annotations, fx.split,
                                BinarizePolicy::uniform_threshold(),
                                out.binary ? &*out.binary : nullptr);
    CHECK(std::isfinite(report.auc));
    CHECK(std::isfinite(report.hamming));
  }
}

TEST_CASE("a shared known stage reproduces the self-trained run exactly") {
  const PipelineFixture& fx = fixture();
  const Hyperparameters hyper;
  const ctxzsl::KnownStage stage =
      ctxzsl::train_known_stage(fx.dataset, fx.split, hyper);
  const RunOutput shared =
      ctxzsl::run_model(fx.dataset, fx.split, ModelKind::kTexCazsl, hyper, &stage);
  const RunOutput solo =
      ctxzsl::run_model(fx.dataset, fx.split, ModelKind::kTexCazsl, hyper);
  CHECK(shared.scores.scores() == solo.scores.scores());
}

TEST_CASE("evaluate_scores rejects a vocabulary that is not the novel set") {
  const PipelineFixture& fx = fixture();
  const Eigen::MatrixXd values = Eigen::MatrixXd::Constant(
      2, static_cast<Eigen::Index>(fx.split.test_ids().size()), 0.5);
  const ctxzsl::ScoreMatrix wrong(ctxzsl::AttributeVocabulary({"x1", "x2"}),
                                  fx.split.test_ids(), values);
  CHECK_THROWS_AS((void)ctxzsl::evaluate_scores(wrong, fx.dataset.data.annotations,
                                                fx.split,
                                                BinarizePolicy::uniform_threshold()),
                  Error);
}

TEST_CASE("cmd_split writes one numbered file per split") {
  const PipelineFixture& fx = fixture();
  TempDir out("splits");
  ctxzsl::SplitConfig cfg;
  cfg.num_novel = 2;
  cfg.num_splits = 3;
  cfg.seed = 9;
  ctxzsl::cmd_split(fx.dir.file("annotations.csv"), cfg, out.str());
  for (const char* name : {"split_0000.json", "split_0001.json", "split_0002.json"}) {
    const DatasetSplit split = ctxzsl::load_split(out.file(name));
    CHECK(split.novel().size() == 2);
    CHECK(split.known().size() == 8);
  }
  CHECK_FALSE(std::filesystem::exists(out.file("split_0003.json")));
}

TEST_CASE("cmd_run writes model artifacts and is byte-stable") {
  const PipelineFixture& fx = fixture();
  TempDir out("run");
  const std::string split_path = out.file("split.json");
  ctxzsl::save_split(fx.split, split_path);

  ctxzsl::RunCommandConfig cfg;
  cfg.features_path = fx.dir.file("features.csv");
  cfg.annotations_path = fx.dir.file("annotations.csv");
  cfg.vectors_path = fx.dir.file("vectors.txt");
  cfg.split_path = split_path;
  cfg.out_dir = out.file("texcazsl_a");
  cfg.model = ModelKind::kTexCazsl;
  ctxzsl::cmd_run(cfg);
  namespace fs = std::filesystem;
  CHECK(fs::exists(fs::path(cfg.out_dir) / "scores.csv"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "known_model.json"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "manifest.json"));

  cfg.out_dir = out.file("texcazsl_b");
  ctxzsl::cmd_run(cfg);
  CHECK(read_file(out.file("texcazsl_a") + "/scores.csv") ==
        read_file(out.file("texcazsl_b") + "/scores.csv"));

  cfg.out_dir = out.file("cocazsl");
  cfg.model = ModelKind::kCoCazsl;
  ctxzsl::cmd_run(cfg);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "bilinear.json"));

  cfg.out_dir = out.file("dmp");
  cfg.model = ModelKind::kDmp;
  ctxzsl::cmd_run(cfg);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "binary.csv"));
  CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "known_model.json"));

  // Evaluate the first run's scores through the command layer.
  ctxzsl::EvalCommandConfig eval_cfg;
  eval_cfg.scores_path = out.file("texcazsl_a") + "/scores.csv";
  eval_cfg.annotations_path = fx.dir.file("annotations.csv");
  eval_cfg.split_path = split_path;
  eval_cfg.out_path = out.file("metrics.json");
  const MetricsReport report = ctxzsl::cmd_eval(eval_cfg);
  CHECK(std::isfinite(report.auc));
  const MetricsReport loaded = ctxzsl::load_metrics(eval_cfg.out_path);
  CHECK(loaded.auc == report.auc);

  // Explain the first novel attribute using the fitted context model.
  std::string known_list;
  for (const std::string& name : fx.split.known().names()) known_list += name + "\n";
  write_file(out.file("known.txt"), known_list);
  ctxzsl::ExplainCommandConfig explain_cfg;
  explain_cfg.model_path = out.file("cocazsl") + "/bilinear.json";
  explain_cfg.vectors_path = fx.dir.file("vectors.txt");
  explain_cfg.novel_name = fx.split.novel().name(0);
  explain_cfg.known_vocab_path = out.file("known.txt");
  explain_cfg.out_path = out.file("explain.csv");
  ctxzsl::cmd_explain(explain_cfg);
  const std::string explain_text = read_file(explain_cfg.out_path);
  CHECK(explain_text.rfind("known_attribute,probability\n", 0) == 0);
  // One ranked row per known attribute, probabilities descending.
  std::istringstream lines(explain_text);
  std::string line;
  std::getline(lines, line);
  double previous = 1.0;
  int rows = 0;
  while (std::getline(lines, line)) {
    const std::size_t comma = line.rfind(',');
    REQUIRE(comma != std::string::npos);
    const double p = std::stod(line.substr(comma + 1));
    CHECK(p <= previous + 1e-15);
    previous = p;
    ++rows;
  }
  CHECK(rows == static_cast<int>(fx.split.known().size()));
}

TEST_CASE("cmd_synth generates a dataset directory from a config file") {
  TempDir out("cmdsynth");
  nlohmann::json j{{"num_attributes", 8},  {"num_novel", 2},
                   {"num_instances", 60},  {"embed_dim", 6},
                   {"feature_dim", 10},    {"feature_noise", 0.4},
                   {"contradiction_pairs", 1}, {"seed", 2}};
  write_file(out.file("synth.json"), j.dump(2) + "\n");
  ctxzsl::cmd_synth(out.file("synth.json"), out.file("data"));
  for (const char* name :
       {"vectors.txt", "features.csv", "annotations.csv", "manifest.json"}) {
    CHECK(std::filesystem::exists(std::filesystem::path(out.file("data")) / name));
  }
}

TEST_CASE("cmd_experiment runs the grid and aggregates deterministically") {
  const PipelineFixture& fx = fixture();
  TempDir out("experiment");

  auto experiment_config = [&](const std::string& output_dir, int workers) {
    nlohmann::json j;
    j["features"] = fx.dir.file("features.csv");
    j["annotations"] = fx.dir.file("annotations.csv");
    j["vectors"] = fx.dir.file("vectors.txt");
    j["output_dir"] = output_dir;
    j["models"] = {"texcazsl", "wve"};
    j["split"] = {{"num_novel", 2}, {"num_splits", 2}, {"seed", 3}};
    j["workers"] = workers;
    return j.dump(2) + "\n";
  };

  write_file(out.file("exp1.json"), experiment_config(out.file("out1"), 1));
  const ctxzsl::ExperimentResult result = ctxzsl::cmd_experiment(out.file("exp1.json"));
  REQUIRE(result.cells.size() == 4);  // 2 splits x 2 models, split-major
  CHECK(result.cells[0].split_index == 0);
  CHECK(result.cells[0].model == ModelKind::kTexCazsl);
  CHECK(result.cells[1].model == ModelKind::kWve);
  CHECK(result.cells[2].split_index == 1);
  REQUIRE(result.summaries.size() == 2);
  for (const ctxzsl::ExperimentModelSummary& summary : result.summaries) {
    CHECK(summary.successes == 2);
    CHECK(summary.failures == 0);
    REQUIRE(summary.aggregate.has_value());
    CHECK(std::isfinite(summary.aggregate->mean.auc));
  }

  namespace fs = std::filesystem;
  const fs::path root(out.file("out1"));
  CHECK(fs::exists(root / "manifest.json"));
  CHECK(fs::exists(root / "aggregate.json"));
  CHECK(fs::exists(root / "aggregate.csv"));
  CHECK(fs::exists(root / "split_0000" / "split.json"));
  CHECK(fs::exists(root / "split_0000" / "known_model.json"));
  CHECK(fs::exists(root / "split_0000" / "texcazsl" / "scores.csv"));
  CHECK(fs::exists(root / "split_0000" / "texcazsl" / "metrics.json"));
  CHECK(fs::exists(root / "split_0001" / "wve" / "scores.csv"));

  // A parallel rerun produces byte-identical results.
  write_file(out.file("exp2.json"), experiment_config(out.file("out2"), 2));
  (void)ctxzsl::cmd_experiment(out.file("exp2.json"));
  CHECK(read_file(out.file("out1") + "/aggregate.json") ==
        read_file(out.file("out2") + "/aggregate.json"));
  CHECK(read_file(out.file("out1") + "/aggregate.csv") ==
        read_file(out.file("out2") + "/aggregate.csv"));
  CHECK(read_file(out.file("out1") + "/split_0001/texcazsl/scores.csv") ==
        read_file(out.file("out2") + "/split_0001/texcazsl/scores.csv"));
}
