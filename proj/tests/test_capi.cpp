#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "ctxzsl/ctxzsl.h"
#include "ctxzsl/ingest.hpp"
#include "ctxzsl/synth.hpp"
#include "test_helpers.hpp"

using test_helpers::TempDir;
using test_helpers::write_file;

namespace {

// Five attributes (three known, two novel), six instances and
// two-dimensional features/embeddings, written as library files.
struct CapiFixture {
  TempDir dir{"capi"};

  CapiFixture() {
    const std::vector<std::string> ids = {"inst0", "inst1", "inst2",
                                          "inst3", "inst4", "inst5"};
    Eigen::MatrixXd x(2, 6);
    x << 0.0, 1.0, 2.0, 3.0, 4.0, 5.0,  //
        5.0, 4.0, 3.0, 2.0, 1.0, 0.0;
    ctxzsl::save_features(ctxzsl::FeatureMatrix(ids, x), dir.file("features.csv"));

    Eigen::MatrixXi known(3, 6);
    known << 1, 1, 1, 0, 0, 0,  //
        0, 0, 1, 1, 1, 0,       //
        1, 0, 0, 0, 1, 1;
    ctxzsl::save_annotations(
        ctxzsl::AnnotationMatrix(ctxzsl::AttributeVocabulary({"k1", "k2", "k3"}), ids,
                                 known),
        dir.file("known_annotations.csv"));

    Eigen::MatrixXi full(5, 6);
    full.topRows(3) = known;
    full.row(3) << 1, 0, 1, 0, 1, 0;  // q1
    full.row(4) << 0, 1, 0, 1, 0, 1;  // q2
    ctxzsl::save_annotations(
        ctxzsl::AnnotationMatrix(
            ctxzsl::AttributeVocabulary({"k1", "k2", "k3", "q1", "q2"}), ids, full),
        dir.file("annotations.csv"));

    ctxzsl::WordVectorTable table(2);
    table.insert("k1", Eigen::Vector2d(1.0, 0.0));
    table.insert("k2", Eigen::Vector2d(0.0, 1.0));
    table.insert("k3", Eigen::Vector2d(0.7, 0.7));
    table.insert("q1", Eigen::Vector2d(0.9, 0.1));
    table.insert("q2", Eigen::Vector2d(0.1, 0.9));
    ctxzsl::save_word_vectors(table, dir.file("vectors.txt"));

    const ctxzsl::DatasetSplit split(
        ctxzsl::AttributeVocabulary({"k1", "k2", "k3"}),
        ctxzsl::AttributeVocabulary({"q1", "q2"}), {"inst0", "inst1", "inst2"},
        {"inst3", "inst4", "inst5"}, /*seed=*/0, /*split_index=*/0);
    ctxzsl::save_split(split, dir.file("split.json"));
  }
};

const CapiFixture& capi_fixture() {
  static CapiFixture fx;
  return fx;
}

}  // namespace

TEST_CASE("version and status names are stable") {
  REQUIRE(ctxzsl_version() != nullptr);
  CHECK(std::strlen(ctxzsl_version()) > 0);
  CHECK(std::string(ctxzsl_status_name(CTXZSL_OK)) == "CTXZSL_OK");
  CHECK(std::string(ctxzsl_status_name(CTXZSL_ERR_IO)) == "CTXZSL_ERR_IO");
  CHECK(std::string(ctxzsl_status_name(CTXZSL_ERR_VOCABULARY)) ==
        "CTXZSL_ERR_VOCABULARY");
  CHECK(std::string(ctxzsl_status_name(CTXZSL_ERR_INTERNAL)) ==
        "CTXZSL_ERR_INTERNAL");
}

TEST_CASE("last_error reports the most recent failure and clears on success") {
  const CapiFixture& fx = capi_fixture();
  ctxzsl_features* features = nullptr;
  CHECK(ctxzsl_features_load("/nonexistent/features.csv", &features) ==
        CTXZSL_ERR_IO);
  CHECK(features == nullptr);
  CHECK(std::strlen(ctxzsl_last_error()) > 0);

  REQUIRE(ctxzsl_features_load(fx.dir.file("features.csv").c_str(), &features) ==
          CTXZSL_OK);
  CHECK(std::string(ctxzsl_last_error()).empty());
  ctxzsl_features_free(features);

  CHECK(ctxzsl_features_load(nullptr, &features) == CTXZSL_ERR_CONFIG);
  CHECK(std::string(ctxzsl_last_error()).find("null argument") != std::string::npos);
}

TEST_CASE("run options initialise to documented defaults") {
  ctxzsl_run_options options;
  ctxzsl_run_options_init(&options);
  CHECK(options.features_path == nullptr);
  CHECK(options.out_dir == nullptr);
  CHECK(std::string(options.model) == "texcazsl");
  CHECK(options.gamma == 0.1);
  CHECK(options.lambda == 1e-3);
  CHECK(options.alpha == 0.75);
  CHECK(options.c_max == 0.0);
  CHECK(options.cost == 1.0);
  CHECK(options.pos_weight == 1.0);
  CHECK(options.lambda1 == 1e-3);
  CHECK(options.lambda2 == 1e-3);
  CHECK(options.l2_normalize == 0);
}

TEST_CASE("the handle surface composes into a full prediction flow") {
  const CapiFixture& fx = capi_fixture();

  ctxzsl_features* features = nullptr;
  REQUIRE(ctxzsl_features_load(fx.dir.file("features.csv").c_str(), &features) ==
          CTXZSL_OK);
  size_t dim = 0, count = 0;
  REQUIRE(ctxzsl_features_dims(features, &dim, &count) == CTXZSL_OK);
  CHECK(dim == 2);
  CHECK(count == 6);

  ctxzsl_annotations* known_ann = nullptr;
  REQUIRE(ctxzsl_annotations_load(fx.dir.file("known_annotations.csv").c_str(),
                                  &known_ann) == CTXZSL_OK);
  size_t num_attributes = 0;
  REQUIRE(ctxzsl_annotations_dims(known_ann, &num_attributes, &count) == CTXZSL_OK);
  CHECK(num_attributes == 3);
  CHECK(count == 6);

  ctxzsl_features* aligned_features = nullptr;
  ctxzsl_annotations* aligned_ann = nullptr;
  REQUIRE(ctxzsl_align(features, known_ann, &aligned_features, &aligned_ann) ==
          CTXZSL_OK);

  ctxzsl_known_model* model = nullptr;
  REQUIRE(ctxzsl_known_train(aligned_features, aligned_ann, /*cost=*/1.0,
                             /*pos_weight=*/1.0, &model) == CTXZSL_OK);
  const std::string model_path = fx.dir.file("known_model.json");
  REQUIRE(ctxzsl_known_model_save(model, model_path.c_str()) == CTXZSL_OK);
  ctxzsl_known_model* reloaded = nullptr;
  REQUIRE(ctxzsl_known_model_load(model_path.c_str(), &reloaded) == CTXZSL_OK);
  ctxzsl_known_model_free(reloaded);

  ctxzsl_scores* known_scores = nullptr;
  REQUIRE(ctxzsl_known_predict(model, aligned_features, &known_scores) == CTXZSL_OK);
  size_t rows = 0, cols = 0;
  REQUIRE(ctxzsl_scores_dims(known_scores, &rows, &cols) == CTXZSL_OK);
  CHECK(rows == 3);
  CHECK(cols == 6);
  const char* name = nullptr;
  REQUIRE(ctxzsl_scores_attribute(known_scores, 0, &name) == CTXZSL_OK);
  CHECK(std::string(name) == "k1");
  const char* id = nullptr;
  REQUIRE(ctxzsl_scores_instance(known_scores, 0, &id) == CTXZSL_OK);
  CHECK(std::string(id) == "inst0");
  for (size_t n = 0; n < cols; ++n) {
    double sum = 0.0;
    for (size_t q = 0; q < rows; ++q) {
      double value = 0.0;
      REQUIRE(ctxzsl_scores_value(known_scores, q, n, &value) == CTXZSL_OK);
      CHECK(value > 0.0);
      CHECK(value < 1.0);
      sum += value;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }

  ctxzsl_word_table* table = nullptr;
  REQUIRE(ctxzsl_word_table_load(fx.dir.file("vectors.txt").c_str(), &table) ==
          CTXZSL_OK);
  size_t table_dim = 0;
  REQUIRE(ctxzsl_word_table_dim(table, &table_dim) == CTXZSL_OK);
  CHECK(table_dim == 2);

  double buffer[2] = {0.0, 0.0};
  REQUIRE(ctxzsl_embed(table, "q1", buffer, 2) == CTXZSL_OK);
  CHECK(buffer[0] == 0.9);
  CHECK(buffer[1] == 0.1);
  CHECK(ctxzsl_embed(table, "q1", buffer, 1) == CTXZSL_ERR_DIMENSION);
  CHECK(ctxzsl_embed(table, "missing_token", buffer, 2) == CTXZSL_ERR_VOCABULARY);

  const char* novel_names[] = {"q1", "q2"};
  const char* known_names[] = {"k1", "k2", "k3"};
  ctxzsl_conditional* conditional = nullptr;
  REQUIRE(ctxzsl_text_conditional_create(table, novel_names, 2, known_names, 3,
                                         /*gamma=*/0.1, &conditional) == CTXZSL_OK);
  for (size_t q = 0; q < 2; ++q) {
    double row_sum = 0.0;
    for (size_t p = 0; p < 3; ++p) {
      double value = 0.0;
      REQUIRE(ctxzsl_conditional_value(conditional, q, p, &value) == CTXZSL_OK);
      CHECK(value >= 0.0);
      row_sum += value;
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  double out_of_range = 0.0;
  CHECK(ctxzsl_conditional_value(conditional, 5, 0, &out_of_range) != CTXZSL_OK);

  ctxzsl_scores* novel_scores = nullptr;
  REQUIRE(ctxzsl_marginal_predict(known_scores, conditional, &novel_scores) ==
          CTXZSL_OK);
  REQUIRE(ctxzsl_scores_dims(novel_scores, &rows, &cols) == CTXZSL_OK);
  CHECK(rows == 2);
  CHECK(cols == 6);

  const std::string scores_path = fx.dir.file("novel_scores.csv");
  REQUIRE(ctxzsl_scores_save(novel_scores, scores_path.c_str()) == CTXZSL_OK);
  ctxzsl_scores* loaded_scores = nullptr;
  REQUIRE(ctxzsl_scores_load(scores_path.c_str(), &loaded_scores) == CTXZSL_OK);
  REQUIRE(ctxzsl_scores_dims(loaded_scores, &rows, &cols) == CTXZSL_OK);
  CHECK(rows == 2);

  ctxzsl_annotations* full_ann = nullptr;
  REQUIRE(ctxzsl_annotations_load(fx.dir.file("annotations.csv").c_str(), &full_ann) ==
          CTXZSL_OK);
  ctxzsl_split* split = nullptr;
  REQUIRE(ctxzsl_split_load(fx.dir.file("split.json").c_str(), &split) == CTXZSL_OK);
  size_t num_known = 0, num_novel = 0, num_train = 0, num_test = 0;
  REQUIRE(ctxzsl_split_dims(split, &num_known, &num_novel, &num_train, &num_test) ==
          CTXZSL_OK);
  CHECK(num_known == 3);
  CHECK(num_novel == 2);
  CHECK(num_train == 3);
  CHECK(num_test == 3);

  double auc = 0.0, label_ap = 0.0, example_ap = 0.0, hamming = 0.0, ranking = 0.0;
  REQUIRE(ctxzsl_evaluate(novel_scores, full_ann, split, nullptr, &auc, &label_ap,
                          &example_ap, &hamming, &ranking) == CTXZSL_OK);
  CHECK(std::isfinite(auc));
  CHECK(std::isfinite(label_ap));
  CHECK(std::isfinite(example_ap));
  CHECK(std::isfinite(hamming));
  CHECK(std::isfinite(ranking));
  // Output pointers are optional.
  REQUIRE(ctxzsl_evaluate(novel_scores, full_ann, split, "top-k:1", &auc, nullptr,
                          nullptr, nullptr, nullptr) == CTXZSL_OK);

  ctxzsl_split_free(split);
  ctxzsl_annotations_free(full_ann);
  ctxzsl_scores_free(loaded_scores);
  ctxzsl_scores_free(novel_scores);
  ctxzsl_conditional_free(conditional);
  ctxzsl_word_table_free(table);
  ctxzsl_scores_free(known_scores);
  ctxzsl_known_model_free(model);
  ctxzsl_annotations_free(aligned_ann);
  ctxzsl_features_free(aligned_features);
  ctxzsl_annotations_free(known_ann);
  ctxzsl_features_free(features);
}

TEST_CASE("the C command surface mirrors the CLI") {
  TempDir dir("capi_cmd");
  namespace fs = std::filesystem;

  nlohmann::json synth_cfg{{"num_attributes", 8},  {"num_novel", 2},
                           {"num_instances", 80},  {"embed_dim", 6},
                           {"feature_dim", 10},    {"feature_noise", 0.4},
                           {"contradiction_pairs", 0}, {"seed", 4}};
  write_file(dir.file("synth.json"), synth_cfg.dump(2) + "\n");
  REQUIRE(ctxzsl_cmd_synth(dir.file("synth.json").c_str(),
                           dir.file("data").c_str()) == CTXZSL_OK);
  const std::string features = dir.file("data") + "/features.csv";
  const std::string annotations = dir.file("data") + "/annotations.csv";
  const std::string vectors = dir.file("data") + "/vectors.txt";
  REQUIRE(fs::exists(features));

  REQUIRE(ctxzsl_cmd_split(annotations.c_str(), /*num_novel=*/2, /*num_splits=*/1,
                           /*seed=*/1, dir.file("splits").c_str()) == CTXZSL_OK);
  const std::string split = dir.file("splits") + "/split_0000.json";
  REQUIRE(fs::exists(split));

  ctxzsl_run_options options;
  ctxzsl_run_options_init(&options);
  options.features_path = features.c_str();
  options.annotations_path = annotations.c_str();
  options.vectors_path = vectors.c_str();
  options.split_path = split.c_str();
  const std::string run_dir = dir.file("run");
  options.out_dir = run_dir.c_str();
  options.model = "cocazsl";
  REQUIRE(ctxzsl_cmd_run(&options) == CTXZSL_OK);
  REQUIRE(fs::exists(run_dir + "/scores.csv"));
  REQUIRE(fs::exists(run_dir + "/bilinear.json"));

  REQUIRE(ctxzsl_cmd_eval((run_dir + "/scores.csv").c_str(), annotations.c_str(),
                          split.c_str(), "uniform",
                          dir.file("metrics.json").c_str()) == CTXZSL_OK);
  CHECK(fs::exists(dir.file("metrics.json")));
  CHECK(ctxzsl_cmd_eval(dir.file("no_scores.csv").c_str(), annotations.c_str(),
                        split.c_str(), nullptr,
                        dir.file("metrics2.json").c_str()) == CTXZSL_ERR_IO);

  // Explain the split's first novel attribute from the fitted context model.
  ctxzsl_split* split_handle = nullptr;
  REQUIRE(ctxzsl_split_load(split.c_str(), &split_handle) == CTXZSL_OK);
  ctxzsl_split_free(split_handle);
  const ctxzsl::DatasetSplit cpp_split = ctxzsl::load_split(split);
  std::string known_list;
  for (const std::string& name : cpp_split.known().names()) known_list += name + "\n";
  write_file(dir.file("known.txt"), known_list);
  REQUIRE(ctxzsl_cmd_explain((run_dir + "/bilinear.json").c_str(), vectors.c_str(),
                             cpp_split.novel().name(0).c_str(),
                             dir.file("known.txt").c_str(),
                             dir.file("explain.csv").c_str()) == CTXZSL_OK);
  CHECK(fs::exists(dir.file("explain.csv")));

  nlohmann::json experiment{{"features", features},
                            {"annotations", annotations},
                            {"vectors", vectors},
                            {"output_dir", dir.file("experiment")},
                            {"models", {"wve"}},
                            {"split", {{"num_novel", 2}, {"num_splits", 1}, {"seed", 2}}},
                            {"workers", 1}};
  write_file(dir.file("experiment.json"), experiment.dump(2) + "\n");
  REQUIRE(ctxzsl_cmd_experiment(dir.file("experiment.json").c_str()) == CTXZSL_OK);
  CHECK(fs::exists(dir.file("experiment") + "/aggregate.json"));
}
