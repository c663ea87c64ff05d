//  Copyright 2026 The ctxzsl Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#ifndef CTXZSL_PIPELINE_HPP_
#define CTXZSL_PIPELINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ctxzsl/baselines.hpp"
#include "ctxzsl/context.hpp"
#include "ctxzsl/core.hpp"
#include "ctxzsl/ingest.hpp"
#include "ctxzsl/known_model.hpp"
#include "ctxzsl/metrics.hpp"

namespace ctxzsl {

enum class ModelKind { kTexCazsl, kCoCazsl, kWve, kEszsl, kExdap, kDmp };

// Stable command-line names: texcazsl cocazsl wve eszsl exdap dmp.
const char* model_kind_name(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);
const std::vector<ModelKind>& all_model_kinds();

// Every tunable in one bag, defaulted to the working values; echoed into all
// output manifests so runs are auditable.
struct Hyperparameters {
  double gamma = 0.1;     // text-conditional softmax temperature
  double lambda = 1e-3;   // bilinear / embedding-regressor ridge strength
  double alpha = 0.75;    // co-occurrence weight exponent
  double c_max = 0.0;     // weight cap; 0 = max(1, max off-diagonal count / 2)
  double cost = 1.0;      // known-classifier inverse regularisation
  double pos_weight = 1.0;
  double lambda1 = 1e-3;  // feature-side regulariser (eszsl)
  double lambda2 = 1e-3;  // embedding-side regulariser (eszsl)
  bool l2_normalize = false;  // per-instance feature normalisation at load
};

// Dataset loaded once and shared across runs: features/annotations aligned in
// canonical order plus embeddings for the full attribute vocabulary.
struct LoadedDataset {
  AlignedData data;
  EmbeddedVocabulary embedded;  // column order matches the annotation vocabulary
};

LoadedDataset load_dataset(const std::string& features_path,
                           const std::string& annotations_path,
                           const std::string& vectors_path, bool l2_normalize);

// Known-classifier stage shared by texcazsl and cocazsl within a split:
// one-vs-rest training over the split's known attributes on the train
// instances.  Degenerate (single-class) known attributes are dropped and
// recorded; dropping every known attribute is an error.
struct KnownStage {
  KnownAttributeModel model;
  std::vector<std::string> dropped;
};

KnownStage train_known_stage(const LoadedDataset& dataset, const DatasetSplit& split,
                             const Hyperparameters& hyper);

// One (model, split) run over the split's test instances.
struct RunOutput {
  ScoreMatrix scores;                     // novel x test ranking scores
  std::optional<Eigen::MatrixXi> binary;  // dmp decisions, same shape
  std::vector<std::string> dropped_known;
  // Fitted pieces for serialisation, populated per model kind.
  std::optional<KnownAttributeModel> known;
  std::optional<BilinearContextModel> bilinear;
  std::optional<EmbeddingRegressor> regressor;
  std::optional<EszslModel> eszsl;
};

// Trains the requested model on the split's train side and scores its test
// instances.  A non-null shared_known is reused for texcazsl/cocazsl instead
// of retraining (it must come from train_known_stage on the same split).
RunOutput run_model(const LoadedDataset& dataset, const DatasetSplit& split,
                    ModelKind kind, const Hyperparameters& hyper,
                    const KnownStage* shared_known = nullptr);

// Evaluates scores against the annotations restricted to the score matrix's
// instances, after checking its vocabulary equals the split's novel set.
MetricsReport evaluate_scores(const ScoreMatrix& scores,
                              const AnnotationMatrix& annotations,
                              const DatasetSplit& split, const BinarizePolicy& policy,
                              const Eigen::MatrixXi* binary_override = nullptr);

// --- command layer (the surface exposed through the C API and the CLI) -----

// Writes cfg.num_splits files split_0000.json ... into out_dir.
void cmd_split(const std::string& annotations_path, const SplitConfig& cfg,
               const std::string& out_dir);

struct RunCommandConfig {
  std::string features_path;
  std::string annotations_path;
  std::string vectors_path;
  std::string split_path;
  std::string out_dir;
  ModelKind model = ModelKind::kTexCazsl;
  Hyperparameters hyper;
};

// Writes scores.csv (plus binary.csv for dmp), the serialised model files,
// and manifest.json into out_dir.
void cmd_run(const RunCommandConfig& cfg);

struct EvalCommandConfig {
  std::string scores_path;
  std::string annotations_path;
  std::string split_path;
  std::string out_path;
  BinarizePolicy policy = BinarizePolicy::uniform_threshold();
};

// Writes the MetricsReport JSON to out_path and returns it.
MetricsReport cmd_eval(const EvalCommandConfig& cfg);

struct ExplainCommandConfig {
  std::string model_path;        // bilinear context model JSON
  std::string vectors_path;      // word-vector table
  std::string novel_name;        // attribute to explain
  std::string known_vocab_path;  // one known attribute name per line
  std::string out_path;          // CSV (known_attribute, probability)
};

// Writes the novel attribute's conditional row over the known vocabulary,
// sorted by descending probability.
void cmd_explain(const ExplainCommandConfig& cfg);

// Generates a synthetic dataset (config JSON) into out_dir.
void cmd_synth(const std::string& config_path, const std::string& out_dir);

struct ExperimentConfig {
  std::string features_path;
  std::string annotations_path;
  std::string vectors_path;
  SplitConfig split;
  std::vector<ModelKind> models;
  Hyperparameters hyper;
  BinarizePolicy policy = BinarizePolicy::uniform_threshold();
  std::string output_dir;
  int workers = 0;  // parallel splits; 0 = CTXZSL_WORKERS env var, else 1
};

ExperimentConfig load_experiment_config(const std::string& path);

struct ExperimentCell {
  ModelKind model = ModelKind::kTexCazsl;
  int split_index = 0;
  std::optional<MetricsReport> metrics;  // absent when the cell failed
  std::string error;                     // "" on success
};

struct ExperimentModelSummary {
  ModelKind model = ModelKind::kTexCazsl;
  std::optional<AggregateReport> aggregate;  // absent when every cell failed
  int successes = 0;
  int failures = 0;
};

struct ExperimentResult {
  std::vector<ExperimentCell> cells;  // split-major, config model order inside
  std::vector<ExperimentModelSummary> summaries;
};

// Runs split -> run -> eval for every (split, model) cell, in parallel over
// splits; writes per-cell artifacts, aggregate.csv / aggregate.json
// (mean +/- std per model per metric, failed cells recorded), and
// manifest.json under output_dir.  Identical configs produce byte-identical
// artifacts.
ExperimentResult cmd_experiment(const std::string& config_path);

}  // namespace ctxzsl

#endif  // CTXZSL_PIPELINE_HPP_
