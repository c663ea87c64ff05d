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

#include "ctxzsl/ctxzsl.h"

#include <exception>
#include <string>
#include <utility>
#include <vector>

#include "ctxzsl/core.hpp"
#include "ctxzsl/ingest.hpp"
#include "ctxzsl/known_model.hpp"
#include "ctxzsl/metrics.hpp"
#include "ctxzsl/pipeline.hpp"
#include "ctxzsl/zsl.hpp"

struct ctxzsl_features {
  ctxzsl::FeatureMatrix value;
};
struct ctxzsl_annotations {
  ctxzsl::AnnotationMatrix value;
};
struct ctxzsl_split {
  ctxzsl::DatasetSplit value;
};
struct ctxzsl_word_table {
  ctxzsl::WordVectorTable value;
};
struct ctxzsl_known_model {
  ctxzsl::KnownAttributeModel value;
};
struct ctxzsl_conditional {
  ctxzsl::ConditionalMatrix value;
};
struct ctxzsl_scores {
  ctxzsl::ScoreMatrix value;
};

namespace {

thread_local std::string g_last_error;

ctxzsl_status set_error(ctxzsl_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs fn under the library's exception-to-status contract.
template <typename Fn>
ctxzsl_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return CTXZSL_OK;
  } catch (const ctxzsl::Error& e) {
    return set_error(static_cast<ctxzsl_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::exception& e) {
    return set_error(CTXZSL_ERR_INTERNAL, e.what());
  } catch (...) {
    return set_error(CTXZSL_ERR_INTERNAL, "unknown failure");
  }
}

ctxzsl_status require(bool ok, const char* what) {
  return ok ? CTXZSL_OK : set_error(CTXZSL_ERR_CONFIG, std::string("null argument: ") + what);
}

std::vector<std::string> collect_names(const char* const* names, size_t count,
                                       const char* what) {
  if (names == nullptr && count > 0) {
    throw ctxzsl::Error(ctxzsl::ErrorCode::kConfig,
                        std::string("null argument: ") + what);
  }
  std::vector<std::string> result;
  result.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    if (names[i] == nullptr) {
      throw ctxzsl::Error(ctxzsl::ErrorCode::kConfig,
                          std::string("null entry in ") + what);
    }
    result.emplace_back(names[i]);
  }
  return result;
}

ctxzsl::EmbeddedVocabulary embed_names(const ctxzsl::WordVectorTable& table,
                                       std::vector<std::string> names) {
  ctxzsl::AttributeVocabulary vocabulary(std::move(names));
  return ctxzsl::embed_vocabulary(vocabulary, table);
}

}  // namespace

extern "C" {

const char* ctxzsl_version(void) { return "0.1.0"; }

const char* ctxzsl_status_name(ctxzsl_status status) {
  if (status == CTXZSL_OK) return "CTXZSL_OK";
  return ctxzsl::error_code_name(static_cast<ctxzsl::ErrorCode>(static_cast<int>(status)));
}

const char* ctxzsl_last_error(void) { return g_last_error.c_str(); }

ctxzsl_status ctxzsl_cmd_split(const char* annotations_path, int num_novel,
                               int num_splits, int64_t seed, const char* out_dir) {
  if (ctxzsl_status s = require(annotations_path, "annotations_path")) return s;
  if (ctxzsl_status s = require(out_dir, "out_dir")) return s;
  return guarded([&]() {
    ctxzsl::SplitConfig cfg;
    cfg.num_novel = num_novel;
    cfg.num_splits = num_splits;
    cfg.seed = seed;
    ctxzsl::cmd_split(annotations_path, cfg, out_dir);
  });
}

void ctxzsl_run_options_init(ctxzsl_run_options* options) {
  if (options == nullptr) return;
  ctxzsl::Hyperparameters defaults;
  options->features_path = nullptr;
  options->annotations_path = nullptr;
  options->vectors_path = nullptr;
  options->split_path = nullptr;
  options->out_dir = nullptr;
  options->model = "texcazsl";
  options->gamma = defaults.gamma;
  options->lambda = defaults.lambda;
  options->alpha = defaults.alpha;
  options->c_max = defaults.c_max;
  options->cost = defaults.cost;
  options->pos_weight = defaults.pos_weight;
  options->lambda1 = defaults.lambda1;
  options->lambda2 = defaults.lambda2;
  options->l2_normalize = defaults.l2_normalize ? 1 : 0;
}

ctxzsl_status ctxzsl_cmd_run(const ctxzsl_run_options* options) {
  if (ctxzsl_status s = require(options, "options")) return s;
  if (ctxzsl_status s = require(options->features_path, "features_path")) return s;
  if (ctxzsl_status s = require(options->annotations_path, "annotations_path")) return s;
  if (ctxzsl_status s = require(options->vectors_path, "vectors_path")) return s;
  if (ctxzsl_status s = require(options->split_path, "split_path")) return s;
  if (ctxzsl_status s = require(options->out_dir, "out_dir")) return s;
  if (ctxzsl_status s = require(options->model, "model")) return s;
  return guarded([&]() {
    ctxzsl::RunCommandConfig cfg;
    cfg.features_path = options->features_path;
    cfg.annotations_path = options->annotations_path;
    cfg.vectors_path = options->vectors_path;
    cfg.split_path = options->split_path;
    cfg.out_dir = options->out_dir;
    cfg.model = ctxzsl::parse_model_kind(options->model);
    cfg.hyper.gamma = options->gamma;
    cfg.hyper.lambda = options->lambda;
    cfg.hyper.alpha = options->alpha;
    cfg.hyper.c_max = options->c_max;
    cfg.hyper.cost = options->cost;
    cfg.hyper.pos_weight = options->pos_weight;
    cfg.hyper.lambda1 = options->lambda1;
    cfg.hyper.lambda2 = options->lambda2;
    cfg.hyper.l2_normalize = options->l2_normalize != 0;
    ctxzsl::cmd_run(cfg);
  });
}

ctxzsl_status ctxzsl_cmd_eval(const char* scores_path, const char* annotations_path,
                              const char* split_path, const char* binarize_policy,
                              const char* out_path) {
  if (ctxzsl_status s = require(scores_path, "scores_path")) return s;
  if (ctxzsl_status s = require(annotations_path, "annotations_path")) return s;
  if (ctxzsl_status s = require(split_path, "split_path")) return s;
  if (ctxzsl_status s = require(out_path, "out_path")) return s;
  return guarded([&]() {
    ctxzsl::EvalCommandConfig cfg;
    cfg.scores_path = scores_path;
    cfg.annotations_path = annotations_path;
    cfg.split_path = split_path;
    cfg.out_path = out_path;
    cfg.policy = ctxzsl::BinarizePolicy::parse(
        binarize_policy == nullptr ? "uniform" : binarize_policy);
    ctxzsl::cmd_eval(cfg);
  });
}

ctxzsl_status ctxzsl_cmd_explain(const char* model_path, const char* vectors_path,
                                 const char* novel_name, const char* known_vocab_path,
                                 const char* out_path) {
  if (ctxzsl_status s = require(model_path, "model_path")) return s;
  if (ctxzsl_status s = require(vectors_path, "vectors_path")) return s;
  if (ctxzsl_status s = require(novel_name, "novel_name")) return s;
  if (ctxzsl_status s = require(known_vocab_path, "known_vocab_path")) return s;
  if (ctxzsl_status s = require(out_path, "out_path")) return s;
  return guarded([&]() {
    ctxzsl::ExplainCommandConfig cfg;
    cfg.model_path = model_path;
    cfg.vectors_path = vectors_path;
    cfg.novel_name = novel_name;
    cfg.known_vocab_path = known_vocab_path;
    cfg.out_path = out_path;
    ctxzsl::cmd_explain(cfg);
  });
}

ctxzsl_status ctxzsl_cmd_synth(const char* config_path, const char* out_dir) {
  if (ctxzsl_status s = require(config_path, "config_path")) return s;
  if (ctxzsl_status s = require(out_dir, "out_dir")) return s;
  return guarded([&]() { ctxzsl::cmd_synth(config_path, out_dir); });
}

ctxzsl_status ctxzsl_cmd_experiment(const char* config_path) {
  if (ctxzsl_status s = require(config_path, "config_path")) return s;
  return guarded([&]() { ctxzsl::cmd_experiment(config_path); });
}

ctxzsl_status ctxzsl_features_load(const char* path, ctxzsl_features** out) {
  if (ctxzsl_status s = require(path, "path")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded([&]() { *out = new ctxzsl_features{ctxzsl::load_features(path)}; });
}

void ctxzsl_features_free(ctxzsl_features* features) { delete features; }

ctxzsl_status ctxzsl_features_dims(const ctxzsl_features* features, size_t* dim,
                                   size_t* count) {
  if (ctxzsl_status s = require(features, "features")) return s;
  if (dim != nullptr) *dim = features->value.dim();
  if (count != nullptr) *count = features->value.count();
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_annotations_load(const char* path, ctxzsl_annotations** out) {
  if (ctxzsl_status s = require(path, "path")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded(
      [&]() { *out = new ctxzsl_annotations{ctxzsl::load_annotations(path)}; });
}

void ctxzsl_annotations_free(ctxzsl_annotations* annotations) { delete annotations; }

ctxzsl_status ctxzsl_annotations_dims(const ctxzsl_annotations* annotations,
                                      size_t* num_attributes, size_t* count) {
  if (ctxzsl_status s = require(annotations, "annotations")) return s;
  if (num_attributes != nullptr) *num_attributes = annotations->value.num_attributes();
  if (count != nullptr) *count = annotations->value.count();
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_align(const ctxzsl_features* features,
                           const ctxzsl_annotations* annotations,
                           ctxzsl_features** features_out,
                           ctxzsl_annotations** annotations_out) {
  if (ctxzsl_status s = require(features, "features")) return s;
  if (ctxzsl_status s = require(annotations, "annotations")) return s;
  if (ctxzsl_status s = require(features_out, "features_out")) return s;
  if (ctxzsl_status s = require(annotations_out, "annotations_out")) return s;
  return guarded([&]() {
    ctxzsl::AlignedData aligned =
        ctxzsl::validate_aligned(features->value, annotations->value);
    *features_out = new ctxzsl_features{std::move(aligned.features)};
    *annotations_out = new ctxzsl_annotations{std::move(aligned.annotations)};
  });
}

ctxzsl_status ctxzsl_split_load(const char* path, ctxzsl_split** out) {
  if (ctxzsl_status s = require(path, "path")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded([&]() { *out = new ctxzsl_split{ctxzsl::load_split(path)}; });
}

void ctxzsl_split_free(ctxzsl_split* split) { delete split; }

ctxzsl_status ctxzsl_split_dims(const ctxzsl_split* split, size_t* num_known,
                                size_t* num_novel, size_t* num_train,
                                size_t* num_test) {
  if (ctxzsl_status s = require(split, "split")) return s;
  if (num_known != nullptr) *num_known = split->value.known().size();
  if (num_novel != nullptr) *num_novel = split->value.novel().size();
  if (num_train != nullptr) *num_train = split->value.train_ids().size();
  if (num_test != nullptr) *num_test = split->value.test_ids().size();
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_word_table_load(const char* path, ctxzsl_word_table** out) {
  if (ctxzsl_status s = require(path, "path")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded(
      [&]() { *out = new ctxzsl_word_table{ctxzsl::load_word_vectors(path)}; });
}

void ctxzsl_word_table_free(ctxzsl_word_table* table) { delete table; }

ctxzsl_status ctxzsl_word_table_dim(const ctxzsl_word_table* table, size_t* dim) {
  if (ctxzsl_status s = require(table, "table")) return s;
  if (ctxzsl_status s = require(dim, "dim")) return s;
  *dim = table->value.dim();
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_embed(const ctxzsl_word_table* table, const char* name,
                           double* buffer, size_t buffer_len) {
  if (ctxzsl_status s = require(table, "table")) return s;
  if (ctxzsl_status s = require(name, "name")) return s;
  if (ctxzsl_status s = require(buffer, "buffer")) return s;
  return guarded([&]() {
    Eigen::VectorXd v = ctxzsl::embed_attribute(name, table->value);
    if (static_cast<size_t>(v.size()) != buffer_len) {
      throw ctxzsl::Error(ctxzsl::ErrorCode::kDimension,
                          "embedding buffer length " + std::to_string(buffer_len) +
                              " does not match dimensionality " +
                              std::to_string(v.size()));
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) buffer[i] = v(i);
  });
}

ctxzsl_status ctxzsl_known_train(const ctxzsl_features* features,
                                 const ctxzsl_annotations* annotations, double cost,
                                 double pos_weight, ctxzsl_known_model** out) {
  if (ctxzsl_status s = require(features, "features")) return s;
  if (ctxzsl_status s = require(annotations, "annotations")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded([&]() {
    ctxzsl::KnownTrainOptions options;
    options.cost = cost;
    options.pos_weight = pos_weight;
    *out = new ctxzsl_known_model{
        ctxzsl::train_known(features->value, annotations->value, options)};
  });
}

ctxzsl_status ctxzsl_known_model_load(const char* path, ctxzsl_known_model** out) {
  if (ctxzsl_status s = require(path, "path")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded(
      [&]() { *out = new ctxzsl_known_model{ctxzsl::load_known_model(path)}; });
}

ctxzsl_status ctxzsl_known_model_save(const ctxzsl_known_model* model,
                                      const char* path) {
  if (ctxzsl_status s = require(model, "model")) return s;
  if (ctxzsl_status s = require(path, "path")) return s;
  return guarded([&]() { ctxzsl::save_known_model(model->value, path); });
}

void ctxzsl_known_model_free(ctxzsl_known_model* model) { delete model; }

ctxzsl_status ctxzsl_known_predict(const ctxzsl_known_model* model,
                                   const ctxzsl_features* features,
                                   ctxzsl_scores** out) {
  if (ctxzsl_status s = require(model, "model")) return s;
  if (ctxzsl_status s = require(features, "features")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded([&]() {
    *out = new ctxzsl_scores{ctxzsl::predict_known(model->value, features->value)};
  });
}

ctxzsl_status ctxzsl_text_conditional_create(
    const ctxzsl_word_table* table, const char* const* novel_names, size_t num_novel,
    const char* const* known_names, size_t num_known, double gamma,
    ctxzsl_conditional** out) {
  if (ctxzsl_status s = require(table, "table")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded([&]() {
    ctxzsl::EmbeddedVocabulary novel =
        embed_names(table->value, collect_names(novel_names, num_novel, "novel_names"));
    ctxzsl::EmbeddedVocabulary known =
        embed_names(table->value, collect_names(known_names, num_known, "known_names"));
    *out = new ctxzsl_conditional{
        ctxzsl::text_conditional(novel, known, ctxzsl::TemperatureParam{gamma})};
  });
}

ctxzsl_status ctxzsl_cooc_conditional_create(
    const ctxzsl_word_table* table, const char* model_path,
    const char* const* novel_names, size_t num_novel, const char* const* known_names,
    size_t num_known, ctxzsl_conditional** out) {
  if (ctxzsl_status s = require(table, "table")) return s;
  if (ctxzsl_status s = require(model_path, "model_path")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded([&]() {
    ctxzsl::BilinearContextModel model = ctxzsl::load_bilinear(model_path);
    ctxzsl::EmbeddedVocabulary novel =
        embed_names(table->value, collect_names(novel_names, num_novel, "novel_names"));
    ctxzsl::EmbeddedVocabulary known =
        embed_names(table->value, collect_names(known_names, num_known, "known_names"));
    *out = new ctxzsl_conditional{ctxzsl::cooc_conditional(novel, known, model)};
  });
}

void ctxzsl_conditional_free(ctxzsl_conditional* conditional) { delete conditional; }

ctxzsl_status ctxzsl_conditional_value(const ctxzsl_conditional* conditional,
                                       size_t novel_index, size_t known_index,
                                       double* out) {
  if (ctxzsl_status s = require(conditional, "conditional")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  const Eigen::MatrixXd& p = conditional->value.probabilities();
  if (novel_index >= static_cast<size_t>(p.rows()) ||
      known_index >= static_cast<size_t>(p.cols())) {
    return set_error(CTXZSL_ERR_DIMENSION, "conditional index out of range");
  }
  *out = p(static_cast<Eigen::Index>(novel_index),
           static_cast<Eigen::Index>(known_index));
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_marginal_predict(const ctxzsl_scores* known_scores,
                                      const ctxzsl_conditional* conditional,
                                      ctxzsl_scores** out) {
  if (ctxzsl_status s = require(known_scores, "known_scores")) return s;
  if (ctxzsl_status s = require(conditional, "conditional")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded([&]() {
    *out = new ctxzsl_scores{
        ctxzsl::marginal_predict(known_scores->value, conditional->value)};
  });
}

ctxzsl_status ctxzsl_scores_load(const char* path, ctxzsl_scores** out) {
  if (ctxzsl_status s = require(path, "path")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  return guarded([&]() { *out = new ctxzsl_scores{ctxzsl::load_scores(path)}; });
}

ctxzsl_status ctxzsl_scores_save(const ctxzsl_scores* scores, const char* path) {
  if (ctxzsl_status s = require(scores, "scores")) return s;
  if (ctxzsl_status s = require(path, "path")) return s;
  return guarded([&]() { ctxzsl::save_scores(scores->value, path); });
}

void ctxzsl_scores_free(ctxzsl_scores* scores) { delete scores; }

ctxzsl_status ctxzsl_scores_dims(const ctxzsl_scores* scores, size_t* num_attributes,
                                 size_t* count) {
  if (ctxzsl_status s = require(scores, "scores")) return s;
  if (num_attributes != nullptr) *num_attributes = scores->value.num_attributes();
  if (count != nullptr) *count = scores->value.count();
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_scores_value(const ctxzsl_scores* scores, size_t attribute,
                                  size_t instance, double* out) {
  if (ctxzsl_status s = require(scores, "scores")) return s;
  if (ctxzsl_status s = require(out, "out")) return s;
  if (attribute >= scores->value.num_attributes() ||
      instance >= scores->value.count()) {
    return set_error(CTXZSL_ERR_DIMENSION, "score index out of range");
  }
  *out = scores->value.scores()(static_cast<Eigen::Index>(attribute),
                                static_cast<Eigen::Index>(instance));
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_scores_attribute(const ctxzsl_scores* scores, size_t index,
                                      const char** name) {
  if (ctxzsl_status s = require(scores, "scores")) return s;
  if (ctxzsl_status s = require(name, "name")) return s;
  if (index >= scores->value.num_attributes()) {
    return set_error(CTXZSL_ERR_DIMENSION, "attribute index out of range");
  }
  *name = scores->value.vocabulary().name(index).c_str();
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_scores_instance(const ctxzsl_scores* scores, size_t index,
                                     const char** id) {
  if (ctxzsl_status s = require(scores, "scores")) return s;
  if (ctxzsl_status s = require(id, "id")) return s;
  if (index >= scores->value.count()) {
    return set_error(CTXZSL_ERR_DIMENSION, "instance index out of range");
  }
  *id = scores->value.ids().at(index).c_str();
  g_last_error.clear();
  return CTXZSL_OK;
}

ctxzsl_status ctxzsl_evaluate(const ctxzsl_scores* scores,
                              const ctxzsl_annotations* annotations,
                              const ctxzsl_split* split, const char* binarize_policy,
                              double* auc, double* label_ap, double* example_ap,
                              double* hamming, double* ranking) {
  if (ctxzsl_status s = require(scores, "scores")) return s;
  if (ctxzsl_status s = require(annotations, "annotations")) return s;
  if (ctxzsl_status s = require(split, "split")) return s;
  return guarded([&]() {
    ctxzsl::BinarizePolicy policy = ctxzsl::BinarizePolicy::parse(
        binarize_policy == nullptr ? "uniform" : binarize_policy);
    ctxzsl::MetricsReport report = ctxzsl::evaluate_scores(
        scores->value, annotations->value, split->value, policy);
    if (auc != nullptr) *auc = report.auc;
    if (label_ap != nullptr) *label_ap = report.label_ap;
    if (example_ap != nullptr) *example_ap = report.example_ap;
    if (hamming != nullptr) *hamming = report.hamming;
    if (ranking != nullptr) *ranking = report.ranking;
  });
}

}  // extern "C"
