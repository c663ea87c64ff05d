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

#include "ctxzsl/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "ctxzsl/synth.hpp"
#include "ctxzsl/zsl.hpp"

namespace ctxzsl {

namespace {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CTXZSL_WORKERS")) {
    int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

std::string padded_index(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d", index);
  return buf;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create directory: " + path);
  }
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

// Columns of `features` restricted to `ids`, in the given order.
FeatureMatrix restrict_features(const FeatureMatrix& features,
                                const std::vector<std::string>& ids) {
  Eigen::MatrixXd data(static_cast<Eigen::Index>(features.dim()),
                       static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto at = features.find(ids[i]);
    if (!at) {
      throw Error(ErrorCode::kVocabulary, "missing instance id '" + ids[i] + "'");
    }
    data.col(static_cast<Eigen::Index>(i)) =
        features.data().col(static_cast<Eigen::Index>(*at));
  }
  return FeatureMatrix(ids, std::move(data));
}

// Embedding columns for a subset vocabulary, in subset order.
EmbeddedVocabulary restrict_embeddings(const EmbeddedVocabulary& embedded,
                                       const AttributeVocabulary& subset) {
  Eigen::MatrixXd vectors(embedded.vectors.rows(),
                          static_cast<Eigen::Index>(subset.size()));
  for (std::size_t a = 0; a < subset.size(); ++a) {
    const std::size_t at = embedded.vocabulary.index_of(subset.name(a));
    vectors.col(static_cast<Eigen::Index>(a)) =
        embedded.vectors.col(static_cast<Eigen::Index>(at));
  }
  return EmbeddedVocabulary{subset, std::move(vectors)};
}

nlohmann::json hyper_to_json(const Hyperparameters& h) {
  return nlohmann::json{{"gamma", h.gamma},
                        {"lambda", h.lambda},
                        {"alpha", h.alpha},
                        {"c_max", h.c_max},
                        {"cost", h.cost},
                        {"pos_weight", h.pos_weight},
                        {"lambda1", h.lambda1},
                        {"lambda2", h.lambda2},
                        {"l2_normalize", h.l2_normalize}};
}

Hyperparameters hyper_from_json(const nlohmann::json& j) {
  Hyperparameters h;
  h.gamma = j.value("gamma", h.gamma);
  h.lambda = j.value("lambda", h.lambda);
  h.alpha = j.value("alpha", h.alpha);
  h.c_max = j.value("c_max", h.c_max);
  h.cost = j.value("cost", h.cost);
  h.pos_weight = j.value("pos_weight", h.pos_weight);
  h.lambda1 = j.value("lambda1", h.lambda1);
  h.lambda2 = j.value("lambda2", h.lambda2);
  h.l2_normalize = j.value("l2_normalize", h.l2_normalize);
  return h;
}

nlohmann::json metrics_to_json(const MetricsReport& r) {
  return nlohmann::json{
      {"auc", r.auc},
      {"label_ap", r.label_ap},
      {"example_ap", r.example_ap},
      {"hamming", r.hamming},
      {"ranking", r.ranking},
      {"skipped",
       {{"auc_labels", r.skipped.auc_labels},
        {"ap_labels", r.skipped.ap_labels},
        {"ap_instances", r.skipped.ap_instances},
        {"ranking_instances", r.skipped.ranking_instances}}}};
}

std::string describe_error(const Error& e) {
  return std::string(error_code_name(e.code())) + ": " + e.what();
}

// Weight config resolved from the hyperparameters: an explicit positive
// c_max wins, otherwise the data-driven default cap; alpha always applies.
WeightConfig resolve_weight_config(const Hyperparameters& hyper,
                                   const CooccurrenceMatrix& counts) {
  WeightConfig cfg = default_weight_config(counts);
  cfg.alpha = hyper.alpha;
  if (hyper.c_max > 0.0) cfg.c_max = hyper.c_max;
  return cfg;
}

}  // namespace

const char* model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::kTexCazsl: return "texcazsl";
    case ModelKind::kCoCazsl: return "cocazsl";
    case ModelKind::kWve: return "wve";
    case ModelKind::kEszsl: return "eszsl";
    case ModelKind::kExdap: return "exdap";
    case ModelKind::kDmp: return "dmp";
  }
  throw Error(ErrorCode::kInternal, "unhandled model kind");
}

ModelKind parse_model_kind(const std::string& name) {
  for (ModelKind kind : all_model_kinds()) {
    if (name == model_kind_name(kind)) return kind;
  }
  throw Error(ErrorCode::kConfig,
              "unknown model '" + name +
                  "' (expected texcazsl, cocazsl, wve, eszsl, exdap, or dmp)");
}

const std::vector<ModelKind>& all_model_kinds() {
  static const std::vector<ModelKind> kinds = {
      ModelKind::kTexCazsl, ModelKind::kCoCazsl, ModelKind::kWve,
      ModelKind::kEszsl,    ModelKind::kExdap,   ModelKind::kDmp};
  return kinds;
}

LoadedDataset load_dataset(const std::string& features_path,
                           const std::string& annotations_path,
                           const std::string& vectors_path, bool l2_normalize) {
  FeatureMatrix features = load_features(features_path);
  AnnotationMatrix annotations = load_annotations(annotations_path);
  AlignedData data = validate_aligned(features, annotations);
  if (l2_normalize) data.features = l2_normalized(data.features);
  WordVectorTable table = load_word_vectors(vectors_path);
  EmbeddedVocabulary embedded = embed_vocabulary(data.annotations.vocabulary(), table);
  return LoadedDataset{std::move(data), std::move(embedded)};
}

KnownStage train_known_stage(const LoadedDataset& dataset, const DatasetSplit& split,
                             const Hyperparameters& hyper) {
  AnnotationMatrix train_ann =
      dataset.data.annotations.restrict(split.known(), split.train_ids());
  std::vector<std::string> dropped = degenerate_attributes(train_ann);
  if (!dropped.empty()) {
    std::unordered_set<std::string> drop(dropped.begin(), dropped.end());
    std::vector<std::string> keep;
    for (const std::string& name : split.known().names()) {
      if (!drop.count(name)) keep.push_back(name);
    }
    if (keep.empty()) {
      throw Error(ErrorCode::kDegenerate,
                  "every known attribute is single-class on the training instances");
    }
    train_ann = dataset.data.annotations.restrict(AttributeVocabulary(keep),
                                                  split.train_ids());
  }
  FeatureMatrix train_x = restrict_features(dataset.data.features, split.train_ids());
  KnownTrainOptions options;
  options.cost = hyper.cost;
  options.pos_weight = hyper.pos_weight;
  KnownAttributeModel model = train_known(train_x, train_ann, options);
  return KnownStage{std::move(model), std::move(dropped)};
}

RunOutput run_model(const LoadedDataset& dataset, const DatasetSplit& split,
                    ModelKind kind, const Hyperparameters& hyper,
                    const KnownStage* shared_known) {
  FeatureMatrix test_x = restrict_features(dataset.data.features, split.test_ids());
  EmbeddedVocabulary novel_emb = restrict_embeddings(dataset.embedded, split.novel());

  if (kind == ModelKind::kTexCazsl || kind == ModelKind::kCoCazsl) {
    std::optional<KnownStage> own;
    const KnownStage* stage = shared_known;
    if (stage == nullptr) {
      own = train_known_stage(dataset, split, hyper);
      stage = &*own;
    }
    ScoreMatrix known_scores = predict_known(stage->model, test_x);
    EmbeddedVocabulary known_emb =
        restrict_embeddings(dataset.embedded, stage->model.vocabulary());

    if (kind == ModelKind::kTexCazsl) {
      ConditionalMatrix cond =
          text_conditional(novel_emb, known_emb, TemperatureParam{hyper.gamma});
      RunOutput out{marginal_predict(known_scores, cond)};
      out.dropped_known = stage->dropped;
      out.known = stage->model;
      return out;
    }

    AnnotationMatrix train_ann =
        dataset.data.annotations.restrict(stage->model.vocabulary(), split.train_ids());
    CooccurrenceMatrix counts = cooccurrence(train_ann);
    BilinearContextModel context = fit_bilinear(
        known_emb, counts, hyper.lambda, resolve_weight_config(hyper, counts));
    ConditionalMatrix cond = cooc_conditional(novel_emb, known_emb, context);
    RunOutput out{marginal_predict(known_scores, cond)};
    out.dropped_known = stage->dropped;
    out.known = stage->model;
    out.bilinear = std::move(context);
    return out;
  }

  // Baselines share the train-side restriction over the full known set.
  AnnotationMatrix train_ann =
      dataset.data.annotations.restrict(split.known(), split.train_ids());
  FeatureMatrix train_x = restrict_features(dataset.data.features, split.train_ids());
  EmbeddedVocabulary known_emb = restrict_embeddings(dataset.embedded, split.known());
  const Eigen::Index q = static_cast<Eigen::Index>(split.novel().size());
  const Eigen::Index n = static_cast<Eigen::Index>(test_x.count());
  Eigen::MatrixXd scores(q, n);

  switch (kind) {
    case ModelKind::kWve: {
      EmbeddingRegressor model = wve_train(train_x, train_ann, known_emb, hyper.lambda);
      for (Eigen::Index i = 0; i < n; ++i) {
        scores.col(i) =
            wve_predict(test_x.data().col(i), model, novel_emb);
      }
      RunOutput out{ScoreMatrix(split.novel(), split.test_ids(), std::move(scores))};
      out.regressor = std::move(model);
      return out;
    }
    case ModelKind::kEszsl: {
      EszslModel model =
          eszsl_train(train_x, train_ann, known_emb, hyper.lambda1, hyper.lambda2);
      for (Eigen::Index i = 0; i < n; ++i) {
        scores.col(i) = eszsl_predict(test_x.data().col(i), model, novel_emb);
      }
      RunOutput out{ScoreMatrix(split.novel(), split.test_ids(), std::move(scores))};
      out.eszsl = std::move(model);
      return out;
    }
    case ModelKind::kExdap: {
      EmbeddingRegressor model =
          exdap_train(train_x, train_ann, known_emb, hyper.lambda);
      for (Eigen::Index i = 0; i < n; ++i) {
        scores.col(i) =
            exdap_predict(test_x.data().col(i), model, novel_emb, hyper.lambda);
      }
      RunOutput out{ScoreMatrix(split.novel(), split.test_ids(), std::move(scores))};
      out.regressor = std::move(model);
      return out;
    }
    case ModelKind::kDmp: {
      EmbeddingRegressor model =
          exdap_train(train_x, train_ann, known_emb, hyper.lambda);
      Eigen::MatrixXi binary(q, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        binary.col(i) = dmp_predict(test_x.data().col(i), model, novel_emb);
        scores.col(i) = dmp_rank_scores(test_x.data().col(i), model, novel_emb);
      }
      RunOutput out{ScoreMatrix(split.novel(), split.test_ids(), std::move(scores))};
      out.binary = std::move(binary);
      out.regressor = std::move(model);
      return out;
    }
    default:
      throw Error(ErrorCode::kInternal, "unhandled model kind");
  }
}

MetricsReport evaluate_scores(const ScoreMatrix& scores,
                              const AnnotationMatrix& annotations,
                              const DatasetSplit& split, const BinarizePolicy& policy,
                              const Eigen::MatrixXi* binary_override) {
  if (scores.vocabulary().size() != split.novel().size()) {
    throw Error(ErrorCode::kVocabulary,
                "score columns do not match the split's novel vocabulary");
  }
  for (const std::string& name : split.novel().names()) {
    if (!scores.vocabulary().contains(name)) {
      throw Error(ErrorCode::kVocabulary, "missing score column '" + name + "'");
    }
  }
  AnnotationMatrix ground_truth =
      annotations.restrict(scores.vocabulary(), scores.ids());
  return evaluate(scores, ground_truth, policy, binary_override);
}

void cmd_split(const std::string& annotations_path, const SplitConfig& cfg,
               const std::string& out_dir) {
  AnnotationMatrix annotations = load_annotations(annotations_path);
  ensure_directory(out_dir);
  const std::filesystem::path dir(out_dir);
  for (int i = 0; i < cfg.num_splits; ++i) {
    DatasetSplit split = generate_split(annotations.vocabulary(), annotations, cfg, i);
    save_split(split, (dir / ("split_" + padded_index(i) + ".json")).string());
  }
}

void cmd_run(const RunCommandConfig& cfg) {
  LoadedDataset dataset = load_dataset(cfg.features_path, cfg.annotations_path,
                                       cfg.vectors_path, cfg.hyper.l2_normalize);
  DatasetSplit split = load_split(cfg.split_path);
  RunOutput out = run_model(dataset, split, cfg.model, cfg.hyper);

  ensure_directory(cfg.out_dir);
  const std::filesystem::path dir(cfg.out_dir);
  save_scores(out.scores, (dir / "scores.csv").string());
  if (out.binary) {
    AnnotationMatrix decisions(out.scores.vocabulary(), out.scores.ids(), *out.binary);
    save_annotations(decisions, (dir / "binary.csv").string());
  }
  if (out.known) save_known_model(*out.known, (dir / "known_model.json").string());
  if (out.bilinear) save_bilinear(*out.bilinear, (dir / "bilinear.json").string());
  if (out.regressor) {
    save_regressor(*out.regressor, model_kind_name(cfg.model),
                   (dir / "model.json").string());
  }
  if (out.eszsl) save_eszsl(*out.eszsl, (dir / "model.json").string());

  nlohmann::json manifest;
  manifest["command"] = "run";
  manifest["model"] = model_kind_name(cfg.model);
  manifest["hyperparameters"] = hyper_to_json(cfg.hyper);
  manifest["inputs"] = {{"features", cfg.features_path},
                        {"annotations", cfg.annotations_path},
                        {"vectors", cfg.vectors_path},
                        {"split", cfg.split_path}};
  manifest["dropped_known"] = out.dropped_known;
  write_json_file(manifest, (dir / "manifest.json").string());
}

MetricsReport cmd_eval(const EvalCommandConfig& cfg) {
  ScoreMatrix scores = load_scores(cfg.scores_path);
  AnnotationMatrix annotations = load_annotations(cfg.annotations_path);
  DatasetSplit split = load_split(cfg.split_path);
  MetricsReport report = evaluate_scores(scores, annotations, split, cfg.policy);
  save_metrics(report, cfg.out_path);
  return report;
}

void cmd_explain(const ExplainCommandConfig& cfg) {
  BilinearContextModel model = load_bilinear(cfg.model_path);
  WordVectorTable table = load_word_vectors(cfg.vectors_path);
  AttributeVocabulary known_vocab(load_name_list(cfg.known_vocab_path));
  EmbeddedVocabulary known_emb = embed_vocabulary(known_vocab, table);

  Eigen::VectorXd novel_vec = embed_attribute(cfg.novel_name, table);
  Eigen::MatrixXd novel_cols(novel_vec.size(), 1);
  novel_cols.col(0) = novel_vec;
  EmbeddedVocabulary novel_emb{AttributeVocabulary({cfg.novel_name}),
                               std::move(novel_cols)};

  ConditionalMatrix cond = cooc_conditional(novel_emb, known_emb, model);
  std::vector<std::pair<std::string, double>> ranked =
      explain_novel(cfg.novel_name, cond);

  std::ofstream out(cfg.out_path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + cfg.out_path);
  }
  out << "known_attribute,probability\n";
  for (const auto& [name, probability] : ranked) {
    out << name << ',' << format_real(probability) << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + cfg.out_path);
  }
}

void cmd_synth(const std::string& config_path, const std::string& out_dir) {
  SynthConfig cfg = load_synth_config(config_path);
  SynthDataset dataset = generate(cfg);
  write_synth_dataset(dataset, cfg, out_dir);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open file for reading: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid experiment config JSON: " + e.what());
  }

  ExperimentConfig cfg;
  try {
    cfg.features_path = j.at("features").get<std::string>();
    cfg.annotations_path = j.at("annotations").get<std::string>();
    cfg.vectors_path = j.at("vectors").get<std::string>();
    cfg.output_dir = j.at("output_dir").get<std::string>();
    for (const auto& name : j.at("models")) {
      cfg.models.push_back(parse_model_kind(name.get<std::string>()));
    }
    if (j.contains("split")) {
      const auto& s = j["split"];
      cfg.split.num_novel = s.value("num_novel", cfg.split.num_novel);
      cfg.split.num_splits = s.value("num_splits", cfg.split.num_splits);
      cfg.split.seed = s.value("seed", cfg.split.seed);
    }
    if (j.contains("hyperparameters")) {
      cfg.hyper = hyper_from_json(j["hyperparameters"]);
    }
    if (j.contains("binarize")) {
      cfg.policy = BinarizePolicy::parse(j["binarize"].get<std::string>());
    }
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfig, path + ": " + e.what());
  }

  if (cfg.models.empty()) {
    throw Error(ErrorCode::kConfig, path + ": experiment model list is empty");
  }
  std::unordered_set<int> seen;
  for (ModelKind kind : cfg.models) {
    if (!seen.insert(static_cast<int>(kind)).second) {
      throw Error(ErrorCode::kConfig, path + ": duplicate model '" +
                                          std::string(model_kind_name(kind)) + "'");
    }
  }
  if (cfg.split.num_splits <= 0) {
    throw Error(ErrorCode::kConfig, path + ": num_splits must be positive");
  }
  for (const std::string& input :
       {cfg.features_path, cfg.annotations_path, cfg.vectors_path}) {
    if (!std::filesystem::exists(input)) {
      throw Error(ErrorCode::kIo, "missing input file: " + input);
    }
  }
  return cfg;
}

ExperimentResult cmd_experiment(const std::string& config_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  const LoadedDataset dataset =
      load_dataset(cfg.features_path, cfg.annotations_path, cfg.vectors_path,
                   cfg.hyper.l2_normalize);
  ensure_directory(cfg.output_dir);
  const std::filesystem::path out_root(cfg.output_dir);

  nlohmann::json manifest;
  manifest["command"] = "experiment";
  manifest["inputs"] = {{"features", cfg.features_path},
                        {"annotations", cfg.annotations_path},
                        {"vectors", cfg.vectors_path}};
  manifest["split"] = {{"num_novel", cfg.split.num_novel},
                       {"num_splits", cfg.split.num_splits},
                       {"seed", cfg.split.seed}};
  nlohmann::json model_names = nlohmann::json::array();
  for (ModelKind kind : cfg.models) model_names.push_back(model_kind_name(kind));
  manifest["models"] = model_names;
  manifest["hyperparameters"] = hyper_to_json(cfg.hyper);
  manifest["binarize"] = cfg.policy.describe();
  manifest["output_dir"] = cfg.output_dir;
  manifest["workers"] = cfg.workers;
  write_json_file(manifest, (out_root / "manifest.json").string());

  const int num_splits = cfg.split.num_splits;
  const int num_models = static_cast<int>(cfg.models.size());
  const bool needs_known =
      std::any_of(cfg.models.begin(), cfg.models.end(), [](ModelKind kind) {
        return kind == ModelKind::kTexCazsl || kind == ModelKind::kCoCazsl;
      });

  ExperimentResult result;
  result.cells.resize(static_cast<std::size_t>(num_splits) *
                      static_cast<std::size_t>(num_models));

  auto run_split = [&](int s) {
    const std::filesystem::path split_dir = out_root / ("split_" + padded_index(s));
    ExperimentCell* cells =
        result.cells.data() + static_cast<std::size_t>(s) * num_models;
    for (int m = 0; m < num_models; ++m) {
      cells[m].model = cfg.models[static_cast<std::size_t>(m)];
      cells[m].split_index = s;
    }

    std::optional<DatasetSplit> split;
    try {
      ensure_directory(split_dir.string());
      split = generate_split(dataset.data.annotations.vocabulary(),
                             dataset.data.annotations, cfg.split, s);
      save_split(*split, (split_dir / "split.json").string());
    } catch (const Error& e) {
      for (int m = 0; m < num_models; ++m) cells[m].error = describe_error(e);
      return;
    } catch (const std::exception& e) {
      for (int m = 0; m < num_models; ++m) {
        cells[m].error = std::string("CTXZSL_ERR_INTERNAL: ") + e.what();
      }
      return;
    }

    std::optional<KnownStage> stage;
    std::string stage_error;
    if (needs_known) {
      try {
        stage = train_known_stage(dataset, *split, cfg.hyper);
        save_known_model(stage->model, (split_dir / "known_model.json").string());
      } catch (const Error& e) {
        stage_error = describe_error(e);
      } catch (const std::exception& e) {
        stage_error = std::string("CTXZSL_ERR_INTERNAL: ") + e.what();
      }
    }

    for (int m = 0; m < num_models; ++m) {
      const ModelKind kind = cfg.models[static_cast<std::size_t>(m)];
      const bool uses_stage =
          kind == ModelKind::kTexCazsl || kind == ModelKind::kCoCazsl;
      if (uses_stage && !stage) {
        cells[m].error = stage_error;
        continue;
      }
      try {
        RunOutput out =
            run_model(dataset, *split, kind, cfg.hyper, stage ? &*stage : nullptr);
        const std::filesystem::path cell_dir = split_dir / model_kind_name(kind);
        ensure_directory(cell_dir.string());
        save_scores(out.scores, (cell_dir / "scores.csv").string());
        if (out.binary) {
          AnnotationMatrix decisions(out.scores.vocabulary(), out.scores.ids(),
                                     *out.binary);
          save_annotations(decisions, (cell_dir / "binary.csv").string());
        }
        if (out.bilinear) {
          save_bilinear(*out.bilinear, (cell_dir / "bilinear.json").string());
        }
        MetricsReport report =
            evaluate_scores(out.scores, dataset.data.annotations, *split, cfg.policy,
                            out.binary ? &*out.binary : nullptr);
        save_metrics(report, (cell_dir / "metrics.json").string());
        cells[m].metrics = report;
      } catch (const Error& e) {
        cells[m].error = describe_error(e);
      } catch (const std::exception& e) {
        cells[m].error = std::string("CTXZSL_ERR_INTERNAL: ") + e.what();
      }
    }
  };

  const int workers = std::min(resolve_workers(cfg.workers), num_splits);
  if (workers <= 1) {
    for (int s = 0; s < num_splits; ++s) run_split(s);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&]() {
        for (int s = next.fetch_add(1); s < num_splits; s = next.fetch_add(1)) {
          run_split(s);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  // Aggregation (single-threaded, deterministic).
  nlohmann::json aggregate_json;
  aggregate_json["models"] = nlohmann::json::array();
  std::string csv = "model,auc,label_ap,example_ap,hamming,ranking,splits_used,failures\n";
  for (int m = 0; m < num_models; ++m) {
    const ModelKind kind = cfg.models[static_cast<std::size_t>(m)];
    ExperimentModelSummary summary;
    summary.model = kind;
    std::vector<MetricsReport> successes;
    nlohmann::json per_split = nlohmann::json::array();
    for (int s = 0; s < num_splits; ++s) {
      const ExperimentCell& cell =
          result.cells[static_cast<std::size_t>(s) * num_models + m];
      nlohmann::json entry{{"split_index", s}};
      if (cell.metrics) {
        successes.push_back(*cell.metrics);
        entry["metrics"] = metrics_to_json(*cell.metrics);
      } else {
        entry["error"] = cell.error;
      }
      per_split.push_back(std::move(entry));
    }
    summary.successes = static_cast<int>(successes.size());
    summary.failures = num_splits - summary.successes;
    if (!successes.empty()) summary.aggregate = aggregate(successes);

    nlohmann::json row{{"model", model_kind_name(kind)},
                       {"successes", summary.successes},
                       {"failures", summary.failures},
                       {"per_split", std::move(per_split)}};
    csv += model_kind_name(kind);
    if (summary.aggregate) {
      row["mean"] = metrics_to_json(summary.aggregate->mean);
      row["std"] = metrics_to_json(summary.aggregate->stddev);
      const MetricsReport& mean = summary.aggregate->mean;
      const MetricsReport& stddev = summary.aggregate->stddev;
      const double means[] = {mean.auc, mean.label_ap, mean.example_ap, mean.hamming,
                              mean.ranking};
      const double stds[] = {stddev.auc, stddev.label_ap, stddev.example_ap,
                             stddev.hamming, stddev.ranking};
      for (int f = 0; f < 5; ++f) {
        csv += ',';
        csv += format_real(means[f]);
        csv += "±";
        csv += format_real(stds[f]);
      }
    } else {
      for (int f = 0; f < 5; ++f) csv += ",failed";
    }
    csv += ',';
    csv += std::to_string(summary.successes);
    csv += ',';
    csv += std::to_string(summary.failures);
    csv += '\n';
    aggregate_json["models"].push_back(std::move(row));
    result.summaries.push_back(std::move(summary));
  }

  write_json_file(aggregate_json, (out_root / "aggregate.json").string());
  std::ofstream csv_out(out_root / "aggregate.csv", std::ios::binary);
  if (!csv_out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " +
                                    (out_root / "aggregate.csv").string());
  }
  csv_out << csv;
  if (!csv_out) {
    throw Error(ErrorCode::kIo,
                "write failed: " + (out_root / "aggregate.csv").string());
  }
  return result;
}

}  // namespace ctxzsl
