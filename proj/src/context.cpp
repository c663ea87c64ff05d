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

#include "ctxzsl/context.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace ctxzsl {

namespace {

// Row-wise stable softmax of a logit matrix.
Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd probs(logits.rows(), logits.cols());
  for (Eigen::Index q = 0; q < logits.rows(); ++q) {
    const double row_max = logits.row(q).maxCoeff();
    Eigen::ArrayXd ex = (logits.row(q).array() - row_max).exp();
    probs.row(q) = (ex / ex.sum()).matrix();
  }
  return probs;
}

void check_embeddings(const EmbeddedVocabulary& embedded, const char* what) {
  if (!embedded.vectors.allFinite()) {
    throw Error(ErrorCode::kNumeric, std::string(what) + " embeddings contain non-finite values");
  }
  if (static_cast<std::size_t>(embedded.vectors.cols()) != embedded.vocabulary.size()) {
    throw Error(ErrorCode::kDimension,
                std::string(what) + " embedding count disagrees with its vocabulary");
  }
}

// Weighted least-squares terms of the bilinear objective: pairs with
// c_ij = 0 never appear (weight is exactly 0 and log 0 is undefined).
struct PairTerms {
  Eigen::MatrixXd weights;  // P x P, zero where excluded
  Eigen::MatrixXd targets;  // log c_ij, zero where excluded
};

PairTerms pair_terms(const CooccurrenceMatrix& counts, const WeightConfig& cfg) {
  const Eigen::Index P = counts.counts.rows();
  PairTerms terms{Eigen::MatrixXd::Zero(P, P), Eigen::MatrixXd::Zero(P, P)};
  for (Eigen::Index i = 0; i < P; ++i) {
    for (Eigen::Index j = 0; j < P; ++j) {
      const auto c = counts.counts(i, j);
      if (c > 0) {
        terms.weights(i, j) = cooc_weight(static_cast<double>(c), cfg);
        terms.targets(i, j) = std::log(static_cast<double>(c));
      }
    }
  }
  return terms;
}

void validate_weight_config(const WeightConfig& cfg) {
  if (!(cfg.c_max > 0.0)) {
    throw Error(ErrorCode::kConfig, "weight config requires c_max > 0");
  }
  if (!(cfg.alpha > 0.0)) {
    throw Error(ErrorCode::kConfig, "weight config requires alpha > 0");
  }
}

}  // namespace

CooccurrenceMatrix cooccurrence(const AnnotationMatrix& annotations) {
  const Eigen::MatrixXi& y = annotations.cells();
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts =
      (y.cast<std::int64_t>() * y.cast<std::int64_t>().transpose());
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> prevalence = counts.rowwise().sum();
  return CooccurrenceMatrix{annotations.vocabulary(), std::move(counts), std::move(prevalence)};
}

ConditionalMatrix conditional_from_counts(const CooccurrenceMatrix& counts) {
  const Eigen::Index P = counts.counts.rows();
  Eigen::MatrixXd probs(P, P);
  for (Eigen::Index i = 0; i < P; ++i) {
    const auto c_i = counts.prevalence(i);
    if (c_i <= 0) {
      throw Error(ErrorCode::kDegenerate,
                  "zero prevalence for attribute " +
                      counts.vocabulary.name(static_cast<std::size_t>(i)));
    }
    for (Eigen::Index j = 0; j < P; ++j) {
      probs(i, j) = static_cast<double>(counts.counts(i, j)) / static_cast<double>(c_i);
    }
  }
  return ConditionalMatrix(counts.vocabulary, counts.vocabulary, std::move(probs));
}

WeightConfig default_weight_config(const CooccurrenceMatrix& counts) {
  std::int64_t max_off_diagonal = 0;
  for (Eigen::Index i = 0; i < counts.counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < counts.counts.cols(); ++j) {
      if (i != j) max_off_diagonal = std::max(max_off_diagonal, counts.counts(i, j));
    }
  }
  WeightConfig cfg;
  cfg.alpha = 0.75;
  cfg.c_max = std::max(1.0, static_cast<double>(max_off_diagonal) / 2.0);
  return cfg;
}

double cooc_weight(double c, const WeightConfig& cfg) {
  validate_weight_config(cfg);
  if (c < 0.0) {
    throw Error(ErrorCode::kConfig, "co-occurrence count must be non-negative");
  }
  if (c == 0.0) return 0.0;
  if (c > cfg.c_max) return 1.0;
  return std::pow(c / cfg.c_max, cfg.alpha);
}

ConditionalMatrix text_conditional(const EmbeddedVocabulary& novel,
                                   const EmbeddedVocabulary& known, TemperatureParam temp) {
  if (!(temp.gamma > 0.0)) {
    throw Error(ErrorCode::kConfig, "temperature gamma must be positive");
  }
  check_embeddings(novel, "novel");
  check_embeddings(known, "known");
  if (novel.vectors.rows() != known.vectors.rows()) {
    throw Error(ErrorCode::kDimension, "novel and known embedding dimensionalities disagree");
  }
  Eigen::MatrixXd logits = novel.vectors.transpose() * known.vectors;
  logits /= temp.gamma;
  return ConditionalMatrix(novel.vocabulary, known.vocabulary, row_softmax(logits));
}

double bilinear_objective(const EmbeddedVocabulary& known, const CooccurrenceMatrix& counts,
                          double lambda, const WeightConfig& cfg, const Eigen::MatrixXd& M) {
  PairTerms terms = pair_terms(counts, cfg);
  const Eigen::MatrixXd& V = known.vectors;  // D_v x P
  Eigen::MatrixXd S = V.transpose() * M * V;  // S_ij = v_i^T M v_j
  Eigen::MatrixXd R = S - terms.targets;
  double value = (terms.weights.array() * R.array().square()).sum();
  return value + lambda * M.squaredNorm();
}

Eigen::MatrixXd bilinear_gradient(const EmbeddedVocabulary& known,
                                  const CooccurrenceMatrix& counts, double lambda,
                                  const WeightConfig& cfg, const Eigen::MatrixXd& M) {
  PairTerms terms = pair_terms(counts, cfg);
  const Eigen::MatrixXd& V = known.vectors;
  Eigen::MatrixXd S = V.transpose() * M * V;
  Eigen::MatrixXd R = (terms.weights.array() * (S - terms.targets).array()).matrix();
  return 2.0 * (V * R * V.transpose()) + 2.0 * lambda * M;
}

BilinearContextModel fit_bilinear(const EmbeddedVocabulary& known,
                                  const CooccurrenceMatrix& counts, double lambda,
                                  const WeightConfig& cfg, const BilinearOptimOptions& optim) {
  validate_weight_config(cfg);
  check_embeddings(known, "known");
  if (lambda < 0.0) {
    throw Error(ErrorCode::kConfig, "lambda must be non-negative");
  }
  if (known.vocabulary.size() != static_cast<std::size_t>(counts.counts.rows())) {
    throw Error(ErrorCode::kDimension,
                "embedding count disagrees with the co-occurrence matrix");
  }
  if (optim.max_iterations < 0 || optim.max_halvings < 0) {
    throw Error(ErrorCode::kConfig, "optimiser limits must be non-negative");
  }

  PairTerms terms = pair_terms(counts, cfg);
  const Eigen::MatrixXd& V = known.vectors;  // D_v x P
  const Eigen::Index D = V.rows();

  auto objective_at = [&](const Eigen::MatrixXd& M) {
    Eigen::MatrixXd S = V.transpose() * M * V;
    Eigen::MatrixXd R = S - terms.targets;
    return (terms.weights.array() * R.array().square()).sum() + lambda * M.squaredNorm();
  };
  auto gradient_at = [&](const Eigen::MatrixXd& M) {
    Eigen::MatrixXd S = V.transpose() * M * V;
    Eigen::MatrixXd R = (terms.weights.array() * (S - terms.targets).array()).matrix();
    return (2.0 * (V * R * V.transpose()) + 2.0 * lambda * M).eval();
  };

  // Safe default step: inverse of an upper curvature bound
  //   L <= 2 sum_ij w_ij ||v_i||^2 ||v_j||^2 + 2 lambda.
  double step = optim.step;
  if (step <= 0.0) {
    Eigen::VectorXd norms(V.cols());
    for (Eigen::Index p = 0; p < V.cols(); ++p) norms(p) = V.col(p).squaredNorm();
    double curvature = 2.0 * lambda;
    for (Eigen::Index i = 0; i < terms.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < terms.weights.cols(); ++j) {
        curvature += 2.0 * terms.weights(i, j) * norms(i) * norms(j);
      }
    }
    step = curvature > 0.0 ? 1.0 / curvature : 1.0;
  }

  BilinearContextModel model;
  model.M = Eigen::MatrixXd::Zero(D, D);
  model.lambda = lambda;
  model.weight_cfg = cfg;
  model.iterations = 0;

  double obj = objective_at(model.M);
  const double initial_obj = obj;
  const double divergence_limit = 10.0 * std::max(initial_obj, 1e-300);
  model.objective_trace.push_back(obj);

  for (int iter = 0; iter < optim.max_iterations; ++iter) {
    Eigen::MatrixXd grad = gradient_at(model.M);
    if (grad.norm() <= optim.tolerance) break;

    bool accepted = false;
    for (int halving = 0; halving <= optim.max_halvings; ++halving) {
      Eigen::MatrixXd cand = model.M - step * grad;
      const double cand_obj = objective_at(cand);
      if (std::isfinite(cand_obj) && cand_obj <= obj) {
        model.M = std::move(cand);
        obj = cand_obj;
        model.iterations = iter + 1;
        model.objective_trace.push_back(obj);
        step = std::min(step * 1.25, 1e9);
        accepted = true;
        break;
      }
      if (!std::isfinite(cand_obj) || cand_obj > divergence_limit) {
        // A candidate far above the initial objective signals a diverging
        // step; keep halving unless the allowance is exhausted.
        if (halving == optim.max_halvings) {
          throw Error(ErrorCode::kNumeric,
                      "bilinear fit diverged: objective exceeded 10x its initial value; "
                      "reduce the step size");
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!std::isfinite(obj) || obj > divergence_limit) {
        throw Error(ErrorCode::kNumeric,
                    "bilinear fit diverged: objective exceeded 10x its initial value; "
                    "reduce the step size");
      }
      break;  // step underflow at a near-stationary point
    }
  }

  model.final_objective = obj;
  return model;
}

ConditionalMatrix cooc_conditional(const EmbeddedVocabulary& novel,
                                   const EmbeddedVocabulary& known,
                                   const BilinearContextModel& model) {
  check_embeddings(novel, "novel");
  check_embeddings(known, "known");
  if (novel.vectors.rows() != known.vectors.rows()) {
    throw Error(ErrorCode::kDimension, "novel and known embedding dimensionalities disagree");
  }
  if (model.M.rows() != novel.vectors.rows() || model.M.cols() != novel.vectors.rows()) {
    throw Error(ErrorCode::kDimension,
                "bilinear model dimensionality " + std::to_string(model.M.rows()) +
                    " does not match embeddings of dimensionality " +
                    std::to_string(novel.vectors.rows()));
  }
  Eigen::MatrixXd logits = novel.vectors.transpose() * (model.M * known.vectors);
  return ConditionalMatrix(novel.vocabulary, known.vocabulary, row_softmax(logits));
}

void save_bilinear(const BilinearContextModel& model, const std::string& path) {
  nlohmann::json j;
  j["dim"] = model.M.rows();
  j["lambda"] = model.lambda;
  j["alpha"] = model.weight_cfg.alpha;
  j["c_max"] = model.weight_cfg.c_max;
  std::vector<double> m;
  m.reserve(static_cast<std::size_t>(model.M.size()));
  for (Eigen::Index r = 0; r < model.M.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.M.cols(); ++c) m.push_back(model.M(r, c));
  }
  j["M"] = m;
  j["final_objective"] = model.final_objective;
  j["iterations"] = model.iterations;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

BilinearContextModel load_bilinear(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open file for reading: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
    const auto dim = j.at("dim").get<Eigen::Index>();
    const auto m = j.at("M").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(m.size()) != dim * dim) {
      throw Error(ErrorCode::kParse, path + ": bilinear M size disagrees with dim");
    }
    BilinearContextModel model;
    model.M.resize(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        model.M(r, c) = m[static_cast<std::size_t>(r * dim + c)];
      }
    }
    model.lambda = j.at("lambda").get<double>();
    model.weight_cfg.alpha = j.at("alpha").get<double>();
    model.weight_cfg.c_max = j.at("c_max").get<double>();
    model.final_objective = j.at("final_objective").get<double>();
    model.iterations = j.at("iterations").get<int>();
    if (!model.M.allFinite()) {
      throw Error(ErrorCode::kNumeric, path + ": bilinear M contains non-finite values");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid bilinear JSON: " + e.what());
  }
}

}  // namespace ctxzsl
