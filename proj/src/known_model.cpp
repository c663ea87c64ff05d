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

#include "ctxzsl/known_model.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

namespace ctxzsl {

namespace {

double stable_log1pexp(double m) {
  // log(1 + exp(-m)) without overflow for large |m|.
  if (m > 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CTXZSL_WORKERS")) {
    int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  return 1;
}

struct BinaryProblem {
  const Eigen::MatrixXd& X;   // D_x x N
  Eigen::VectorXd targets;    // +-1 per instance
  Eigen::VectorXd weights;    // per-instance sample weights
  double weight_sum;
  double inv_cost;            // 1 / cost
};

struct FitResult {
  Eigen::VectorXd w;
  double b;
};

double objective(const BinaryProblem& prob, const Eigen::VectorXd& w, double b) {
  Eigen::VectorXd z = prob.X.transpose() * w;
  z.array() += b;
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    loss += prob.weights(i) * stable_log1pexp(prob.targets(i) * z(i));
  }
  return 0.5 * prob.inv_cost * w.squaredNorm() + loss / prob.weight_sum;
}

void gradient(const BinaryProblem& prob, const Eigen::VectorXd& w, double b,
              Eigen::VectorXd& gw, double& gb) {
  Eigen::VectorXd z = prob.X.transpose() * w;
  z.array() += b;
  Eigen::VectorXd coeff(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    // d/dz of log(1+exp(-t z)) = -t sigmoid(-t z)
    coeff(i) = prob.weights(i) * (-prob.targets(i) * sigmoid(-prob.targets(i) * z(i)));
  }
  coeff /= prob.weight_sum;
  gw = prob.inv_cost * w + prob.X * coeff;
  gb = coeff.sum();
}

FitResult fit_logistic(const BinaryProblem& prob, int max_iterations, double tolerance) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(prob.X.rows());
  double b = 0.0;
  double obj = objective(prob, w, b);
  double step = 1.0;

  Eigen::VectorXd gw;
  double gb = 0.0;
  for (int iter = 0; iter < max_iterations; ++iter) {
    gradient(prob, w, b, gw, gb);
    const double grad_norm = std::sqrt(gw.squaredNorm() + gb * gb);
    if (grad_norm <= tolerance) break;

    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving) {
      Eigen::VectorXd w_cand = w - step * gw;
      double b_cand = b - step * gb;
      double obj_cand = objective(prob, w_cand, b_cand);
      if (std::isfinite(obj_cand) && obj_cand <= obj) {
        w = std::move(w_cand);
        b = b_cand;
        obj = obj_cand;
        step = std::min(step * 1.25, 1e6);
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // step underflow: no further progress possible
  }
  return FitResult{std::move(w), b};
}

}  // namespace

KnownAttributeModel::KnownAttributeModel(AttributeVocabulary vocabulary,
                                         Eigen::MatrixXd weights, Eigen::VectorXd biases,
                                         Eigen::VectorXd calibration_scales,
                                         Eigen::VectorXd calibration_offsets, double cost)
    : vocabulary_(std::move(vocabulary)),
      weights_(std::move(weights)),
      biases_(std::move(biases)),
      calibration_scales_(std::move(calibration_scales)),
      calibration_offsets_(std::move(calibration_offsets)),
      cost_(cost) {
  const auto p = static_cast<Eigen::Index>(vocabulary_.size());
  if (weights_.rows() != p || biases_.size() != p || calibration_scales_.size() != p ||
      calibration_offsets_.size() != p) {
    throw Error(ErrorCode::kDimension, "known model parameter counts disagree with vocabulary");
  }
  if (!(cost_ > 0.0)) {
    throw Error(ErrorCode::kConfig, "cost must be positive");
  }
  if (!weights_.allFinite() || !biases_.allFinite() || !calibration_scales_.allFinite() ||
      !calibration_offsets_.allFinite()) {
    throw Error(ErrorCode::kNumeric, "known model contains non-finite parameters");
  }
}

Eigen::VectorXd KnownAttributeModel::decision_values(const Eigen::VectorXd& x) const {
  if (x.size() != weights_.cols()) {
    throw Error(ErrorCode::kDimension,
                "feature dim " + std::to_string(x.size()) + " does not match model dim " +
                    std::to_string(weights_.cols()));
  }
  return weights_ * x + biases_;
}

double KnownAttributeModel::calibrated_probability(std::size_t attribute,
                                                   double raw_score) const {
  const auto p = static_cast<Eigen::Index>(attribute);
  return sigmoid(calibration_scales_(p) * raw_score + calibration_offsets_(p));
}

std::vector<std::string> degenerate_attributes(const AnnotationMatrix& annotations) {
  std::vector<std::string> names;
  const Eigen::MatrixXi& y = annotations.cells();
  for (Eigen::Index p = 0; p < y.rows(); ++p) {
    const int positives = y.row(p).sum();
    if (positives == 0 || positives == y.cols()) {
      names.push_back(annotations.vocabulary().name(static_cast<std::size_t>(p)));
    }
  }
  return names;
}

KnownAttributeModel train_known(const FeatureMatrix& features,
                                const AnnotationMatrix& annotations,
                                const KnownTrainOptions& options) {
  if (features.ids() != annotations.ids()) {
    throw Error(ErrorCode::kVocabulary,
                "features and annotations are not aligned; run validate_aligned first");
  }
  if (!(options.cost > 0.0)) {
    throw Error(ErrorCode::kConfig, "cost must be positive");
  }
  if (!(options.pos_weight > 0.0)) {
    throw Error(ErrorCode::kConfig, "positive-class weight must be positive");
  }
  auto degenerate = degenerate_attributes(annotations);
  if (!degenerate.empty()) {
    std::string listing;
    for (const auto& name : degenerate) {
      if (!listing.empty()) listing += ", ";
      listing += name;
    }
    throw Error(ErrorCode::kDegenerate,
                "attribute(s) with single-class training labels: " + listing);
  }

  const Eigen::MatrixXd& X = features.data();
  const Eigen::MatrixXi& Y = annotations.cells();
  const auto P = static_cast<std::size_t>(Y.rows());
  const auto N = X.cols();

  Eigen::MatrixXd weights(static_cast<Eigen::Index>(P), X.rows());
  Eigen::VectorXd biases(static_cast<Eigen::Index>(P));

  auto train_one = [&](std::size_t p) {
    BinaryProblem prob{X, Eigen::VectorXd(N), Eigen::VectorXd(N), 0.0, 1.0 / options.cost};
    for (Eigen::Index i = 0; i < N; ++i) {
      const bool positive = Y(static_cast<Eigen::Index>(p), i) == 1;
      prob.targets(i) = positive ? 1.0 : -1.0;
      prob.weights(i) = positive ? options.pos_weight : 1.0;
    }
    prob.weight_sum = prob.weights.sum();
    FitResult fit = fit_logistic(prob, options.max_iterations, options.tolerance);
    weights.row(static_cast<Eigen::Index>(p)) = fit.w.transpose();
    biases(static_cast<Eigen::Index>(p)) = fit.b;
  };

  const int workers = std::min<int>(resolve_workers(options.workers), static_cast<int>(P));
  if (workers <= 1) {
    for (std::size_t p = 0; p < P; ++p) train_one(p);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
      pool.emplace_back([&]() {
        while (true) {
          std::size_t p = next.fetch_add(1);
          if (p >= P) break;
          train_one(p);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  return KnownAttributeModel(annotations.vocabulary(), std::move(weights), std::move(biases),
                             Eigen::VectorXd::Ones(static_cast<Eigen::Index>(P)),
                             Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P)),
                             options.cost);
}

ScoreMatrix predict_known(const KnownAttributeModel& model, const FeatureMatrix& features) {
  if (features.dim() != model.feature_dim()) {
    throw Error(ErrorCode::kDimension,
                "feature dim " + std::to_string(features.dim()) +
                    " does not match model dim " + std::to_string(model.feature_dim()));
  }
  Eigen::MatrixXd raw = model.weights() * features.data();
  raw.colwise() += model.biases();
  Eigen::MatrixXd probs(raw.rows(), raw.cols());
  for (Eigen::Index p = 0; p < raw.rows(); ++p) {
    const double scale = model.calibration_scales()(p);
    const double offset = model.calibration_offsets()(p);
    for (Eigen::Index n = 0; n < raw.cols(); ++n) {
      probs(p, n) = sigmoid(scale * raw(p, n) + offset);
    }
  }
  for (Eigen::Index n = 0; n < probs.cols(); ++n) {
    const double sum = probs.col(n).sum();
    if (!(sum > 0.0) || !std::isfinite(sum)) {
      throw Error(ErrorCode::kNumeric, "known-model probabilities do not normalise");
    }
    probs.col(n) /= sum;
  }
  return ScoreMatrix(model.vocabulary(), features.ids(), std::move(probs));
}

void save_known_model(const KnownAttributeModel& model, const std::string& path) {
  nlohmann::json j;
  j["vocabulary"] = model.vocabulary().names();
  j["dim"] = model.feature_dim();
  std::vector<double> weights;
  weights.reserve(model.num_attributes() * model.feature_dim());
  for (Eigen::Index p = 0; p < model.weights().rows(); ++p) {
    for (Eigen::Index d = 0; d < model.weights().cols(); ++d) {
      weights.push_back(model.weights()(p, d));
    }
  }
  j["weights"] = weights;  // row-major P x D_x
  j["biases"] = std::vector<double>(model.biases().data(),
                                    model.biases().data() + model.biases().size());
  j["calibration"] = {
      {"scales", std::vector<double>(model.calibration_scales().data(),
                                     model.calibration_scales().data() +
                                         model.calibration_scales().size())},
      {"offsets", std::vector<double>(model.calibration_offsets().data(),
                                      model.calibration_offsets().data() +
                                          model.calibration_offsets().size())}};
  j["cost"] = model.cost();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

KnownAttributeModel load_known_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open file for reading: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
    AttributeVocabulary vocabulary(j.at("vocabulary").get<std::vector<std::string>>());
    const auto dim = j.at("dim").get<std::size_t>();
    const auto weights_flat = j.at("weights").get<std::vector<double>>();
    const auto biases_vec = j.at("biases").get<std::vector<double>>();
    const auto scales_vec = j.at("calibration").at("scales").get<std::vector<double>>();
    const auto offsets_vec = j.at("calibration").at("offsets").get<std::vector<double>>();
    const double cost = j.at("cost").get<double>();
    const std::size_t P = vocabulary.size();
    if (weights_flat.size() != P * dim || biases_vec.size() != P ||
        scales_vec.size() != P || offsets_vec.size() != P) {
      throw Error(ErrorCode::kParse, path + ": known-model parameter counts disagree");
    }
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(dim));
    for (std::size_t p = 0; p < P; ++p) {
      for (std::size_t d = 0; d < dim; ++d) {
        weights(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(d)) =
            weights_flat[p * dim + d];
      }
    }
    auto to_vec = [](const std::vector<double>& v) {
      return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()))
          .eval();
    };
    return KnownAttributeModel(std::move(vocabulary), std::move(weights), to_vec(biases_vec),
                               to_vec(scales_vec), to_vec(offsets_vec), cost);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid known-model JSON: " + e.what());
  }
}

}  // namespace ctxzsl
