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

#include "ctxzsl/baselines.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

namespace ctxzsl {

namespace {

constexpr int kMaxPowerSetLabels = 20;

void check_alignment(const FeatureMatrix& features, const AnnotationMatrix& annotations,
                     const EmbeddedVocabulary& embeddings) {
  if (features.ids() != annotations.ids()) {
    throw Error(ErrorCode::kVocabulary,
                "features and annotations are not aligned; run validate_aligned first");
  }
  if (annotations.vocabulary().names() != embeddings.vocabulary.names()) {
    throw Error(ErrorCode::kVocabulary,
                "annotation vocabulary does not match the embedding vocabulary");
  }
  if (static_cast<std::size_t>(embeddings.vectors.cols()) != embeddings.vocabulary.size()) {
    throw Error(ErrorCode::kDimension, "embedding count disagrees with its vocabulary");
  }
}

Eigen::VectorXd project(const Eigen::VectorXd& x, const EmbeddingRegressor& model) {
  if (x.size() != model.M.rows()) {
    throw Error(ErrorCode::kDimension,
                "feature dim " + std::to_string(x.size()) + " does not match regressor dim " +
                    std::to_string(model.M.rows()));
  }
  return model.M.transpose() * x;
}

void check_test_embeddings(const Eigen::VectorXd& projection,
                           const EmbeddedVocabulary& test_embeddings) {
  if (projection.size() != test_embeddings.vectors.rows()) {
    throw Error(ErrorCode::kDimension,
                "projection dim " + std::to_string(projection.size()) +
                    " does not match embedding dim " +
                    std::to_string(test_embeddings.vectors.rows()));
  }
}

}  // namespace

EmbeddingRegressor exdap_train(const FeatureMatrix& features,
                               const AnnotationMatrix& annotations,
                               const EmbeddedVocabulary& train_embeddings, double lambda) {
  check_alignment(features, annotations, train_embeddings);
  if (!(lambda > 0.0)) {
    throw Error(ErrorCode::kConfig, "lambda must be positive");
  }
  if (features.dim() == 0 || features.count() == 0) {
    throw Error(ErrorCode::kDegenerate, "empty training data");
  }
  const Eigen::MatrixXd& X = features.data();                       // D_x x N
  const Eigen::MatrixXd Y = annotations.cells().cast<double>();     // P x N
  const Eigen::MatrixXd& V = train_embeddings.vectors;              // D_v x P
  const Eigen::MatrixXd Z = V * Y;                                  // D_v x N targets

  // Normal equations: (X X^T + lambda I) M = X Z^T.
  Eigen::MatrixXd gram = X * X.transpose();
  gram.diagonal().array() += lambda;
  Eigen::MatrixXd M = gram.ldlt().solve(X * Z.transpose());
  if (!M.allFinite()) {
    throw Error(ErrorCode::kNumeric, "embedding regression produced non-finite weights");
  }
  return EmbeddingRegressor{std::move(M), lambda};
}

Eigen::VectorXd exdap_predict(const Eigen::VectorXd& x, const EmbeddingRegressor& model,
                              const EmbeddedVocabulary& test_embeddings, double lambda) {
  if (lambda < 0.0) {
    throw Error(ErrorCode::kConfig, "lambda must be non-negative");
  }
  const Eigen::VectorXd projection = project(x, model);
  check_test_embeddings(projection, test_embeddings);
  const Eigen::MatrixXd& V = test_embeddings.vectors;  // D_v x Q
  Eigen::MatrixXd gram = V.transpose() * V;            // Q x Q
  gram.diagonal().array() += lambda;
  if (lambda == 0.0) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
      throw Error(ErrorCode::kNumeric,
                  "singular decode system at lambda = 0; use a positive lambda");
    }
    return lu.solve(V.transpose() * projection);
  }
  return gram.ldlt().solve(V.transpose() * projection);
}

Eigen::VectorXi dmp_predict(const Eigen::VectorXd& x, const EmbeddingRegressor& model,
                            const EmbeddedVocabulary& test_embeddings) {
  const Eigen::VectorXd projection = project(x, model);
  check_test_embeddings(projection, test_embeddings);
  const Eigen::MatrixXd& V = test_embeddings.vectors;  // D_v x Q
  const int Q = static_cast<int>(V.cols());
  if (Q > kMaxPowerSetLabels) {
    throw Error(ErrorCode::kUnsupported,
                "power set over " + std::to_string(Q) + " labels exceeds the limit of " +
                    std::to_string(kMaxPowerSetLabels));
  }

  // Candidates are enumerated by index; the representation V y is summed in
  // ascending bit order so distances are reproducible bit-for-bit by any
  // oracle using the same summation order.
  const std::uint32_t total = 1u << Q;
  double best_distance = projection.squaredNorm();  // candidate 0
  std::uint32_t best_mask = 0;
  int best_popcount = 0;
  Eigen::VectorXd representation(V.rows());
  for (std::uint32_t mask = 1; mask < total; ++mask) {
    representation.setZero();
    for (int q = 0; q < Q; ++q) {
      if (mask & (1u << q)) representation += V.col(q);
    }
    const double distance = (projection - representation).squaredNorm();
    const int popcount = static_cast<int>(__builtin_popcount(mask));
    bool better = false;
    if (distance < best_distance) {
      better = true;
    } else if (distance == best_distance) {
      if (popcount < best_popcount) {
        better = true;
      } else if (popcount == best_popcount) {
        // Lexicographic on (y_0, y_1, ...): compare from the lowest bit; the
        // first differing coordinate decides, 0 preferred.
        for (int q = 0; q < Q; ++q) {
          const bool a = (mask >> q) & 1u;
          const bool b = (best_mask >> q) & 1u;
          if (a != b) {
            better = !a;
            break;
          }
        }
      }
    }
    if (better) {
      best_distance = distance;
      best_mask = mask;
      best_popcount = popcount;
    }
  }

  Eigen::VectorXi y(Q);
  for (int q = 0; q < Q; ++q) y(q) = (best_mask >> q) & 1u ? 1 : 0;
  return y;
}

Eigen::VectorXd dmp_rank_scores(const Eigen::VectorXd& x, const EmbeddingRegressor& model,
                                const EmbeddedVocabulary& test_embeddings) {
  const Eigen::VectorXi y = dmp_predict(x, model, test_embeddings);
  const Eigen::VectorXd projection = project(x, model);
  const Eigen::MatrixXd& V = test_embeddings.vectors;
  Eigen::VectorXd base = Eigen::VectorXd::Zero(V.rows());
  for (Eigen::Index q = 0; q < y.size(); ++q) {
    if (y(q) == 1) base += V.col(q);
  }
  Eigen::VectorXd scores(y.size());
  for (Eigen::Index q = 0; q < y.size(); ++q) {
    const Eigen::VectorXd without = y(q) == 1 ? (base - V.col(q)).eval() : base;
    const Eigen::VectorXd with = y(q) == 1 ? base : (base + V.col(q)).eval();
    scores(q) = (projection - without).squaredNorm() - (projection - with).squaredNorm();
  }
  return scores;
}

EmbeddingRegressor wve_train(const FeatureMatrix& features,
                             const AnnotationMatrix& annotations,
                             const EmbeddedVocabulary& train_embeddings, double lambda) {
  return exdap_train(features, annotations, train_embeddings, lambda);
}

Eigen::VectorXd wve_predict(const Eigen::VectorXd& x, const EmbeddingRegressor& model,
                            const EmbeddedVocabulary& test_embeddings) {
  const Eigen::VectorXd projection = project(x, model);
  check_test_embeddings(projection, test_embeddings);
  const Eigen::MatrixXd& V = test_embeddings.vectors;
  Eigen::VectorXd scores(V.cols());
  for (Eigen::Index q = 0; q < V.cols(); ++q) {
    scores(q) = -(projection - V.col(q)).squaredNorm();
  }
  return scores;
}

EszslModel eszsl_train(const FeatureMatrix& features, const AnnotationMatrix& annotations,
                       const EmbeddedVocabulary& train_embeddings, double lambda1,
                       double lambda2) {
  check_alignment(features, annotations, train_embeddings);
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw Error(ErrorCode::kConfig, "lambda1 and lambda2 must be positive");
  }
  const Eigen::MatrixXd& X = features.data();                    // D_x x N
  const Eigen::MatrixXd Yt = annotations.cells().cast<double>().transpose();  // N x P
  const Eigen::MatrixXd& V = train_embeddings.vectors;           // D_v x P

  // M = (X X^T + l1 I)^-1  X Y^T V^T  (V V^T + l2 I)^-1; the second inverse
  // is applied through a transposed solve (both factors are symmetric).
  Eigen::MatrixXd left = X * X.transpose();
  left.diagonal().array() += lambda1;
  Eigen::MatrixXd right = V * V.transpose();
  right.diagonal().array() += lambda2;
  Eigen::MatrixXd A = left.ldlt().solve(X * Yt * V.transpose());
  Eigen::MatrixXd M = right.ldlt().solve(A.transpose()).transpose();
  if (!M.allFinite()) {
    throw Error(ErrorCode::kNumeric, "eszsl training produced non-finite weights");
  }
  return EszslModel{std::move(M), lambda1, lambda2, lambda1 * lambda2};
}

double eszsl_objective(const FeatureMatrix& features, const AnnotationMatrix& annotations,
                       const EmbeddedVocabulary& train_embeddings, double lambda1,
                       double lambda2, const Eigen::MatrixXd& M) {
  const Eigen::MatrixXd& X = features.data();
  const Eigen::MatrixXd Yt = annotations.cells().cast<double>().transpose();
  const Eigen::MatrixXd& V = train_embeddings.vectors;
  const Eigen::MatrixXd residual = X.transpose() * M * V - Yt;
  return residual.squaredNorm() + lambda1 * (M * V).squaredNorm() +
         lambda2 * (X.transpose() * M).squaredNorm() + lambda1 * lambda2 * M.squaredNorm();
}

Eigen::VectorXd eszsl_predict(const Eigen::VectorXd& x, const EszslModel& model,
                              const EmbeddedVocabulary& test_embeddings) {
  if (x.size() != model.M.rows()) {
    throw Error(ErrorCode::kDimension,
                "feature dim " + std::to_string(x.size()) + " does not match model dim " +
                    std::to_string(model.M.rows()));
  }
  if (model.M.cols() != test_embeddings.vectors.rows()) {
    throw Error(ErrorCode::kDimension, "model and embedding dimensionalities disagree");
  }
  return test_embeddings.vectors.transpose() * (model.M.transpose() * x);
}

namespace {

std::vector<double> flatten_row_major(const Eigen::MatrixXd& M) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(M.size()));
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) flat.push_back(M(r, c));
  }
  return flat;
}

Eigen::MatrixXd unflatten_row_major(const std::vector<double>& flat, Eigen::Index rows,
                                    Eigen::Index cols, const std::string& path) {
  if (static_cast<Eigen::Index>(flat.size()) != rows * cols) {
    throw Error(ErrorCode::kParse, path + ": matrix size disagrees with declared dims");
  }
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      M(r, c) = flat[static_cast<std::size_t>(r * cols + c)];
    }
  }
  return M;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open file for reading: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid JSON: " + e.what());
  }
  return j;
}

}  // namespace

void save_regressor(const EmbeddingRegressor& model, const std::string& kind,
                    const std::string& path) {
  nlohmann::json j;
  j["type"] = kind;
  j["dim_x"] = model.M.rows();
  j["dim_v"] = model.M.cols();
  j["lambda"] = model.lambda;
  j["M"] = flatten_row_major(model.M);
  write_json(j, path);
}

EmbeddingRegressor load_regressor(const std::string& path) {
  nlohmann::json j = read_json(path);
  try {
    const auto rows = j.at("dim_x").get<Eigen::Index>();
    const auto cols = j.at("dim_v").get<Eigen::Index>();
    EmbeddingRegressor model;
    model.M = unflatten_row_major(j.at("M").get<std::vector<double>>(), rows, cols, path);
    model.lambda = j.at("lambda").get<double>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid regressor JSON: " + e.what());
  }
}

void save_eszsl(const EszslModel& model, const std::string& path) {
  nlohmann::json j;
  j["type"] = "eszsl";
  j["dim_x"] = model.M.rows();
  j["dim_v"] = model.M.cols();
  j["lambda1"] = model.lambda1;
  j["lambda2"] = model.lambda2;
  j["lambda3"] = model.lambda3;
  j["M"] = flatten_row_major(model.M);
  write_json(j, path);
}

EszslModel load_eszsl(const std::string& path) {
  nlohmann::json j = read_json(path);
  try {
    const auto rows = j.at("dim_x").get<Eigen::Index>();
    const auto cols = j.at("dim_v").get<Eigen::Index>();
    EszslModel model;
    model.M = unflatten_row_major(j.at("M").get<std::vector<double>>(), rows, cols, path);
    model.lambda1 = j.at("lambda1").get<double>();
    model.lambda2 = j.at("lambda2").get<double>();
    model.lambda3 = j.at("lambda3").get<double>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid eszsl JSON: " + e.what());
  }
}

}  // namespace ctxzsl
