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

#ifndef CTXZSL_BASELINES_HPP_
#define CTXZSL_BASELINES_HPP_

#include <string>

#include "ctxzsl/core.hpp"
#include "ctxzsl/ingest.hpp"

namespace ctxzsl {

// Ridge regressor from feature space onto embedding space: projection of an
// instance is M^T x.  Shared by WVE and ExDAP, which differ only in how the
// projection is decoded.
struct EmbeddingRegressor {
  Eigen::MatrixXd M;  // D_x x D_v
  double lambda = 1e-3;
};

// M = argmin sum_i ||M^T x_i - V_tr y_i||^2 + lambda ||M||_F^2, closed form.
// Inputs must be aligned; annotations supply y_i over the training
// vocabulary, whose embeddings are the columns of train_embeddings.
EmbeddingRegressor exdap_train(const FeatureMatrix& features,
                               const AnnotationMatrix& annotations,
                               const EmbeddedVocabulary& train_embeddings, double lambda);

// Ridge decode of the projection against the novel embeddings:
// y* = (V_te^T V_te + lambda I)^-1 V_te^T (M^T x); lambda = 0 requires an
// invertible Gram matrix.
Eigen::VectorXd exdap_predict(const Eigen::VectorXd& x, const EmbeddingRegressor& model,
                              const EmbeddedVocabulary& test_embeddings, double lambda);

// Exhaustive power-set decode: the binary y* minimising
// ||M^T x - V_te y*||_2 over all 2^Q candidates; ties break by fewer
// positives, then lexicographically (y_0 most significant).  Q <= 20.
Eigen::VectorXi dmp_predict(const Eigen::VectorXd& x, const EmbeddingRegressor& model,
                            const EmbeddedVocabulary& test_embeddings);

// Ranking surrogate for the binary DMP decision: score_q = d(q excluded) -
// d(q included), each distance taken with the other coordinates of y* held
// fixed, so attributes whose inclusion helps most rank highest.
Eigen::VectorXd dmp_rank_scores(const Eigen::VectorXd& x, const EmbeddingRegressor& model,
                                const EmbeddedVocabulary& test_embeddings);

// Identical trainer to exdap_train (deliberately shared definition).
EmbeddingRegressor wve_train(const FeatureMatrix& features,
                             const AnnotationMatrix& annotations,
                             const EmbeddedVocabulary& train_embeddings, double lambda);

// Nearest-neighbour scores: score_q = -||M^T x - v_q||_2^2.
Eigen::VectorXd wve_predict(const Eigen::VectorXd& x, const EmbeddingRegressor& model,
                            const EmbeddedVocabulary& test_embeddings);

struct EszslModel {
  Eigen::MatrixXd M;  // D_x x D_v
  double lambda1 = 1e-3;
  double lambda2 = 1e-3;
  double lambda3 = 1e-6;  // always lambda1 * lambda2
};

// Minimises ||X^T M V - Y^T||^2 + lambda1 ||M V||^2 + lambda2 ||X^T M||^2 +
// lambda1 lambda2 ||M||^2 in closed form
//   M = (X X^T + lambda1 I)^-1 X Y^T V^T (V V^T + lambda2 I)^-1.
EszslModel eszsl_train(const FeatureMatrix& features, const AnnotationMatrix& annotations,
                       const EmbeddedVocabulary& train_embeddings, double lambda1,
                       double lambda2);

// Objective of eszsl_train at an arbitrary M (exposed for verification).
double eszsl_objective(const FeatureMatrix& features, const AnnotationMatrix& annotations,
                       const EmbeddedVocabulary& train_embeddings, double lambda1,
                       double lambda2, const Eigen::MatrixXd& M);

// scores = (x^T M V_te)^T.
Eigen::VectorXd eszsl_predict(const Eigen::VectorXd& x, const EszslModel& model,
                              const EmbeddedVocabulary& test_embeddings);

// JSON containers analogous to the bilinear context model.
void save_regressor(const EmbeddingRegressor& model, const std::string& kind,
                    const std::string& path);
EmbeddingRegressor load_regressor(const std::string& path);
void save_eszsl(const EszslModel& model, const std::string& path);
EszslModel load_eszsl(const std::string& path);

}  // namespace ctxzsl

#endif  // CTXZSL_BASELINES_HPP_
