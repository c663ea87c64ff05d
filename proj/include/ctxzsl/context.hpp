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

#ifndef CTXZSL_CONTEXT_HPP_
#define CTXZSL_CONTEXT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ctxzsl/core.hpp"
#include "ctxzsl/ingest.hpp"

namespace ctxzsl {

// Pairwise label co-occurrence counts C = Y Y^T with prevalence row sums.
struct CooccurrenceMatrix {
  AttributeVocabulary vocabulary;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;  // P x P
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> prevalence;           // c_i = sum_j c_ij
};

CooccurrenceMatrix cooccurrence(const AnnotationMatrix& annotations);

// Row-normalised counts: entry (i, j) = c_ij / c_i.  Zero prevalence raises
// an error naming the attribute.
ConditionalMatrix conditional_from_counts(const CooccurrenceMatrix& counts);

// GloVe-style co-occurrence weighting: w(c) = (c/c_max)^alpha for
// 0 < c <= c_max, 1 above the cap, 0 at c = 0.
struct WeightConfig {
  double c_max = 1.0;
  double alpha = 0.75;
};

// Default constants: alpha 0.75, c_max = max(1, max off-diagonal count / 2).
WeightConfig default_weight_config(const CooccurrenceMatrix& counts);

double cooc_weight(double c, const WeightConfig& cfg);

// Softmax temperature for the text conditional.
struct TemperatureParam {
  double gamma = 0.1;
};

// Row q = softmax over known attributes p of (v_q . v_p) / gamma.
ConditionalMatrix text_conditional(const EmbeddedVocabulary& novel,
                                   const EmbeddedVocabulary& known, TemperatureParam temp);

struct BilinearOptimOptions {
  double step = 0.0;  // 0 = automatic (inverse curvature bound)
  int max_iterations = 20000;
  double tolerance = 1e-8;  // gradient Frobenius-norm stopping threshold
  int max_halvings = 60;    // per-iteration step halvings before giving up
};

// Learned bilinear co-occurrence predictor v_i^T M v_j ~ log c_ij.
struct BilinearContextModel {
  Eigen::MatrixXd M;  // D_v x D_v
  double lambda = 1e-3;
  WeightConfig weight_cfg;
  double final_objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;  // accepted objective values (not serialised)
};

// Minimises sum_{c_ij > 0} w(c_ij) (v_i^T M v_j - log c_ij)^2 + lambda ||M||_F^2
// by gradient descent from M = 0 (fixed step, halved while the objective
// would increase).  Diagonal pairs are included; zero-count pairs are
// excluded.  Raises a step-size error if the objective cannot be kept below
// ten times its initial value.
BilinearContextModel fit_bilinear(const EmbeddedVocabulary& known,
                                  const CooccurrenceMatrix& counts, double lambda,
                                  const WeightConfig& cfg,
                                  const BilinearOptimOptions& optim = {});

// Row q = softmax over known attributes p of v_q^T M v_p (no temperature;
// M = identity reproduces text_conditional at gamma = 1 exactly).
ConditionalMatrix cooc_conditional(const EmbeddedVocabulary& novel,
                                   const EmbeddedVocabulary& known,
                                   const BilinearContextModel& model);

// Objective value at a given M (exposed for verification against
// independently minimised references).
double bilinear_objective(const EmbeddedVocabulary& known, const CooccurrenceMatrix& counts,
                          double lambda, const WeightConfig& cfg, const Eigen::MatrixXd& M);

// Analytic gradient of the objective at M.
Eigen::MatrixXd bilinear_gradient(const EmbeddedVocabulary& known,
                                  const CooccurrenceMatrix& counts, double lambda,
                                  const WeightConfig& cfg, const Eigen::MatrixXd& M);

// JSON container: {dim, lambda, alpha, c_max, M (row-major), final_objective,
// iterations}.
void save_bilinear(const BilinearContextModel& model, const std::string& path);
BilinearContextModel load_bilinear(const std::string& path);

}  // namespace ctxzsl

#endif  // CTXZSL_CONTEXT_HPP_
