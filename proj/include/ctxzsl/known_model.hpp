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

#ifndef CTXZSL_KNOWN_MODEL_HPP_
#define CTXZSL_KNOWN_MODEL_HPP_

#include <string>

#include "ctxzsl/core.hpp"

namespace ctxzsl {

// One-vs-rest L2-regularised logistic regression over the known vocabulary.
// The cost parameter is the inverse regularisation strength of the
// per-instance-averaged loss:
//   J(w, b) = ||w||^2 / (2 cost) + mean_i s_i log(1 + exp(-t_i (w.x_i + b)))
// minimised per attribute by full-batch gradient descent (deterministic).
// Calibration stores per-attribute sigmoid scale/offset pairs applied to the
// raw decision score before normalisation; training leaves them at the
// identity (1, 0).
class KnownAttributeModel {
 public:
  KnownAttributeModel(AttributeVocabulary vocabulary, Eigen::MatrixXd weights,
                      Eigen::VectorXd biases, Eigen::VectorXd calibration_scales,
                      Eigen::VectorXd calibration_offsets, double cost);

  const AttributeVocabulary& vocabulary() const { return vocabulary_; }
  std::size_t num_attributes() const { return vocabulary_.size(); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(weights_.cols()); }
  const Eigen::MatrixXd& weights() const { return weights_; }  // P x D_x, row per attribute
  const Eigen::VectorXd& biases() const { return biases_; }
  const Eigen::VectorXd& calibration_scales() const { return calibration_scales_; }
  const Eigen::VectorXd& calibration_offsets() const { return calibration_offsets_; }
  double cost() const { return cost_; }

  // Raw decision scores w_p . x + b_p for one instance.
  Eigen::VectorXd decision_values(const Eigen::VectorXd& x) const;
  // Calibrated sigmoid of a raw score; strictly increasing in the raw score.
  double calibrated_probability(std::size_t attribute, double raw_score) const;

 private:
  AttributeVocabulary vocabulary_;
  Eigen::MatrixXd weights_;
  Eigen::VectorXd biases_;
  Eigen::VectorXd calibration_scales_;
  Eigen::VectorXd calibration_offsets_;
  double cost_;
};

struct KnownTrainOptions {
  double cost = 1.0;        // inverse regularisation strength; paper default 1
  double pos_weight = 1.0;  // optional positive-class weight (1 = no reweighting)
  int max_iterations = 5000;
  double tolerance = 1e-6;  // gradient-norm stopping threshold
  int workers = 0;          // 0 = CTXZSL_WORKERS env var, else 1
};

// Trains one classifier per attribute of the annotation vocabulary.
// Inputs must be aligned (identical instance id order).  An attribute with
// zero positive or zero negative instances raises a degenerate-attribute
// error naming it; callers may drop such attributes first.
KnownAttributeModel train_known(const FeatureMatrix& features,
                                const AnnotationMatrix& annotations,
                                const KnownTrainOptions& options = {});

// Per instance: calibrated per-attribute probabilities normalised to sum to
// one (multinomial); every entry lies strictly inside (0, 1).
ScoreMatrix predict_known(const KnownAttributeModel& model, const FeatureMatrix& features);

// JSON container: {vocabulary, dim, weights, biases, calibration, cost}.
void save_known_model(const KnownAttributeModel& model, const std::string& path);
KnownAttributeModel load_known_model(const std::string& path);

// Names of attributes that would trigger the degenerate-attribute error
// (zero positives or zero negatives), in vocabulary order.
std::vector<std::string> degenerate_attributes(const AnnotationMatrix& annotations);

}  // namespace ctxzsl

#endif  // CTXZSL_KNOWN_MODEL_HPP_
