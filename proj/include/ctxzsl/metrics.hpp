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

#ifndef CTXZSL_METRICS_HPP_
#define CTXZSL_METRICS_HPP_

#include <span>
#include <string>
#include <vector>

#include "ctxzsl/core.hpp"

namespace ctxzsl {

// Fraction of (positive, negative) pairs with score(pos) > score(neg),
// counting ties as 0.5.  Single-class input raises a degenerate error.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Mean over positives of precision at that positive's rank under descending
// score; score ties break by ascending index.  Zero positives raise a
// degenerate error.
double average_precision(std::span<const double> scores, std::span<const int> labels);

// Fraction of cells where the binary matrices disagree.
double hamming_loss(const Eigen::MatrixXi& predictions, const Eigen::MatrixXi& ground_truth);

struct RankingLossResult {
  double loss = 0.0;
  int skipped_instances = 0;  // single-class columns excluded from the mean
};

// Per instance (column): (strict inversions + 0.5 ties) / (|pos| * |neg|),
// averaged over instances with both classes present.
RankingLossResult ranking_loss(const Eigen::MatrixXd& scores, const Eigen::MatrixXi& ground_truth);

struct BinarizePolicy {
  enum class Kind { kUniformThreshold, kFixedThreshold, kTopK };
  Kind kind = Kind::kUniformThreshold;
  double threshold = 0.0;  // kFixedThreshold only
  int k = 0;               // kTopK only

  static BinarizePolicy uniform_threshold();
  static BinarizePolicy fixed_threshold(double t);
  static BinarizePolicy top_k(int k);
  // Accepts "uniform", "fixed:<t>", "top-k:<k>".
  static BinarizePolicy parse(const std::string& text);
  std::string describe() const;
};

// Per-column binarization: uniform threshold is score > 1/Q; top-k marks the
// k largest entries per instance (ties by ascending attribute index).
Eigen::MatrixXi binarize(const ScoreMatrix& scores, const BinarizePolicy& policy);

struct MetricsReport {
  double auc = 0.0;         // label-based, mean over defined labels
  double label_ap = 0.0;    // label-based average precision
  double example_ap = 0.0;  // example-based average precision
  double hamming = 0.0;
  double ranking = 0.0;
  struct Skipped {
    int auc_labels = 0;
    int ap_labels = 0;
    int ap_instances = 0;
    int ranking_instances = 0;
  } skipped;
  std::vector<double> per_label_auc;  // NaN where skipped
  std::vector<double> per_label_ap;   // NaN where skipped
};

// Full five-metric evaluation of scores against aligned binary ground truth
// (same vocabulary order, same instance order).  Label-based metrics average
// over labels with both classes present; example-based AP skips zero-positive
// instances; Hamming uses the binarization policy unless an explicit binary
// prediction matrix is supplied.
MetricsReport evaluate(const ScoreMatrix& scores, const AnnotationMatrix& ground_truth,
                       const BinarizePolicy& policy = BinarizePolicy::uniform_threshold(),
                       const Eigen::MatrixXi* binary_override = nullptr);

struct AggregateReport {
  MetricsReport mean;
  MetricsReport stddev;  // population standard deviation per field
  std::vector<MetricsReport> per_split;
};

AggregateReport aggregate(const std::vector<MetricsReport>& reports);

// JSON serialisation ({auc, label_ap, example_ap, hamming, ranking, skipped}).
void save_metrics(const MetricsReport& report, const std::string& path);
MetricsReport load_metrics(const std::string& path);

}  // namespace ctxzsl

#endif  // CTXZSL_METRICS_HPP_
