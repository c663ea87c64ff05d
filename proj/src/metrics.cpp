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

#include "ctxzsl/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

namespace ctxzsl {

namespace {

void check_binary_labels(std::span<const int> labels) {
  for (int v : labels) {
    if (v != 0 && v != 1) {
      throw Error(ErrorCode::kConfig, "labels must be 0 or 1");
    }
  }
}

}  // namespace

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kDimension, "score and label counts disagree");
  }
  if (scores.empty()) {
    throw Error(ErrorCode::kDegenerate, "empty input to roc_auc");
  }
  check_binary_labels(labels);
  const std::size_t positives =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::kDegenerate, "roc_auc undefined for single-class labels");
  }

  // Rank-sum formulation with average ranks over tie groups; equivalent to
  // pair counting with 0.5 credit per tie.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double average_rank = 0.5 * static_cast<double>(i + 1 + j + 1);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) positive_rank_sum += average_rank;
    }
    i = j + 1;
  }
  const double u_statistic =
      positive_rank_sum -
      static_cast<double>(positives) * (static_cast<double>(positives) + 1.0) / 2.0;
  return u_statistic / (static_cast<double>(positives) * static_cast<double>(negatives));
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorCode::kDimension, "score and label counts disagree");
  }
  if (scores.empty()) {
    throw Error(ErrorCode::kDegenerate, "empty input to average_precision");
  }
  check_binary_labels(labels);
  const std::size_t positives =
      static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (positives == 0) {
    throw Error(ErrorCode::kDegenerate, "average_precision undefined with zero positives");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;  // deterministic tie-break by ascending index
  });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(positives);
}

double hamming_loss(const Eigen::MatrixXi& predictions, const Eigen::MatrixXi& ground_truth) {
  if (predictions.rows() != ground_truth.rows() || predictions.cols() != ground_truth.cols()) {
    throw Error(ErrorCode::kDimension, "prediction and ground-truth shapes disagree");
  }
  if (predictions.size() == 0) {
    throw Error(ErrorCode::kDegenerate, "empty input to hamming_loss");
  }
  std::size_t wrong = 0;
  for (Eigen::Index r = 0; r < predictions.rows(); ++r) {
    for (Eigen::Index c = 0; c < predictions.cols(); ++c) {
      const int p = predictions(r, c);
      const int g = ground_truth(r, c);
      if ((p != 0 && p != 1) || (g != 0 && g != 1)) {
        throw Error(ErrorCode::kConfig, "hamming_loss inputs must be binary");
      }
      if (p != g) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

RankingLossResult ranking_loss(const Eigen::MatrixXd& scores,
                               const Eigen::MatrixXi& ground_truth) {
  if (scores.rows() != ground_truth.rows() || scores.cols() != ground_truth.cols()) {
    throw Error(ErrorCode::kDimension, "score and ground-truth shapes disagree");
  }
  RankingLossResult result;
  double total = 0.0;
  int counted = 0;
  const Eigen::Index Q = scores.rows();
  std::vector<std::size_t> order(static_cast<std::size_t>(Q));
  for (Eigen::Index n = 0; n < scores.cols(); ++n) {
    Eigen::Index positives = 0;
    for (Eigen::Index q = 0; q < Q; ++q) {
      const int g = ground_truth(q, n);
      if (g != 0 && g != 1) {
        throw Error(ErrorCode::kConfig, "ranking_loss ground truth must be binary");
      }
      positives += g;
    }
    const Eigen::Index negatives = Q - positives;
    if (positives == 0 || negatives == 0) {
      ++result.skipped_instances;
      continue;
    }

    // Sort by ascending score; walk tie groups once, accumulating for each
    // positive the negatives strictly above it plus half the ties.
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores(static_cast<Eigen::Index>(a), n) < scores(static_cast<Eigen::Index>(b), n);
    });
    double bad = 0.0;
    std::size_t negatives_below = 0;
    std::size_t i = 0;
    const auto total_negatives = static_cast<std::size_t>(negatives);
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() &&
             scores(static_cast<Eigen::Index>(order[j + 1]), n) ==
                 scores(static_cast<Eigen::Index>(order[i]), n)) {
        ++j;
      }
      std::size_t group_negatives = 0, group_positives = 0;
      for (std::size_t k = i; k <= j; ++k) {
        if (ground_truth(static_cast<Eigen::Index>(order[k]), n) == 1) {
          ++group_positives;
        } else {
          ++group_negatives;
        }
      }
      // A positive in this group sees all negatives above the group as
      // inversions and the group's negatives as ties.
      const std::size_t negatives_above = total_negatives - negatives_below - group_negatives;
      bad += static_cast<double>(group_positives) *
             (static_cast<double>(negatives_above) + 0.5 * static_cast<double>(group_negatives));
      negatives_below += group_negatives;
      i = j + 1;
    }
    total += bad / (static_cast<double>(positives) * static_cast<double>(negatives));
    ++counted;
  }
  if (counted == 0) {
    throw Error(ErrorCode::kDegenerate,
                "ranking_loss undefined: every instance has single-class labels");
  }
  result.loss = total / static_cast<double>(counted);
  return result;
}

BinarizePolicy BinarizePolicy::uniform_threshold() { return BinarizePolicy{}; }

BinarizePolicy BinarizePolicy::fixed_threshold(double t) {
  BinarizePolicy policy;
  policy.kind = Kind::kFixedThreshold;
  policy.threshold = t;
  return policy;
}

BinarizePolicy BinarizePolicy::top_k(int k) {
  if (k < 1) {
    throw Error(ErrorCode::kConfig, "top-k policy requires k >= 1");
  }
  BinarizePolicy policy;
  policy.kind = Kind::kTopK;
  policy.k = k;
  return policy;
}

BinarizePolicy BinarizePolicy::parse(const std::string& text) {
  if (text == "uniform") return uniform_threshold();
  auto parse_suffix = [&](std::string_view prefix, double& out) {
    if (text.size() <= prefix.size() || text.compare(0, prefix.size(), prefix) != 0) {
      return false;
    }
    const char* first = text.data() + prefix.size();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
  };
  double value = 0.0;
  if (parse_suffix("fixed:", value)) return fixed_threshold(value);
  if (parse_suffix("top-k:", value)) {
    if (value < 1.0 || value != std::floor(value)) {
      throw Error(ErrorCode::kConfig, "top-k policy requires a positive integer k");
    }
    return top_k(static_cast<int>(value));
  }
  throw Error(ErrorCode::kConfig,
              "unknown binarize policy '" + text + "' (expected uniform, fixed:<t>, top-k:<k>)");
}

std::string BinarizePolicy::describe() const {
  switch (kind) {
    case Kind::kUniformThreshold: return "uniform";
    case Kind::kFixedThreshold: {
      nlohmann::json j = threshold;
      return "fixed:" + j.dump();
    }
    case Kind::kTopK: return "top-k:" + std::to_string(k);
  }
  return "uniform";
}

Eigen::MatrixXi binarize(const ScoreMatrix& scores, const BinarizePolicy& policy) {
  const Eigen::MatrixXd& s = scores.scores();
  Eigen::MatrixXi binary = Eigen::MatrixXi::Zero(s.rows(), s.cols());
  switch (policy.kind) {
    case BinarizePolicy::Kind::kUniformThreshold: {
      if (s.rows() == 0) {
        throw Error(ErrorCode::kDegenerate, "cannot binarize an empty score matrix");
      }
      const double threshold = 1.0 / static_cast<double>(s.rows());
      binary = (s.array() > threshold).cast<int>();
      break;
    }
    case BinarizePolicy::Kind::kFixedThreshold: {
      binary = (s.array() > policy.threshold).cast<int>();
      break;
    }
    case BinarizePolicy::Kind::kTopK: {
      if (policy.k < 1 || policy.k > s.rows()) {
        throw Error(ErrorCode::kConfig,
                    "top-k parameter " + std::to_string(policy.k) +
                        " outside [1, " + std::to_string(s.rows()) + "]");
      }
      std::vector<std::size_t> order(static_cast<std::size_t>(s.rows()));
      for (Eigen::Index n = 0; n < s.cols(); ++n) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          const double sa = s(static_cast<Eigen::Index>(a), n);
          const double sb = s(static_cast<Eigen::Index>(b), n);
          if (sa != sb) return sa > sb;
          return a < b;
        });
        for (int k = 0; k < policy.k; ++k) {
          binary(static_cast<Eigen::Index>(order[static_cast<std::size_t>(k)]), n) = 1;
        }
      }
      break;
    }
  }
  return binary;
}

MetricsReport evaluate(const ScoreMatrix& scores, const AnnotationMatrix& ground_truth,
                       const BinarizePolicy& policy, const Eigen::MatrixXi* binary_override) {
  if (scores.vocabulary().names() != ground_truth.vocabulary().names()) {
    throw Error(ErrorCode::kVocabulary,
                "score vocabulary does not match the ground-truth vocabulary");
  }
  if (scores.ids() != ground_truth.ids()) {
    throw Error(ErrorCode::kVocabulary, "score and ground-truth instance ids disagree");
  }
  const Eigen::MatrixXd& s = scores.scores();
  const Eigen::MatrixXi& g = ground_truth.cells();
  const Eigen::Index Q = s.rows();
  const Eigen::Index N = s.cols();
  if (N == 0 || Q == 0) {
    throw Error(ErrorCode::kDegenerate, "empty evaluation inputs");
  }

  MetricsReport report;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  report.per_label_auc.assign(static_cast<std::size_t>(Q), nan);
  report.per_label_ap.assign(static_cast<std::size_t>(Q), nan);

  // Label-based metrics: one series per attribute across instances.
  double auc_sum = 0.0, label_ap_sum = 0.0;
  int auc_count = 0, label_ap_count = 0;
  std::vector<double> series(static_cast<std::size_t>(N));
  std::vector<int> labels(static_cast<std::size_t>(N));
  for (Eigen::Index q = 0; q < Q; ++q) {
    int positives = 0;
    for (Eigen::Index n = 0; n < N; ++n) {
      series[static_cast<std::size_t>(n)] = s(q, n);
      labels[static_cast<std::size_t>(n)] = g(q, n);
      positives += g(q, n);
    }
    if (positives == 0 || positives == N) {
      ++report.skipped.auc_labels;
      ++report.skipped.ap_labels;
      continue;
    }
    const double auc = roc_auc(series, labels);
    const double ap = average_precision(series, labels);
    report.per_label_auc[static_cast<std::size_t>(q)] = auc;
    report.per_label_ap[static_cast<std::size_t>(q)] = ap;
    auc_sum += auc;
    label_ap_sum += ap;
    ++auc_count;
    ++label_ap_count;
  }
  if (auc_count == 0) {
    throw Error(ErrorCode::kDegenerate,
                "no attribute has both classes present in the evaluation set");
  }
  report.auc = auc_sum / auc_count;
  report.label_ap = label_ap_sum / label_ap_count;

  // Example-based AP: one series per instance across attributes.
  double example_ap_sum = 0.0;
  int example_ap_count = 0;
  std::vector<double> column(static_cast<std::size_t>(Q));
  std::vector<int> column_labels(static_cast<std::size_t>(Q));
  for (Eigen::Index n = 0; n < N; ++n) {
    int positives = 0;
    for (Eigen::Index q = 0; q < Q; ++q) {
      column[static_cast<std::size_t>(q)] = s(q, n);
      column_labels[static_cast<std::size_t>(q)] = g(q, n);
      positives += g(q, n);
    }
    if (positives == 0) {
      ++report.skipped.ap_instances;
      continue;
    }
    example_ap_sum += average_precision(column, column_labels);
    ++example_ap_count;
  }
  if (example_ap_count == 0) {
    throw Error(ErrorCode::kDegenerate, "no instance has a positive label");
  }
  report.example_ap = example_ap_sum / example_ap_count;

  RankingLossResult ranking = ranking_loss(s, g);
  report.ranking = ranking.loss;
  report.skipped.ranking_instances = ranking.skipped_instances;

  Eigen::MatrixXi binary = binary_override != nullptr ? *binary_override : binarize(scores, policy);
  report.hamming = hamming_loss(binary, g);
  return report;
}

namespace {

// Field-wise access used by aggregate().
const std::vector<double (*)(const MetricsReport&)> kFieldGetters = {
    [](const MetricsReport& r) { return r.auc; },
    [](const MetricsReport& r) { return r.label_ap; },
    [](const MetricsReport& r) { return r.example_ap; },
    [](const MetricsReport& r) { return r.hamming; },
    [](const MetricsReport& r) { return r.ranking; },
};

void set_field(MetricsReport& r, std::size_t index, double value) {
  switch (index) {
    case 0: r.auc = value; break;
    case 1: r.label_ap = value; break;
    case 2: r.example_ap = value; break;
    case 3: r.hamming = value; break;
    case 4: r.ranking = value; break;
    default: throw Error(ErrorCode::kInternal, "bad metric field index");
  }
}

}  // namespace

AggregateReport aggregate(const std::vector<MetricsReport>& reports) {
  if (reports.empty()) {
    throw Error(ErrorCode::kDegenerate, "cannot aggregate an empty report list");
  }
  AggregateReport out;
  out.per_split = reports;
  const double count = static_cast<double>(reports.size());
  for (std::size_t f = 0; f < kFieldGetters.size(); ++f) {
    double mean = 0.0;
    for (const auto& r : reports) mean += kFieldGetters[f](r);
    mean /= count;
    double variance = 0.0;
    for (const auto& r : reports) {
      const double d = kFieldGetters[f](r) - mean;
      variance += d * d;
    }
    variance /= count;  // population standard deviation
    set_field(out.mean, f, mean);
    set_field(out.stddev, f, std::sqrt(variance));
  }
  return out;
}

void save_metrics(const MetricsReport& report, const std::string& path) {
  nlohmann::json j;
  j["auc"] = report.auc;
  j["label_ap"] = report.label_ap;
  j["example_ap"] = report.example_ap;
  j["hamming"] = report.hamming;
  j["ranking"] = report.ranking;
  j["skipped"] = {{"auc_labels", report.skipped.auc_labels},
                  {"ap_labels", report.skipped.ap_labels},
                  {"ap_instances", report.skipped.ap_instances},
                  {"ranking_instances", report.skipped.ranking_instances}};
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

MetricsReport load_metrics(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open file for reading: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
    MetricsReport report;
    report.auc = j.at("auc").get<double>();
    report.label_ap = j.at("label_ap").get<double>();
    report.example_ap = j.at("example_ap").get<double>();
    report.hamming = j.at("hamming").get<double>();
    report.ranking = j.at("ranking").get<double>();
    const auto& skipped = j.at("skipped");
    report.skipped.auc_labels = skipped.at("auc_labels").get<int>();
    report.skipped.ap_labels = skipped.at("ap_labels").get<int>();
    report.skipped.ap_instances = skipped.at("ap_instances").get<int>();
    report.skipped.ranking_instances = skipped.at("ranking_instances").get<int>();
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid metrics JSON: " + e.what());
  }
}

}  // namespace ctxzsl
