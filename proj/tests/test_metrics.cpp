#include <string>
#include <vector>

#include <doctest.h>

#include "ctxzsl/metrics.hpp"
#include "test_helpers.hpp"

using ctxzsl::AnnotationMatrix;
using ctxzsl::AttributeVocabulary;
using ctxzsl::BinarizePolicy;
using ctxzsl::Error;
using ctxzsl::ErrorCode;
using ctxzsl::MetricsReport;
using ctxzsl::ScoreMatrix;
using test_helpers::TempDir;

TEST_CASE("roc_auc counts ordered pairs with half credit for ties") {
  // Positives at scores 0.8 and 0.4, negatives at 0.6 and 0.2: 3 of 4 pairs
  // correctly ordered.
  const std::vector<double> scores = {0.8, 0.6, 0.4, 0.2};
  const std::vector<int> labels = {1, 0, 1, 0};
  CHECK(ctxzsl::roc_auc(scores, labels) == doctest::Approx(0.75).epsilon(1e-15));

  const std::vector<double> tied = {1.0, 1.0};
  CHECK(ctxzsl::roc_auc(tied, std::vector<int>{1, 0}) ==
        doctest::Approx(0.5).epsilon(1e-15));

  CHECK(ctxzsl::roc_auc(std::vector<double>{1.0, 0.0}, std::vector<int>{1, 0}) == 1.0);
  CHECK(ctxzsl::roc_auc(std::vector<double>{0.0, 1.0}, std::vector<int>{1, 0}) == 0.0);

  CHECK_THROWS_AS((void)ctxzsl::roc_auc(scores, std::vector<int>{1, 1, 1, 1}), Error);
  CHECK_THROWS_AS((void)ctxzsl::roc_auc(scores, std::vector<int>{1, 0, 2, 0}), Error);
  CHECK_THROWS_AS((void)ctxzsl::roc_auc(scores, std::vector<int>{1, 0}), Error);
}

TEST_CASE("average_precision walks ranks with ascending-index tie-breaks") {
  // Descending order: idx0 (pos, precision 1), idx1 (neg), idx2 (pos, 2/3):
  // AP = (1 + 2/3) / 2 = 5/6.
  const std::vector<double> scores = {3.0, 2.0, 1.0};
  const std::vector<int> labels = {1, 0, 1};
  CHECK(ctxzsl::average_precision(scores, labels) ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-15));

  // Tied scores break by ascending index: the negative at index 0 outranks
  // the positive at index 1.
  CHECK(ctxzsl::average_precision(std::vector<double>{1.0, 1.0},
                                  std::vector<int>{0, 1}) ==
        doctest::Approx(0.5).epsilon(1e-15));
  CHECK(ctxzsl::average_precision(std::vector<double>{1.0, 1.0},
                                  std::vector<int>{1, 0}) == 1.0);

  CHECK_THROWS_AS(
      (void)ctxzsl::average_precision(scores, std::vector<int>{0, 0, 0}), Error);
}

TEST_CASE("hamming_loss is the disagreement fraction") {
  Eigen::MatrixXi predictions(2, 3);
  predictions << 1, 0, 1,  //
      0, 1, 0;
  Eigen::MatrixXi truth(2, 3);
  truth << 1, 1, 1,  //
      0, 1, 1;
  CHECK(ctxzsl::hamming_loss(predictions, truth) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ctxzsl::hamming_loss(truth, truth) == 0.0);
  CHECK_THROWS_AS((void)ctxzsl::hamming_loss(predictions, Eigen::MatrixXi::Zero(2, 2)),
                  Error);
  Eigen::MatrixXi invalid(1, 1);
  invalid << 3;
  CHECK_THROWS_AS((void)ctxzsl::hamming_loss(invalid, Eigen::MatrixXi::Zero(1, 1)),
                  Error);
}

TEST_CASE("ranking_loss averages tie-aware inversion fractions per instance") {
  // Single instance: positives {0, 2}, negatives {1, 3}; one tie between
  // the positive at index 2 and the negative at index 1:
  // (0 + 0.5) / 4 = 0.125.
  Eigen::MatrixXd scores(4, 1);
  scores << 4.0, 3.0, 3.0, 1.0;
  Eigen::MatrixXi truth(4, 1);
  truth << 1, 0, 1, 0;
  const ctxzsl::RankingLossResult single = ctxzsl::ranking_loss(scores, truth);
  CHECK(single.loss == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(single.skipped_instances == 0);

  // A second, single-class instance is skipped; the mean is unchanged.
  Eigen::MatrixXd two(4, 2);
  two.col(0) = scores.col(0);
  two.col(1) << 1.0, 2.0, 3.0, 4.0;
  Eigen::MatrixXi two_truth(4, 2);
  two_truth.col(0) = truth.col(0);
  two_truth.col(1) << 1, 1, 1, 1;
  const ctxzsl::RankingLossResult mixed = ctxzsl::ranking_loss(two, two_truth);
  CHECK(mixed.loss == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(mixed.skipped_instances == 1);

  // A perfectly ordered instance scores zero.
  Eigen::MatrixXd perfect(2, 1);
  perfect << 1.0, 0.0;
  Eigen::MatrixXi perfect_truth(2, 1);
  perfect_truth << 1, 0;
  CHECK(ctxzsl::ranking_loss(perfect, perfect_truth).loss == 0.0);

  // All instances single-class: undefined.
  CHECK_THROWS_AS((void)ctxzsl::ranking_loss(perfect, Eigen::MatrixXi::Ones(2, 1)),
                  Error);
}

TEST_CASE("binarize policies threshold per documented rules") {
  Eigen::MatrixXd values(4, 2);
  values << 0.5, 0.1,  //
      0.3, 0.1,        //
      0.15, 0.5,       //
      0.05, 0.3;
  const ScoreMatrix scores(AttributeVocabulary({"a", "b", "c", "d"}), {"i0", "i1"},
                           values);

  // Uniform threshold 1/Q = 0.25, strict.
  const Eigen::MatrixXi uniform =
      ctxzsl::binarize(scores, BinarizePolicy::uniform_threshold());
  Eigen::MatrixXi expected_uniform(4, 2);
  expected_uniform << 1, 0, 1, 0, 0, 1, 0, 1;
  CHECK(uniform == expected_uniform);

  const Eigen::MatrixXi fixed =
      ctxzsl::binarize(scores, BinarizePolicy::fixed_threshold(0.3));
  Eigen::MatrixXi expected_fixed(4, 2);
  expected_fixed << 1, 0, 0, 0, 0, 1, 0, 0;
  CHECK(fixed == expected_fixed);

  // Top-2 with the tie in column 1 (0.1 vs 0.1) broken by ascending index.
  const Eigen::MatrixXi top2 = ctxzsl::binarize(scores, BinarizePolicy::top_k(2));
  Eigen::MatrixXi expected_top2(4, 2);
  expected_top2 << 1, 0, 1, 0, 0, 1, 0, 1;
  CHECK(top2 == expected_top2);

  const Eigen::MatrixXi top1 = ctxzsl::binarize(scores, BinarizePolicy::top_k(1));
  CHECK(top1.col(0).sum() == 1);
  CHECK(top1(0, 0) == 1);
  CHECK(top1(2, 1) == 1);

  CHECK_THROWS_AS((void)ctxzsl::binarize(scores, BinarizePolicy::top_k(5)), Error);
}

TEST_CASE("binarize policy parsing round-trips through describe") {
  CHECK(BinarizePolicy::parse("uniform").kind ==
        BinarizePolicy::Kind::kUniformThreshold);
  const BinarizePolicy fixed = BinarizePolicy::parse("fixed:0.25");
  CHECK(fixed.kind == BinarizePolicy::Kind::kFixedThreshold);
  CHECK(fixed.threshold == 0.25);
  CHECK(fixed.describe() == "fixed:0.25");
  const BinarizePolicy topk = BinarizePolicy::parse("top-k:3");
  CHECK(topk.kind == BinarizePolicy::Kind::kTopK);
  CHECK(topk.k == 3);
  CHECK(topk.describe() == "top-k:3");
  CHECK(BinarizePolicy::parse("uniform").describe() == "uniform");

  CHECK_THROWS_AS((void)BinarizePolicy::parse("median"), Error);
  CHECK_THROWS_AS((void)BinarizePolicy::parse("top-k:0"), Error);
  CHECK_THROWS_AS((void)BinarizePolicy::parse("top-k:2.5"), Error);
  CHECK_THROWS_AS((void)BinarizePolicy::parse("fixed:"), Error);
}

namespace {

struct EvaluateFixture {
  ScoreMatrix scores;
  AnnotationMatrix truth;

  EvaluateFixture() : scores(make_scores()), truth(make_truth()) {}

  static ScoreMatrix make_scores() {
    Eigen::MatrixXd s(2, 4);
    s << 0.9, 0.6, 0.3, 0.2,  //
        0.1, 0.4, 0.7, 0.8;
    return ScoreMatrix(AttributeVocabulary({"q1", "q2"}),
                       {"i0", "i1", "i2", "i3"}, s);
  }

  static AnnotationMatrix make_truth() {
    Eigen::MatrixXi g(2, 4);
    g << 1, 1, 0, 0,  //
        0, 0, 1, 1;
    return AnnotationMatrix(AttributeVocabulary({"q1", "q2"}),
                            {"i0", "i1", "i2", "i3"}, g);
  }
};

}  // namespace

TEST_CASE("evaluate composes the five metrics coherently") {
  const EvaluateFixture fx;
  const MetricsReport report = ctxzsl::evaluate(fx.scores, fx.truth);

  // Perfectly ranked on both labels and both directions.
  CHECK(report.auc == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(report.label_ap == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(report.example_ap == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(report.ranking == doctest::Approx(0.0).epsilon(1e-15));
  // Uniform threshold = 0.5 here; i1/i2 scores straddle it exactly as truth.
  CHECK(report.hamming == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(report.skipped.auc_labels == 0);
  CHECK(report.skipped.ap_instances == 0);
  REQUIRE(report.per_label_auc.size() == 2);
  CHECK(report.per_label_auc[0] == doctest::Approx(1.0));
  CHECK(report.per_label_ap[1] == doctest::Approx(1.0));

  // Cross-check against the standalone metric on one label row.
  const std::vector<double> row0 = {0.9, 0.6, 0.3, 0.2};
  const std::vector<int> labels0 = {1, 1, 0, 0};
  CHECK(report.per_label_auc[0] ==
        doctest::Approx(ctxzsl::roc_auc(row0, labels0)).epsilon(1e-15));
}

TEST_CASE("evaluate skips degenerate labels and instances") {
  Eigen::MatrixXd s(3, 3);
  s << 0.9, 0.2, 0.4,  //
      0.5, 0.5, 0.5,   //
      0.1, 0.8, 0.3;
  const ScoreMatrix scores(AttributeVocabulary({"q1", "q2", "q3"}), {"i0", "i1", "i2"},
                           s);
  Eigen::MatrixXi g(3, 3);
  g << 1, 0, 1,  //
      0, 0, 0,   // single-class label: skipped by label metrics
      0, 1, 0;
  const AnnotationMatrix truth(AttributeVocabulary({"q1", "q2", "q3"}),
                               {"i0", "i1", "i2"}, g);
  const MetricsReport report = ctxzsl::evaluate(scores, truth);
  CHECK(report.skipped.auc_labels == 1);
  CHECK(report.skipped.ap_labels == 1);
  CHECK(std::isnan(report.per_label_auc[1]));
  CHECK_FALSE(std::isnan(report.per_label_auc[0]));
}

TEST_CASE("evaluate accepts an explicit binary override for hamming") {
  const EvaluateFixture fx;
  Eigen::MatrixXi override_matrix = Eigen::MatrixXi::Zero(2, 4);
  const MetricsReport report = ctxzsl::evaluate(
      fx.scores, fx.truth, BinarizePolicy::uniform_threshold(), &override_matrix);
  // All-zero predictions disagree with the 4 positive cells of 8.
  CHECK(report.hamming == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("evaluate validates vocabulary and id alignment") {
  const EvaluateFixture fx;
  const ScoreMatrix renamed(AttributeVocabulary({"other", "q2"}), fx.scores.ids(),
                            fx.scores.scores());
  CHECK_THROWS_AS((void)ctxzsl::evaluate(renamed, fx.truth), Error);
}

TEST_CASE("aggregate reports mean and population standard deviation") {
  MetricsReport low;
  low.auc = 0.6;
  low.hamming = 0.2;
  MetricsReport high;
  high.auc = 0.8;
  high.hamming = 0.4;
  const ctxzsl::AggregateReport agg = ctxzsl::aggregate({low, high});
  CHECK(agg.mean.auc == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(agg.stddev.auc == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(agg.mean.hamming == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(agg.stddev.hamming == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(agg.per_split.size() == 2);
  CHECK_THROWS_AS((void)ctxzsl::aggregate({}), Error);
}

TEST_CASE("metrics reports round-trip through JSON") {
  MetricsReport report;
  report.auc = 0.75;
  report.label_ap = 0.5;
  report.example_ap = 0.25;
  report.hamming = 0.125;
  report.ranking = 0.0625;
  report.skipped.auc_labels = 1;
  report.skipped.ap_instances = 2;
  TempDir dir("metrics");
  const std::string path = dir.file("metrics.json");
  ctxzsl::save_metrics(report, path);
  const MetricsReport loaded = ctxzsl::load_metrics(path);
  CHECK(loaded.auc == report.auc);
  CHECK(loaded.label_ap == report.label_ap);
  CHECK(loaded.example_ap == report.example_ap);
  CHECK(loaded.hamming == report.hamming);
  CHECK(loaded.ranking == report.ranking);
  CHECK(loaded.skipped.auc_labels == 1);
  CHECK(loaded.skipped.ap_instances == 2);
}
