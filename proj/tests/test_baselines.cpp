#include <string>
#include <vector>

#include <doctest.h>

#include "ctxzsl/baselines.hpp"
#include "ctxzsl/rng.hpp"
#include "test_helpers.hpp"

using ctxzsl::AnnotationMatrix;
using ctxzsl::AttributeVocabulary;
using ctxzsl::EmbeddedVocabulary;
using ctxzsl::EmbeddingRegressor;
using ctxzsl::Error;
using ctxzsl::ErrorCode;
using ctxzsl::EszslModel;
using ctxzsl::FeatureMatrix;
using test_helpers::TempDir;

namespace {

// Smallest possible training problem: one instance, one attribute, all 1-D.
struct ScalarTrainFixture {
  FeatureMatrix features{{"i0"}, Eigen::MatrixXd::Ones(1, 1)};
  AnnotationMatrix annotations{AttributeVocabulary({"p"}),
                               {"i0"},
                               Eigen::MatrixXi::Ones(1, 1)};
  EmbeddedVocabulary embeddings{AttributeVocabulary({"p"}), Eigen::MatrixXd::Ones(1, 1)};
};

EmbeddedVocabulary axes_embeddings() {
  EmbeddedVocabulary v;
  v.vocabulary = AttributeVocabulary({"q1", "q2"});
  v.vectors = Eigen::MatrixXd::Identity(2, 2);
  return v;
}

// Regressor whose projection of x = [1] is the fixed 2-D vector (a, b).
EmbeddingRegressor fixed_projection(double a, double b) {
  EmbeddingRegressor model;
  model.M = Eigen::MatrixXd(1, 2);
  model.M << a, b;
  return model;
}

}  // namespace

TEST_CASE("exdap_train solves the scalar ridge problem") {
  const ScalarTrainFixture fx;
  const EmbeddingRegressor model =
      ctxzsl::exdap_train(fx.features, fx.annotations, fx.embeddings, 1.0);
  // argmin (m - 1)^2 + m^2 = 1/2.
  CHECK(model.M(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(model.lambda == 1.0);

  const Eigen::VectorXd x = Eigen::VectorXd::Ones(1);
  // Ridge decode with lambda 1: (1 + 1)^-1 * 1 * 0.5 = 0.25.
  CHECK(ctxzsl::exdap_predict(x, model, fx.embeddings, 1.0)(0) ==
        doctest::Approx(0.25).epsilon(1e-12));
  // Exact decode at lambda 0 recovers the projection.
  CHECK(ctxzsl::exdap_predict(x, model, fx.embeddings, 0.0)(0) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(
      (void)ctxzsl::exdap_train(fx.features, fx.annotations, fx.embeddings, 0.0), Error);
}

TEST_CASE("exdap closed form is a stationary point of its objective") {
  ctxzsl::rng::Rng rng(501);
  const int Dx = 4, Dv = 3, P = 3, N = 12;
  Eigen::MatrixXd X(Dx, N);
  for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
  Eigen::MatrixXi Y(P, N);
  for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) = rng.bernoulli(0.4) ? 1 : 0;
  Eigen::MatrixXd V(Dv, P);
  for (Eigen::Index i = 0; i < V.size(); ++i) V(i) = rng.normal();

  std::vector<std::string> ids;
  for (int n = 0; n < N; ++n) ids.push_back("i" + std::to_string(n));
  const FeatureMatrix features(ids, X);
  const AnnotationMatrix annotations(AttributeVocabulary({"a", "b", "c"}), ids, Y);
  const EmbeddedVocabulary embeddings{AttributeVocabulary({"a", "b", "c"}), V};

  const double lambda = 0.1;
  const EmbeddingRegressor model =
      ctxzsl::exdap_train(features, annotations, embeddings, lambda);

  const auto objective = [&](const Eigen::MatrixXd& M) {
    return (M.transpose() * X - V * Y.cast<double>()).squaredNorm() +
           lambda * M.squaredNorm();
  };
  const double at_solution = objective(model.M);
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::MatrixXd delta(Dx, Dv);
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = 0.01 * rng.normal();
    CHECK(objective(model.M + delta) > at_solution);
  }
}

TEST_CASE("wve shares the exdap trainer and scores by negative distance") {
  const ScalarTrainFixture fx;
  const EmbeddingRegressor via_wve =
      ctxzsl::wve_train(fx.features, fx.annotations, fx.embeddings, 1.0);
  const EmbeddingRegressor via_exdap =
      ctxzsl::exdap_train(fx.features, fx.annotations, fx.embeddings, 1.0);
  CHECK(via_wve.M == via_exdap.M);

  // Projection (1, 0) against axis embeddings: scores [0, -2].
  const EmbeddingRegressor model = fixed_projection(1.0, 0.0);
  const Eigen::VectorXd scores =
      ctxzsl::wve_predict(Eigen::VectorXd::Ones(1), model, axes_embeddings());
  CHECK(scores(0) == 0.0);
  CHECK(scores(1) == -2.0);
}

TEST_CASE("eszsl_train solves the scalar problem in closed form") {
  const ScalarTrainFixture fx;
  const EszslModel model =
      ctxzsl::eszsl_train(fx.features, fx.annotations, fx.embeddings, 1.0, 1.0);
  // (1 + 1)^-1 * 1 * (1 + 1)^-1 = 1/4.
  CHECK(model.M(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(model.lambda3 == 1.0);

  // scores = (x^T M V)^T.
  EmbeddedVocabulary test;
  test.vocabulary = AttributeVocabulary({"z"});
  test.vectors = Eigen::MatrixXd::Constant(1, 1, 2.0);
  CHECK(ctxzsl::eszsl_predict(Eigen::VectorXd::Ones(1), model, test)(0) ==
        doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(
      (void)ctxzsl::eszsl_train(fx.features, fx.annotations, fx.embeddings, 0.0, 1.0),
      Error);
}

TEST_CASE("eszsl closed form minimises the exposed objective") {
  ctxzsl::rng::Rng rng(777);
  const int Dx = 5, Dv = 4, P = 4, N = 15;
  Eigen::MatrixXd X(Dx, N);
  for (Eigen::Index i = 0; i < X.size(); ++i) X(i) = rng.normal();
  Eigen::MatrixXi Y(P, N);
  for (Eigen::Index i = 0; i < Y.size(); ++i) Y(i) = rng.bernoulli(0.35) ? 1 : 0;
  Eigen::MatrixXd V(Dv, P);
  for (Eigen::Index i = 0; i < V.size(); ++i) V(i) = rng.normal();

  std::vector<std::string> ids;
  for (int n = 0; n < N; ++n) ids.push_back("i" + std::to_string(n));
  std::vector<std::string> names;
  for (int p = 0; p < P; ++p) names.push_back("p" + std::to_string(p));
  const FeatureMatrix features(ids, X);
  const AnnotationMatrix annotations(AttributeVocabulary(names), ids, Y);
  const EmbeddedVocabulary embeddings{AttributeVocabulary(names), V};

  const double lambda1 = 0.2;
  const double lambda2 = 0.4;
  const EszslModel model =
      ctxzsl::eszsl_train(features, annotations, embeddings, lambda1, lambda2);
  const double at_solution = ctxzsl::eszsl_objective(features, annotations, embeddings,
                                                     lambda1, lambda2, model.M);
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::MatrixXd delta(Dx, Dv);
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta(i) = 0.01 * rng.normal();
    CHECK(ctxzsl::eszsl_objective(features, annotations, embeddings, lambda1, lambda2,
                                  model.M + delta) > at_solution);
  }
}

TEST_CASE("dmp_predict picks the nearest label subset") {
  const EmbeddingRegressor model = fixed_projection(1.0, 0.0);
  const Eigen::VectorXi y =
      ctxzsl::dmp_predict(Eigen::VectorXd::Ones(1), model, axes_embeddings());
  CHECK(y(0) == 1);
  CHECK(y(1) == 0);
}

TEST_CASE("dmp_predict breaks exact ties lexicographically") {
  // Both test embeddings identical: including either gives distance zero;
  // the tie goes to the candidate with 0 in the first differing coordinate.
  EmbeddedVocabulary twins;
  twins.vocabulary = AttributeVocabulary({"q1", "q2"});
  twins.vectors = Eigen::MatrixXd(2, 2);
  twins.vectors << 1, 1,  //
      0, 0;
  const EmbeddingRegressor model = fixed_projection(1.0, 0.0);
  const Eigen::VectorXi y = ctxzsl::dmp_predict(Eigen::VectorXd::Ones(1), model, twins);
  CHECK(y(0) == 0);
  CHECK(y(1) == 1);
}

TEST_CASE("dmp_predict prefers fewer positives among tied distances") {
  // Projection at the origin, one zero embedding: empty set ties with {q1};
  // fewer positives wins.
  EmbeddedVocabulary vocab;
  vocab.vocabulary = AttributeVocabulary({"q1"});
  vocab.vectors = Eigen::MatrixXd::Zero(2, 1);
  const EmbeddingRegressor model = fixed_projection(0.0, 0.0);
  const Eigen::VectorXi y = ctxzsl::dmp_predict(Eigen::VectorXd::Ones(1), model, vocab);
  CHECK(y(0) == 0);
}

TEST_CASE("dmp_rank_scores orders included attributes above excluded ones") {
  const EmbeddingRegressor model = fixed_projection(1.0, 0.0);
  const Eigen::VectorXd scores =
      ctxzsl::dmp_rank_scores(Eigen::VectorXd::Ones(1), model, axes_embeddings());
  // d(without q1) - d(with q1) = 1 - 0; d(without q2) - d(with q2) = 0 - 1.
  CHECK(scores(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(scores(1) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(scores(0) > scores(1));
}

TEST_CASE("dmp_predict rejects oversized power sets") {
  EmbeddedVocabulary wide;
  std::vector<std::string> names;
  for (int q = 0; q < 21; ++q) names.push_back("q" + std::to_string(q));
  wide.vocabulary = AttributeVocabulary(names);
  wide.vectors = Eigen::MatrixXd::Zero(2, 21);
  const EmbeddingRegressor model = fixed_projection(0.0, 0.0);
  try {
    (void)ctxzsl::dmp_predict(Eigen::VectorXd::Ones(1), model, wide);
    FAIL("expected an unsupported error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupported);
  }
}

TEST_CASE("regressor and eszsl models round-trip through JSON") {
  ctxzsl::rng::Rng rng(31337);
  EmbeddingRegressor regressor;
  regressor.M = Eigen::MatrixXd(3, 2);
  for (Eigen::Index i = 0; i < regressor.M.size(); ++i) regressor.M(i) = rng.normal();
  regressor.lambda = 0.125;

  TempDir dir("baseline_io");
  const std::string reg_path = dir.file("model.json");
  ctxzsl::save_regressor(regressor, "wve", reg_path);
  const EmbeddingRegressor reg_loaded = ctxzsl::load_regressor(reg_path);
  CHECK(reg_loaded.M == regressor.M);
  CHECK(reg_loaded.lambda == regressor.lambda);

  EszslModel eszsl;
  eszsl.M = Eigen::MatrixXd(2, 4);
  for (Eigen::Index i = 0; i < eszsl.M.size(); ++i) eszsl.M(i) = rng.normal();
  eszsl.lambda1 = 0.5;
  eszsl.lambda2 = 0.25;
  eszsl.lambda3 = 0.125;
  const std::string eszsl_path = dir.file("eszsl.json");
  ctxzsl::save_eszsl(eszsl, eszsl_path);
  const EszslModel eszsl_loaded = ctxzsl::load_eszsl(eszsl_path);
  CHECK(eszsl_loaded.M == eszsl.M);
  CHECK(eszsl_loaded.lambda1 == eszsl.lambda1);
  CHECK(eszsl_loaded.lambda2 == eszsl.lambda2);
  CHECK(eszsl_loaded.lambda3 == eszsl.lambda3);
}

TEST_CASE("training validates alignment of features and annotations") {
  const ScalarTrainFixture fx;
  const FeatureMatrix other({"different"}, Eigen::MatrixXd::Ones(1, 1));
  CHECK_THROWS_AS(
      (void)ctxzsl::exdap_train(other, fx.annotations, fx.embeddings, 1.0), Error);
  const EmbeddedVocabulary mismatched{AttributeVocabulary({"other"}),
                                      Eigen::MatrixXd::Ones(1, 1)};
  CHECK_THROWS_AS(
      (void)ctxzsl::eszsl_train(fx.features, fx.annotations, mismatched, 1.0, 1.0),
      Error);
}
