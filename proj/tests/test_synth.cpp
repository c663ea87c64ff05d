#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "ctxzsl/ingest.hpp"
#include "ctxzsl/synth.hpp"
#include "test_helpers.hpp"

using ctxzsl::Error;
using ctxzsl::SynthConfig;
using ctxzsl::SynthDataset;
using test_helpers::TempDir;

namespace {

SynthConfig small_config(std::int64_t seed) {
  SynthConfig cfg;
  cfg.num_attributes = 12;
  cfg.num_novel = 2;
  cfg.num_instances = 200;
  cfg.embed_dim = 8;
  cfg.feature_dim = 16;
  cfg.feature_noise = 0.5;
  cfg.contradiction_pairs = 2;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("generate is bitwise deterministic in the config") {
  const SynthConfig cfg = small_config(7);
  const SynthDataset a = ctxzsl::generate(cfg);
  const SynthDataset b = ctxzsl::generate(cfg);
  CHECK(a.vocabulary.names() == b.vocabulary.names());
  CHECK(a.features.data() == b.features.data());
  CHECK(a.annotations.cells() == b.annotations.cells());
  CHECK(a.communities == b.communities);
  CHECK(a.contradictions == b.contradictions);
  for (const std::string& name : a.vocabulary.names()) {
    CHECK(a.vectors.vector(name) == b.vectors.vector(name));
  }

  const SynthDataset other = ctxzsl::generate(small_config(8));
  CHECK(a.features.data() != other.features.data());
}

TEST_CASE("generated datasets have the requested shape and structure") {
  const SynthConfig cfg = small_config(3);
  const SynthDataset data = ctxzsl::generate(cfg);

  CHECK(data.vocabulary.size() == 12);
  CHECK(data.features.data().rows() == cfg.feature_dim);
  CHECK(data.features.data().cols() == cfg.num_instances);
  CHECK(data.annotations.cells().rows() == cfg.num_attributes);
  CHECK(data.annotations.cells().cols() == cfg.num_instances);
  CHECK(data.features.ids() == data.annotations.ids());
  ctxzsl::validate_aligned(data.features, data.annotations);

  // 12 attributes fall into two communities of six, in attribute order.
  REQUIRE(data.communities.size() == 12);
  for (std::size_t a = 0; a < 12; ++a) {
    CHECK(data.communities[a] == (a < 6 ? 0 : 1));
  }

  // Both planted pairs bridge community 0 and community 1.
  REQUIRE(data.contradictions.size() == 2);
  for (const auto& [first, second] : data.contradictions) {
    CHECK(data.communities[first] == 0);
    CHECK(data.communities[second] == 1);
  }

  // Every instance carries at least one positive attribute.
  const Eigen::MatrixXi& cells = data.annotations.cells();
  for (Eigen::Index n = 0; n < cells.cols(); ++n) {
    CHECK(cells.col(n).sum() >= 1);
  }
}

TEST_CASE("contradiction pairs are near-parallel yet mutually exclusive") {
  const SynthDataset data = ctxzsl::generate(small_config(11));
  const Eigen::MatrixXi& cells = data.annotations.cells();
  for (const auto& [a, b] : data.contradictions) {
    const Eigen::VectorXd va = data.vectors.vector(data.vocabulary.name(a));
    const Eigen::VectorXd vb = data.vectors.vector(data.vocabulary.name(b));
    const double cosine = va.dot(vb) / (va.norm() * vb.norm());
    CHECK(cosine >= 0.95);
    for (Eigen::Index n = 0; n < cells.cols(); ++n) {
      CHECK(cells(static_cast<Eigen::Index>(a), n) *
                cells(static_cast<Eigen::Index>(b), n) ==
            0);
    }
  }
}

TEST_CASE("validate_synth_config rejects inconsistent settings") {
  CHECK_NOTHROW(ctxzsl::validate_synth_config(SynthConfig{}));

  SynthConfig cfg = small_config(0);
  cfg.num_novel = cfg.num_attributes;
  CHECK_THROWS_AS(ctxzsl::validate_synth_config(cfg), Error);

  cfg = small_config(0);
  cfg.feature_noise = -0.1;
  CHECK_THROWS_AS(ctxzsl::validate_synth_config(cfg), Error);

  cfg = small_config(0);
  cfg.contradiction_pairs = 7;  // > num_attributes / 2
  CHECK_THROWS_AS(ctxzsl::validate_synth_config(cfg), Error);

  cfg = small_config(0);
  cfg.num_instances = 0;
  CHECK_THROWS_AS(ctxzsl::validate_synth_config(cfg), Error);
}

TEST_CASE("generate rejects pair counts the community layout cannot host") {
  // 18 attributes form three communities, so only one bridge (communities 0
  // and 1) exists; it holds at most six pairs even though the config bound
  // of num_attributes/2 = 9 admits seven.
  SynthConfig cfg = small_config(0);
  cfg.num_attributes = 18;
  cfg.contradiction_pairs = 7;
  CHECK_NOTHROW(ctxzsl::validate_synth_config(cfg));
  CHECK_THROWS_WITH_AS(
      (void)ctxzsl::generate(cfg),
      doctest::Contains("cannot plant the requested contradiction pairs"), Error);

  cfg.contradiction_pairs = 6;
  CHECK_NOTHROW((void)ctxzsl::generate(cfg));
}

TEST_CASE("synth configs round-trip through JSON") {
  SynthConfig cfg = small_config(42);
  cfg.feature_noise = 0.3125;
  TempDir dir("synthcfg");
  const std::string path = dir.file("config.json");
  ctxzsl::save_synth_config(cfg, path);
  const SynthConfig loaded = ctxzsl::load_synth_config(path);
  CHECK(loaded.num_attributes == cfg.num_attributes);
  CHECK(loaded.num_novel == cfg.num_novel);
  CHECK(loaded.num_instances == cfg.num_instances);
  CHECK(loaded.embed_dim == cfg.embed_dim);
  CHECK(loaded.feature_dim == cfg.feature_dim);
  CHECK(loaded.feature_noise == cfg.feature_noise);
  CHECK(loaded.contradiction_pairs == cfg.contradiction_pairs);
  CHECK(loaded.seed == cfg.seed);

  CHECK_THROWS_AS((void)ctxzsl::load_synth_config(dir.file("missing.json")), Error);
}

TEST_CASE("write_synth_dataset emits loadable, aligned artifacts") {
  const SynthConfig cfg = small_config(5);
  const SynthDataset data = ctxzsl::generate(cfg);
  TempDir dir("synthout");
  ctxzsl::write_synth_dataset(data, cfg, dir.str());

  const ctxzsl::WordVectorTable vectors =
      ctxzsl::load_word_vectors(dir.file("vectors.txt"));
  const ctxzsl::FeatureMatrix features = ctxzsl::load_features(dir.file("features.csv"));
  const ctxzsl::AnnotationMatrix annotations =
      ctxzsl::load_annotations(dir.file("annotations.csv"));
  ctxzsl::validate_aligned(features, annotations);
  CHECK(annotations.cells() == data.annotations.cells());
  CHECK(vectors.dim() == static_cast<std::size_t>(cfg.embed_dim));
  for (const std::string& name : data.vocabulary.names()) {
    CHECK(vectors.contains(name));
  }

  std::ifstream in(dir.file("manifest.json"));
  REQUIRE(in.good());
  nlohmann::json manifest;
  in >> manifest;
  CHECK(manifest.at("config").at("num_attributes").get<int>() == cfg.num_attributes);
  CHECK(manifest.at("config").at("seed").get<std::int64_t>() == cfg.seed);
  CHECK(manifest.at("communities").get<std::vector<int>>() == data.communities);
  const auto pairs = manifest.at("contradiction_pairs");
  REQUIRE(pairs.size() == data.contradictions.size());
  for (std::size_t k = 0; k < data.contradictions.size(); ++k) {
    CHECK(pairs[k][0].get<std::string>() ==
          data.vocabulary.name(data.contradictions[k].first));
    CHECK(pairs[k][1].get<std::string>() ==
          data.vocabulary.name(data.contradictions[k].second));
  }
}
