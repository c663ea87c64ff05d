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

#include "ctxzsl/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "ctxzsl/ingest.hpp"
#include "ctxzsl/rng.hpp"

namespace ctxzsl {

namespace {

// Planted-structure constants.  Chosen so that text similarity is a usable
// community signal (novel embeddings stay near their community base) while
// contradiction pairs are nearly parallel in embedding space yet never
// co-occur: the failure mode co-occurrence context is meant to absorb.  A pair
// bridging communities A and B lies along its own random base direction, with
// each member tilted toward its own community along the bridge's shared tilt
// axis (the difference of the two community bases).  Components of one member
// are mutually orthonormal, so the pair cosine is at least
// 1 - 2*tilt^2 - 2*noise^2 > 0.95 by construction.  A sharp text softmax
// then locks onto the partner -- a hard anti-signal, because the pair never
// co-occurs -- while a count-trained bilinear map can read the side of the
// bridge off the tilt axis, whose image it learns from the count differences
// of fully observed pairs on the same bridge.
constexpr double kEmbeddingSpread = 0.45;    // community-base perturbation scale
constexpr double kContradictionTilt = 0.15;  // pair-member tilt toward own side
constexpr double kContradictionNoise = 0.01;  // pair-member perturbation scale
constexpr double kIntraAttraction = 1.3;  // Gibbs field, same-community pairs
constexpr double kBasePrevalence = 0.008;  // stand-alone positive rate target
constexpr double kCommunityFieldStd = 2.0;  // per-instance community field spread
constexpr double kPrevalenceJitter = 0.6;  // per-attribute logit jitter half-range
constexpr int kGibbsSweeps = 50;
constexpr int kAttributesPerCommunity = 6;

double logit(double p) { return std::log(p / (1.0 - p)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::string padded_name(const char* prefix, int index, int count) {
  int width = 1;
  for (int v = count - 1; v >= 10; v /= 10) ++width;
  std::string digits = std::to_string(index);
  std::string name = prefix;
  if (digits.size() < static_cast<std::size_t>(width)) {
    name.append(static_cast<std::size_t>(width) - digits.size(), '0');
  }
  name += digits;
  return name;
}

}  // namespace

void validate_synth_config(const SynthConfig& cfg) {
  if (cfg.num_attributes <= 0 || cfg.num_novel <= 0 || cfg.num_instances <= 0 ||
      cfg.embed_dim <= 0 || cfg.feature_dim <= 0) {
    throw Error(ErrorCode::kConfig, "synth config requires positive sizes");
  }
  if (cfg.num_novel >= cfg.num_attributes) {
    throw Error(ErrorCode::kConfig, "num_novel must be smaller than num_attributes");
  }
  if (cfg.feature_noise < 0.0) {
    throw Error(ErrorCode::kConfig, "feature_noise must be non-negative");
  }
  if (cfg.contradiction_pairs < 0 ||
      cfg.contradiction_pairs > cfg.num_attributes / 2) {
    throw Error(ErrorCode::kConfig,
                "contradiction_pairs must lie in [0, num_attributes/2]");
  }
}

SynthConfig load_synth_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open file for reading: " + path);
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid synth config JSON: " + e.what());
  }
  SynthConfig cfg;
  try {
    cfg.num_attributes = j.value("num_attributes", cfg.num_attributes);
    cfg.num_novel = j.value("num_novel", cfg.num_novel);
    cfg.num_instances = j.value("num_instances", cfg.num_instances);
    cfg.embed_dim = j.value("embed_dim", cfg.embed_dim);
    cfg.feature_dim = j.value("feature_dim", cfg.feature_dim);
    cfg.feature_noise = j.value("feature_noise", cfg.feature_noise);
    cfg.contradiction_pairs = j.value("contradiction_pairs", cfg.contradiction_pairs);
    cfg.seed = j.value("seed", cfg.seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid synth config JSON: " + e.what());
  }
  validate_synth_config(cfg);
  return cfg;
}

void save_synth_config(const SynthConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["num_attributes"] = cfg.num_attributes;
  j["num_novel"] = cfg.num_novel;
  j["num_instances"] = cfg.num_instances;
  j["embed_dim"] = cfg.embed_dim;
  j["feature_dim"] = cfg.feature_dim;
  j["feature_noise"] = cfg.feature_noise;
  j["contradiction_pairs"] = cfg.contradiction_pairs;
  j["seed"] = cfg.seed;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

SynthDataset generate(const SynthConfig& cfg) {
  validate_synth_config(cfg);
  const int P = cfg.num_attributes;
  const int Dv = cfg.embed_dim;
  const int Dx = cfg.feature_dim;
  const int N = cfg.num_instances;
  rng::Rng rng(rng::mix_seed(static_cast<std::uint64_t>(cfg.seed), 0x73796e7468ULL));

  // Attribute names and contiguous community blocks.
  std::vector<std::string> names(static_cast<std::size_t>(P));
  for (int a = 0; a < P; ++a) names[static_cast<std::size_t>(a)] = padded_name("attr", a, P);
  const int num_communities =
      std::max(2, (P + kAttributesPerCommunity - 1) / kAttributesPerCommunity);
  std::vector<int> communities(static_cast<std::size_t>(P));
  for (int a = 0; a < P; ++a) {
    communities[static_cast<std::size_t>(a)] =
        std::min(a * num_communities / P, num_communities - 1);
  }

  // Contradiction pairs bridge two fixed communities each: bridge j joins
  // communities 2j and 2j+1, and pairs fill a bridge completely before moving
  // to the next.  Every pair on a bridge therefore spans the same two
  // communities and shares one tilt axis, which is what lets a co-occurrence
  // model learn which side of the bridge a member belongs to from the pairs
  // whose members are both known.
  std::vector<std::vector<std::size_t>> members_of(
      static_cast<std::size_t>(num_communities));
  for (int a = 0; a < P; ++a) {
    members_of[static_cast<std::size_t>(communities[static_cast<std::size_t>(a)])]
        .push_back(static_cast<std::size_t>(a));
  }
  for (auto& members : members_of) rng.shuffle(members);
  std::vector<std::pair<std::size_t, std::size_t>> contradictions;
  std::vector<int> partner(static_cast<std::size_t>(P), -1);
  {
    int bridge = 0;
    std::size_t slot = 0;
    for (int k = 0; k < cfg.contradiction_pairs; ++k) {
      while (2 * bridge + 1 < num_communities &&
             slot >= std::min(members_of[static_cast<std::size_t>(2 * bridge)].size(),
                              members_of[static_cast<std::size_t>(2 * bridge + 1)].size())) {
        ++bridge;
        slot = 0;
      }
      if (2 * bridge + 1 >= num_communities) {
        throw Error(ErrorCode::kConfig,
                    "cannot plant the requested contradiction pairs across communities");
      }
      const std::size_t a = members_of[static_cast<std::size_t>(2 * bridge)][slot];
      const std::size_t b = members_of[static_cast<std::size_t>(2 * bridge + 1)][slot];
      ++slot;
      contradictions.emplace_back(a, b);
      partner[a] = static_cast<int>(b);
      partner[b] = static_cast<int>(a);
    }
  }

  // Embeddings: community base plus spread for regular attributes; a shared
  // pair base plus a small perturbation for contradiction members.
  std::vector<Eigen::VectorXd> community_base(static_cast<std::size_t>(num_communities));
  for (int c = 0; c < num_communities; ++c) community_base[static_cast<std::size_t>(c)] = rng.unit_vector(Dv);
  Eigen::MatrixXd embeddings(Dv, P);
  for (int a = 0; a < P; ++a) {
    if (partner[static_cast<std::size_t>(a)] < 0) {
      Eigen::VectorXd v = community_base[static_cast<std::size_t>(
                              communities[static_cast<std::size_t>(a)])] +
                          kEmbeddingSpread * rng.unit_vector(Dv);
      embeddings.col(a) = v / v.norm();
    } else {
      embeddings.col(a).setZero();  // filled with its pair below
    }
  }
  const auto normalized = [](Eigen::VectorXd v) {
    const double norm = v.norm();
    if (norm < 1e-12) {
      throw Error(ErrorCode::kInternal, "degenerate embedding direction");
    }
    return Eigen::VectorXd(v / norm);
  };
  for (const auto& [a, b] : contradictions) {
    const Eigen::VectorXd& base_a =
        community_base[static_cast<std::size_t>(communities[static_cast<std::size_t>(a)])];
    const Eigen::VectorXd& base_b =
        community_base[static_cast<std::size_t>(communities[static_cast<std::size_t>(b)])];
    // The tilt axis is identical for every pair on the same bridge; the pair
    // base is orthogonalised against it so the axis stays exact.
    const Eigen::VectorXd tilt = normalized(base_a - base_b);
    Eigen::VectorXd pair_base = rng.unit_vector(Dv);
    pair_base = normalized(pair_base - pair_base.dot(tilt) * tilt);
    const double base_weight =
        std::sqrt(1.0 - kContradictionTilt * kContradictionTilt -
                  kContradictionNoise * kContradictionNoise);
    const auto member_embedding = [&](double side) {
      Eigen::VectorXd noise = rng.unit_vector(Dv);
      noise -= noise.dot(pair_base) * pair_base + noise.dot(tilt) * tilt;
      // Orthonormal components with fixed weights: exactly unit norm.
      return Eigen::VectorXd(base_weight * pair_base +
                             side * kContradictionTilt * tilt +
                             kContradictionNoise * normalized(std::move(noise)));
    };
    const Eigen::VectorXd va = member_embedding(1.0);
    const Eigen::VectorXd vb = member_embedding(-1.0);
    embeddings.col(static_cast<Eigen::Index>(a)) = va;
    embeddings.col(static_cast<Eigen::Index>(b)) = vb;
    const double cosine = va.dot(vb);
    if (cosine < 0.95) {
      throw Error(ErrorCode::kInternal, "contradiction pair cosine fell below 0.95");
    }
  }

  // Gibbs field parameters.  Communities attract internally and are otherwise
  // independent; sparsity comes from the low base rate, and the only negative
  // interaction is the hard pair exclusion.  Cross-community attributes are
  // therefore near-neutral for one another, which keeps a partner's
  // co-occurrence profile harmless for the member it excludes.
  Eigen::MatrixXd coupling = Eigen::MatrixXd::Zero(P, P);
  for (int a = 0; a < P; ++a) {
    for (int b = 0; b < P; ++b) {
      if (a == b) continue;
      if (communities[static_cast<std::size_t>(a)] ==
          communities[static_cast<std::size_t>(b)]) {
        coupling(a, b) = kIntraAttraction;
      }
    }
  }
  Eigen::VectorXd theta(P);
  for (int a = 0; a < P; ++a) {
    theta(a) = logit(kBasePrevalence) + rng.uniform(-kPrevalenceJitter, kPrevalenceJitter);
  }

  // Label sampling: sequential-scan Gibbs with hard mutual exclusion.  A
  // per-instance random field shared within each community decides whether
  // that community's block ignites; without it, ignition of a tightly coupled
  // block is supercritical in the base rate and prevalences collapse to
  // almost-never or almost-always.
  Eigen::MatrixXi labels(P, N);
  Eigen::VectorXd state(P);
  Eigen::VectorXd offset(num_communities);
  for (int n = 0; n < N; ++n) {
    for (int c = 0; c < num_communities; ++c) {
      offset(c) = kCommunityFieldStd * rng.normal();
    }
    state.setZero();
    for (int a = 0; a < P; ++a) {
      const int pa = partner[static_cast<std::size_t>(a)];
      const bool blocked = pa >= 0 && pa < a && state(pa) > 0.5;
      state(a) = (!blocked && rng.bernoulli(kBasePrevalence)) ? 1.0 : 0.0;
    }
    for (int sweep = 0; sweep < kGibbsSweeps; ++sweep) {
      for (int a = 0; a < P; ++a) {
        const int pa = partner[static_cast<std::size_t>(a)];
        if (pa >= 0 && state(pa) > 0.5) {
          state(a) = 0.0;
          continue;
        }
        const double field = theta(a) + offset(communities[static_cast<std::size_t>(a)]) +
                             coupling.row(a).dot(state) - coupling(a, a) * state(a);
        state(a) = rng.bernoulli(sigmoid(field)) ? 1.0 : 0.0;
      }
    }
    if (state.sum() < 0.5) {
      // Guarantee at least one positive: flip the attribute with the largest
      // effective field (no partner can be positive when everything is zero).
      Eigen::Index best = 0;
      double best_field = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < P; ++a) {
        const double f = theta(a) + offset(communities[static_cast<std::size_t>(a)]);
        if (f > best_field) {
          best_field = f;
          best = a;
        }
      }
      state(best) = 1.0;
    }
    for (int a = 0; a < P; ++a) labels(a, n) = state(a) > 0.5 ? 1 : 0;
  }

  // Features: unit-column linear map of the labels plus isotropic noise.
  Eigen::MatrixXd feature_map(Dx, P);
  for (int a = 0; a < P; ++a) feature_map.col(a) = rng.unit_vector(Dx);
  Eigen::MatrixXd features = feature_map * labels.cast<double>();
  if (cfg.feature_noise > 0.0) {
    for (Eigen::Index n = 0; n < features.cols(); ++n) {
      for (Eigen::Index d = 0; d < features.rows(); ++d) {
        features(d, n) += cfg.feature_noise * rng.normal();
      }
    }
  }

  AttributeVocabulary vocabulary(names);
  WordVectorTable table(static_cast<std::size_t>(Dv));
  for (int a = 0; a < P; ++a) {
    table.insert(names[static_cast<std::size_t>(a)], embeddings.col(a));
  }
  std::vector<std::string> instance_ids(static_cast<std::size_t>(N));
  for (int n = 0; n < N; ++n) {
    instance_ids[static_cast<std::size_t>(n)] = padded_name("inst", n, N);
  }

  return SynthDataset{std::move(vocabulary),
                      std::move(table),
                      FeatureMatrix(instance_ids, std::move(features)),
                      AnnotationMatrix(AttributeVocabulary(names), instance_ids,
                                       std::move(labels)),
                      std::move(communities),
                      std::move(contradictions)};
}

void write_synth_dataset(const SynthDataset& dataset, const SynthConfig& cfg,
                         const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::kIo, "cannot create output directory: " + out_dir);
  }
  const std::filesystem::path dir(out_dir);
  save_word_vectors(dataset.vectors, (dir / "vectors.txt").string());
  save_features(dataset.features, (dir / "features.csv").string());
  save_annotations(dataset.annotations, (dir / "annotations.csv").string());

  nlohmann::json manifest;
  manifest["config"] = {{"num_attributes", cfg.num_attributes},
                        {"num_novel", cfg.num_novel},
                        {"num_instances", cfg.num_instances},
                        {"embed_dim", cfg.embed_dim},
                        {"feature_dim", cfg.feature_dim},
                        {"feature_noise", cfg.feature_noise},
                        {"contradiction_pairs", cfg.contradiction_pairs},
                        {"seed", cfg.seed}};
  manifest["communities"] = dataset.communities;
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& [a, b] : dataset.contradictions) {
    pairs.push_back({dataset.vocabulary.name(a), dataset.vocabulary.name(b)});
  }
  manifest["contradiction_pairs"] = pairs;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open manifest for writing in " + out_dir);
  }
  out << manifest.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, "manifest write failed in " + out_dir);
  }
}

}  // namespace ctxzsl
