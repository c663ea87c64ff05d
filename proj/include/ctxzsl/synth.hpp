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

#ifndef CTXZSL_SYNTH_HPP_
#define CTXZSL_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ctxzsl/core.hpp"

namespace ctxzsl {

struct SynthConfig {
  int num_attributes = 30;
  int num_novel = 6;
  int num_instances = 2000;
  int embed_dim = 16;
  int feature_dim = 48;
  double feature_noise = 0.5;   // isotropic sigma added to the feature map
  int contradiction_pairs = 4;  // near-identical embeddings, exclusive labels
  std::int64_t seed = 0;
};

void validate_synth_config(const SynthConfig& cfg);
SynthConfig load_synth_config(const std::string& path);
void save_synth_config(const SynthConfig& cfg, const std::string& path);

// A generated dataset plus the planted structure behind it.
struct SynthDataset {
  AttributeVocabulary vocabulary;
  WordVectorTable vectors;
  FeatureMatrix features;
  AnnotationMatrix annotations;
  std::vector<int> communities;                            // community id per attribute
  std::vector<std::pair<std::size_t, std::size_t>> contradictions;  // index pairs
};

// Deterministic generator: attributes form co-occurrence communities (Gibbs
// sampling over a pairwise attraction/repulsion field, 50 sweeps); each
// contradiction pair shares a perturbed base embedding (cosine >= 0.95) while
// its labels are mutually exclusive; features are a fixed linear map of the
// label vector plus noise of scale feature_noise.  Identical configs produce
// bitwise-identical datasets.
SynthDataset generate(const SynthConfig& cfg);

// Writes vectors.txt, features.csv, annotations.csv, and manifest.json
// (config echo plus communities and contradiction pairs) into out_dir.
void write_synth_dataset(const SynthDataset& dataset, const SynthConfig& cfg,
                         const std::string& out_dir);

}  // namespace ctxzsl

#endif  // CTXZSL_SYNTH_HPP_
