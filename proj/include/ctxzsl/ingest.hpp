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

#ifndef CTXZSL_INGEST_HPP_
#define CTXZSL_INGEST_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "ctxzsl/core.hpp"

namespace ctxzsl {

struct SplitConfig {
  int num_novel = 9;
  int num_splits = 50;
  std::int64_t seed = 0;
};

// An attribute vocabulary paired with its embedding matrix; vectors has one
// column of length D_v per attribute, in vocabulary order.
struct EmbeddedVocabulary {
  AttributeVocabulary vocabulary;
  Eigen::MatrixXd vectors;  // D_v x P
};

// Shortest decimal text that round-trips the double exactly; all emitted
// files use this encoding so save -> load is lossless.
std::string format_real(double value);

// --- word vectors ---------------------------------------------------------

// word2vec text format: optional "<count> <dim>" first line, then one record
// per line "token r1 r2 ... rD".  Errors carry 1-based line numbers.
WordVectorTable load_word_vectors(const std::string& path);

// Inverse of load_word_vectors; writes a "<count> <dim>" header and one
// record per token in insertion order.  Reals are printed as shortest
// round-trip decimal text, so save -> load reproduces the table exactly.
void save_word_vectors(const WordVectorTable& table, const std::string& path);

// Lowercases, trims, and collapses internal whitespace.
std::string normalize_attribute_name(std::string_view name);

// Normalised name as a whole is looked up first; otherwise the mean of the
// in-vocabulary constituent token vectors.  All tokens OOV -> error listing
// them.
Eigen::VectorXd embed_attribute(const std::string& name, const WordVectorTable& table);

EmbeddedVocabulary embed_vocabulary(const AttributeVocabulary& vocabulary,
                                    const WordVectorTable& table);

// --- annotations / features ------------------------------------------------

// CSV with header "instance_id,<attr1>,..." and 0/1 cells.
AnnotationMatrix load_annotations(const std::string& path);
void save_annotations(const AnnotationMatrix& annotations, const std::string& path);

// CSV "instance_id,f1,...,fD"; D_x inferred from the first data row.
FeatureMatrix load_features(const std::string& path);
void save_features(const FeatureMatrix& features, const std::string& path);

// Per-instance L2 normalisation (zero columns are left untouched).
FeatureMatrix l2_normalized(const FeatureMatrix& features);

// --- splits ----------------------------------------------------------------

// Samples num_novel novel attributes by a Fisher-Yates shuffle seeded by
// (seed, split_index); instances with zero positive novel labels become
// training instances, all others test instances.  Id lists are emitted in
// canonical (lexicographic) order.
DatasetSplit generate_split(const AttributeVocabulary& vocabulary,
                            const AnnotationMatrix& annotations, const SplitConfig& cfg,
                            int split_index);

// Split with an explicitly designated novel set; instances follow the same
// zero-positive-novel-labels rule.  exclude_ids are dropped entirely.
DatasetSplit split_with_novel(const AttributeVocabulary& vocabulary,
                              const AnnotationMatrix& annotations,
                              const std::vector<std::string>& novel_names,
                              std::int64_t seed,
                              const std::vector<std::string>& exclude_ids = {});

// Transfer-style split: designated novel set plus a seeded random instance
// partition (train_fraction in (0,1)).  Used when a designated novel
// attribute would otherwise leave no training instances; known-attribute
// labels of test instances remain hidden from training by the callers.
DatasetSplit transfer_split(const AttributeVocabulary& vocabulary,
                            const AnnotationMatrix& annotations,
                            const std::vector<std::string>& novel_names,
                            double train_fraction, std::int64_t seed,
                            const std::vector<std::string>& exclude_ids = {});

// JSON container: {seed, split_index, known, novel, train_ids, test_ids}.
void save_split(const DatasetSplit& split, const std::string& path);
DatasetSplit load_split(const std::string& path);

// Plain-text helper: one non-empty line per entry (used for id blacklists
// and known-vocabulary listings).
std::vector<std::string> load_name_list(const std::string& path);

}  // namespace ctxzsl

#endif  // CTXZSL_INGEST_HPP_
