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

#ifndef CTXZSL_CORE_HPP_
#define CTXZSL_CORE_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace ctxzsl {

// Error codes shared with the C API (see ctxzsl.h).  Every failure raised by
// the library is an Error carrying one of these codes plus a human-readable
// message; the CLI prints "<CODE_NAME>: <message>" and exits with the code.
enum class ErrorCode : int {
  kIo = 1,          // file missing / unreadable / unwritable
  kParse = 2,       // malformed input file (message carries line number)
  kConfig = 3,      // invalid configuration or parameter value
  kDimension = 4,   // shape mismatch between objects
  kVocabulary = 5,  // unknown / mismatched attribute names or instance ids
  kDegenerate = 6,  // degenerate data (single-class attribute, empty split)
  kNumeric = 7,     // non-finite values, divergence, singular systems
  kUnsupported = 8, // request outside supported limits (e.g. power set size)
  kInternal = 9,    // invariant violation inside the library
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Ordered set of unique, non-empty attribute names with O(1) lookup.
class AttributeVocabulary {
 public:
  AttributeVocabulary() = default;
  explicit AttributeVocabulary(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  bool contains(std::string_view name) const;
  // Throws ErrorCode::kVocabulary when absent.
  std::size_t index_of(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// token -> dense vector map; all vectors share one dimensionality.
// Insertion order is preserved so a table round-trips through its file form.
class WordVectorTable {
 public:
  explicit WordVectorTable(std::size_t dim);

  void insert(const std::string& token, Eigen::VectorXd vec);
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return order_.size(); }
  bool contains(const std::string& token) const;
  const Eigen::VectorXd& vector(const std::string& token) const;
  const std::vector<std::string>& tokens() const { return order_; }

 private:
  std::size_t dim_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, Eigen::VectorXd> entries_;
};

// Dense per-instance feature columns: data() is D_x x N, one column per
// instance id.  Ids are unique; column order defines instance order.
class FeatureMatrix {
 public:
  FeatureMatrix(std::vector<std::string> ids, Eigen::MatrixXd columns);

  std::size_t dim() const { return static_cast<std::size_t>(data_.rows()); }
  std::size_t count() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const Eigen::MatrixXd& data() const { return data_; }
  Eigen::VectorXd column(std::size_t i) const { return data_.col(static_cast<Eigen::Index>(i)); }
  std::optional<std::size_t> find(std::string_view id) const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> id_index_;
  Eigen::MatrixXd data_;  // D_x x N
};

// Binary attribute labels: cells() is P x N over a vocabulary (rows) and
// instance ids (columns); every cell is 0 or 1.
class AnnotationMatrix {
 public:
  AnnotationMatrix(AttributeVocabulary vocabulary, std::vector<std::string> ids,
                   Eigen::MatrixXi cells);

  const AttributeVocabulary& vocabulary() const { return vocabulary_; }
  std::size_t num_attributes() const { return vocabulary_.size(); }
  std::size_t count() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(std::size_t i) const { return ids_.at(i); }
  const Eigen::MatrixXi& cells() const { return cells_; }
  int cell(std::size_t attribute, std::size_t instance) const {
    return cells_(static_cast<Eigen::Index>(attribute), static_cast<Eigen::Index>(instance));
  }
  std::optional<std::size_t> find(std::string_view id) const;

  // Copy restricted to a subset of attributes (vocabulary order given) and/or
  // instance ids; every requested name/id must exist.
  AnnotationMatrix restrict(const AttributeVocabulary& attributes,
                            const std::vector<std::string>& instance_ids) const;

 private:
  AttributeVocabulary vocabulary_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> id_index_;
  Eigen::MatrixXi cells_;  // P x N
};

// Disjoint known/novel attribute sets plus a train/test instance partition.
class DatasetSplit {
 public:
  DatasetSplit(AttributeVocabulary known, AttributeVocabulary novel,
               std::vector<std::string> train_ids, std::vector<std::string> test_ids,
               std::int64_t seed, int split_index);

  const AttributeVocabulary& known() const { return known_; }
  const AttributeVocabulary& novel() const { return novel_; }
  const std::vector<std::string>& train_ids() const { return train_ids_; }
  const std::vector<std::string>& test_ids() const { return test_ids_; }
  std::int64_t seed() const { return seed_; }
  int split_index() const { return split_index_; }

 private:
  AttributeVocabulary known_;
  AttributeVocabulary novel_;
  std::vector<std::string> train_ids_;
  std::vector<std::string> test_ids_;
  std::int64_t seed_;
  int split_index_;
};

// Row-stochastic novel-by-known conditional p(novel q | known p).
// Construction rejects matrices whose rows do not sum to 1 within 1e-9 or
// whose entries leave [0, 1].
class ConditionalMatrix {
 public:
  ConditionalMatrix(AttributeVocabulary novel, AttributeVocabulary known,
                    Eigen::MatrixXd probabilities);

  const AttributeVocabulary& novel() const { return novel_; }
  const AttributeVocabulary& known() const { return known_; }
  const Eigen::MatrixXd& probabilities() const { return probabilities_; }
  Eigen::VectorXd row(std::size_t q) const {
    return probabilities_.row(static_cast<Eigen::Index>(q));
  }

  static constexpr double kRowSumTolerance = 1e-9;

 private:
  AttributeVocabulary novel_;
  AttributeVocabulary known_;
  Eigen::MatrixXd probabilities_;  // Q x P
};

// Real-valued attribute-by-instance scores; all entries must be finite.
class ScoreMatrix {
 public:
  ScoreMatrix(AttributeVocabulary vocabulary, std::vector<std::string> ids,
              Eigen::MatrixXd scores);

  const AttributeVocabulary& vocabulary() const { return vocabulary_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const Eigen::MatrixXd& scores() const { return scores_; }
  std::size_t num_attributes() const { return vocabulary_.size(); }
  std::size_t count() const { return ids_.size(); }

 private:
  AttributeVocabulary vocabulary_;
  std::vector<std::string> ids_;
  Eigen::MatrixXd scores_;  // A x N
};

struct AlignedData {
  FeatureMatrix features;
  AnnotationMatrix annotations;
};

// Reorders both objects onto their common instance ids in canonical
// (lexicographic) order.  Errors when an id is present on one side only,
// naming the first absent id, or when the intersection is empty.
// Idempotent: applying it to its own output is the identity.
AlignedData validate_aligned(const FeatureMatrix& features,
                             const AnnotationMatrix& annotations);

}  // namespace ctxzsl

#endif  // CTXZSL_CORE_HPP_
