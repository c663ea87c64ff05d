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

#include "ctxzsl/core.hpp"

#include <algorithm>
#include <cmath>

namespace ctxzsl {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "CTXZSL_ERR_IO";
    case ErrorCode::kParse: return "CTXZSL_ERR_PARSE";
    case ErrorCode::kConfig: return "CTXZSL_ERR_CONFIG";
    case ErrorCode::kDimension: return "CTXZSL_ERR_DIMENSION";
    case ErrorCode::kVocabulary: return "CTXZSL_ERR_VOCABULARY";
    case ErrorCode::kDegenerate: return "CTXZSL_ERR_DEGENERATE";
    case ErrorCode::kNumeric: return "CTXZSL_ERR_NUMERIC";
    case ErrorCode::kUnsupported: return "CTXZSL_ERR_UNSUPPORTED";
    case ErrorCode::kInternal: return "CTXZSL_ERR_INTERNAL";
  }
  return "CTXZSL_ERR_INTERNAL";
}

AttributeVocabulary::AttributeVocabulary(std::vector<std::string> names)
    : names_(std::move(names)) {
  index_.reserve(names_.size());
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) {
      throw Error(ErrorCode::kVocabulary,
                  "empty attribute name at position " + std::to_string(i));
    }
    auto [it, inserted] = index_.emplace(names_[i], i);
    (void)it;
    if (!inserted) {
      throw Error(ErrorCode::kVocabulary, "duplicate attribute name: " + names_[i]);
    }
  }
}

bool AttributeVocabulary::contains(std::string_view name) const {
  return index_.find(std::string(name)) != index_.end();
}

std::size_t AttributeVocabulary::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) {
    throw Error(ErrorCode::kVocabulary, "unknown attribute: " + std::string(name));
  }
  return it->second;
}

std::optional<std::size_t> AttributeVocabulary::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordVectorTable::WordVectorTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) {
    throw Error(ErrorCode::kConfig, "word-vector dimensionality must be positive");
  }
}

void WordVectorTable::insert(const std::string& token, Eigen::VectorXd vec) {
  if (token.empty()) {
    throw Error(ErrorCode::kVocabulary, "empty word-vector token");
  }
  if (static_cast<std::size_t>(vec.size()) != dim_) {
    throw Error(ErrorCode::kDimension,
                "vector for token '" + token + "' has length " +
                    std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
  }
  auto [it, inserted] = entries_.emplace(token, std::move(vec));
  (void)it;
  if (!inserted) {
    throw Error(ErrorCode::kVocabulary, "duplicate token: " + token);
  }
  order_.push_back(token);
}

bool WordVectorTable::contains(const std::string& token) const {
  return entries_.find(token) != entries_.end();
}

const Eigen::VectorXd& WordVectorTable::vector(const std::string& token) const {
  auto it = entries_.find(token);
  if (it == entries_.end()) {
    throw Error(ErrorCode::kVocabulary, "token not in table: " + token);
  }
  return it->second;
}

namespace {

std::unordered_map<std::string, std::size_t> build_id_index(
    const std::vector<std::string>& ids, const char* what) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i].empty()) {
      throw Error(ErrorCode::kVocabulary,
                  std::string("empty instance id in ") + what);
    }
    auto [it, inserted] = index.emplace(ids[i], i);
    (void)it;
    if (!inserted) {
      throw Error(ErrorCode::kVocabulary,
                  std::string("duplicate instance id in ") + what + ": " + ids[i]);
    }
  }
  return index;
}

}  // namespace

FeatureMatrix::FeatureMatrix(std::vector<std::string> ids, Eigen::MatrixXd columns)
    : ids_(std::move(ids)), data_(std::move(columns)) {
  if (static_cast<std::size_t>(data_.cols()) != ids_.size()) {
    throw Error(ErrorCode::kDimension,
                "feature matrix has " + std::to_string(data_.cols()) +
                    " columns for " + std::to_string(ids_.size()) + " instance ids");
  }
  if (data_.rows() == 0) {
    throw Error(ErrorCode::kDimension, "feature matrix has zero dimensionality");
  }
  if (!data_.allFinite()) {
    throw Error(ErrorCode::kNumeric, "feature matrix contains non-finite values");
  }
  id_index_ = build_id_index(ids_, "features");
}

std::optional<std::size_t> FeatureMatrix::find(std::string_view id) const {
  auto it = id_index_.find(std::string(id));
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

AnnotationMatrix::AnnotationMatrix(AttributeVocabulary vocabulary,
                                   std::vector<std::string> ids, Eigen::MatrixXi cells)
    : vocabulary_(std::move(vocabulary)), ids_(std::move(ids)), cells_(std::move(cells)) {
  if (static_cast<std::size_t>(cells_.rows()) != vocabulary_.size()) {
    throw Error(ErrorCode::kDimension,
                "annotation matrix has " + std::to_string(cells_.rows()) +
                    " rows for " + std::to_string(vocabulary_.size()) + " attributes");
  }
  if (static_cast<std::size_t>(cells_.cols()) != ids_.size()) {
    throw Error(ErrorCode::kDimension,
                "annotation matrix has " + std::to_string(cells_.cols()) +
                    " columns for " + std::to_string(ids_.size()) + " instance ids");
  }
  for (Eigen::Index p = 0; p < cells_.rows(); ++p) {
    for (Eigen::Index n = 0; n < cells_.cols(); ++n) {
      int v = cells_(p, n);
      if (v != 0 && v != 1) {
        throw Error(ErrorCode::kParse,
                    "annotation cell (" + vocabulary_.name(static_cast<std::size_t>(p)) +
                        ", " + ids_.at(static_cast<std::size_t>(n)) + ") is " +
                        std::to_string(v) + ", expected 0 or 1");
      }
    }
  }
  id_index_ = build_id_index(ids_, "annotations");
}

std::optional<std::size_t> AnnotationMatrix::find(std::string_view id) const {
  auto it = id_index_.find(std::string(id));
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

AnnotationMatrix AnnotationMatrix::restrict(
    const AttributeVocabulary& attributes,
    const std::vector<std::string>& instance_ids) const {
  Eigen::MatrixXi sub(static_cast<Eigen::Index>(attributes.size()),
                      static_cast<Eigen::Index>(instance_ids.size()));
  std::vector<std::size_t> rows(attributes.size());
  for (std::size_t p = 0; p < attributes.size(); ++p) {
    rows[p] = vocabulary_.index_of(attributes.name(p));
  }
  for (std::size_t n = 0; n < instance_ids.size(); ++n) {
    auto col = find(instance_ids[n]);
    if (!col) {
      throw Error(ErrorCode::kVocabulary,
                  "instance id not in annotations: " + instance_ids[n]);
    }
    for (std::size_t p = 0; p < attributes.size(); ++p) {
      sub(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n)) =
          cells_(static_cast<Eigen::Index>(rows[p]), static_cast<Eigen::Index>(*col));
    }
  }
  return AnnotationMatrix(attributes, instance_ids, std::move(sub));
}

DatasetSplit::DatasetSplit(AttributeVocabulary known, AttributeVocabulary novel,
                           std::vector<std::string> train_ids,
                           std::vector<std::string> test_ids, std::int64_t seed,
                           int split_index)
    : known_(std::move(known)),
      novel_(std::move(novel)),
      train_ids_(std::move(train_ids)),
      test_ids_(std::move(test_ids)),
      seed_(seed),
      split_index_(split_index) {
  for (const auto& name : novel_.names()) {
    if (known_.contains(name)) {
      throw Error(ErrorCode::kVocabulary,
                  "attribute in both known and novel sets: " + name);
    }
  }
  build_id_index(train_ids_, "train ids");
  auto test_index = build_id_index(test_ids_, "test ids");
  for (const auto& id : train_ids_) {
    if (test_index.find(id) != test_index.end()) {
      throw Error(ErrorCode::kVocabulary,
                  "instance id in both train and test sets: " + id);
    }
  }
}

ConditionalMatrix::ConditionalMatrix(AttributeVocabulary novel, AttributeVocabulary known,
                                     Eigen::MatrixXd probabilities)
    : novel_(std::move(novel)), known_(std::move(known)),
      probabilities_(std::move(probabilities)) {
  if (static_cast<std::size_t>(probabilities_.rows()) != novel_.size() ||
      static_cast<std::size_t>(probabilities_.cols()) != known_.size()) {
    throw Error(ErrorCode::kDimension,
                "conditional matrix is " + std::to_string(probabilities_.rows()) + "x" +
                    std::to_string(probabilities_.cols()) + ", expected " +
                    std::to_string(novel_.size()) + "x" + std::to_string(known_.size()));
  }
  if (!probabilities_.allFinite()) {
    throw Error(ErrorCode::kNumeric, "conditional matrix contains non-finite values");
  }
  for (Eigen::Index q = 0; q < probabilities_.rows(); ++q) {
    double row_sum = 0.0;
    for (Eigen::Index p = 0; p < probabilities_.cols(); ++p) {
      double v = probabilities_(q, p);
      if (v < 0.0 || v > 1.0) {
        throw Error(ErrorCode::kNumeric,
                    "conditional probability out of [0,1] for novel attribute " +
                        novel_.name(static_cast<std::size_t>(q)));
      }
      row_sum += v;
    }
    if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
      throw Error(ErrorCode::kNumeric,
                  "conditional row for " + novel_.name(static_cast<std::size_t>(q)) +
                      " sums to " + std::to_string(row_sum) + ", expected 1");
    }
  }
}

ScoreMatrix::ScoreMatrix(AttributeVocabulary vocabulary, std::vector<std::string> ids,
                         Eigen::MatrixXd scores)
    : vocabulary_(std::move(vocabulary)), ids_(std::move(ids)), scores_(std::move(scores)) {
  if (static_cast<std::size_t>(scores_.rows()) != vocabulary_.size() ||
      static_cast<std::size_t>(scores_.cols()) != ids_.size()) {
    throw Error(ErrorCode::kDimension,
                "score matrix is " + std::to_string(scores_.rows()) + "x" +
                    std::to_string(scores_.cols()) + ", expected " +
                    std::to_string(vocabulary_.size()) + "x" + std::to_string(ids_.size()));
  }
  if (!scores_.allFinite()) {
    throw Error(ErrorCode::kNumeric, "score matrix contains non-finite values");
  }
  build_id_index(ids_, "scores");
}

AlignedData validate_aligned(const FeatureMatrix& features,
                             const AnnotationMatrix& annotations) {
  std::vector<std::string> common = features.ids();
  std::sort(common.begin(), common.end());
  for (const auto& id : common) {
    if (!annotations.find(id)) {
      throw Error(ErrorCode::kVocabulary, "instance id missing from annotations: " + id);
    }
  }
  std::vector<std::string> ann_ids = annotations.ids();
  std::sort(ann_ids.begin(), ann_ids.end());
  for (const auto& id : ann_ids) {
    if (!features.find(id)) {
      throw Error(ErrorCode::kVocabulary, "instance id missing from features: " + id);
    }
  }
  if (common.empty()) {
    throw Error(ErrorCode::kVocabulary, "no instance ids shared between features and annotations");
  }

  Eigen::MatrixXd fx(static_cast<Eigen::Index>(features.dim()),
                     static_cast<Eigen::Index>(common.size()));
  Eigen::MatrixXi an(static_cast<Eigen::Index>(annotations.num_attributes()),
                     static_cast<Eigen::Index>(common.size()));
  for (std::size_t n = 0; n < common.size(); ++n) {
    fx.col(static_cast<Eigen::Index>(n)) =
        features.data().col(static_cast<Eigen::Index>(*features.find(common[n])));
    an.col(static_cast<Eigen::Index>(n)) =
        annotations.cells().col(static_cast<Eigen::Index>(*annotations.find(common[n])));
  }
  return AlignedData{FeatureMatrix(common, std::move(fx)),
                     AnnotationMatrix(annotations.vocabulary(), common, std::move(an))};
}

}  // namespace ctxzsl
