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

#include "ctxzsl/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <unordered_set>

#include <json.hpp>

#include "ctxzsl/rng.hpp"

namespace ctxzsl {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open file for reading: " + path);
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + path);
  }
  return out;
}

// Reads a line tolerating a trailing CR (files are written with LF only, but
// inputs may arrive with CRLF).
bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_real(std::string_view text, const std::string& path, std::size_t line_no) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) +
                                       ": unparsable number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) fields.push_back(line.substr(start, i - start));
  }
  return fields;
}

bool parse_size(std::string_view text, std::size_t& out) {
  if (text.empty()) return false;
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return false;
  out = value;
  return true;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    double back = 0.0;
    auto [ptr, ec] = std::from_chars(buf, buf + std::strlen(buf), back);
    (void)ptr;
    if (ec == std::errc() && back == value) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

WordVectorTable load_word_vectors(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;

  // Optional "<count> <dim>" header: exactly two non-negative integer fields.
  std::string first_record;
  std::size_t first_record_line = 0;
  std::size_t dim = 0;
  if (!read_line(in, line)) {
    throw Error(ErrorCode::kParse, path + ": empty word-vector file");
  }
  ++line_no;
  {
    auto fields = split_whitespace(line);
    std::size_t count = 0, header_dim = 0;
    if (fields.size() == 2 && parse_size(fields[0], count) && parse_size(fields[1], header_dim)) {
      if (header_dim == 0) {
        throw Error(ErrorCode::kParse, path + ":1: header dimensionality must be positive");
      }
      dim = header_dim;
    } else {
      first_record = line;
      first_record_line = line_no;
    }
  }

  WordVectorTable* table = nullptr;
  std::unique_ptr<WordVectorTable> holder;
  auto consume = [&](const std::string& record, std::size_t record_line) {
    auto fields = split_whitespace(record);
    if (fields.empty()) return;  // blank line tolerated
    if (fields.size() < 2) {
      throw Error(ErrorCode::kParse,
                  path + ":" + std::to_string(record_line) + ": record has no vector values");
    }
    if (dim == 0) dim = fields.size() - 1;
    if (!holder) {
      holder = std::make_unique<WordVectorTable>(dim);
      table = holder.get();
    }
    if (fields.size() - 1 != dim) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(record_line) +
                                         ": record for '" + std::string(fields[0]) + "' has " +
                                         std::to_string(fields.size() - 1) +
                                         " values, expected " + std::to_string(dim));
    }
    Eigen::VectorXd vec(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 1; k < fields.size(); ++k) {
      vec(static_cast<Eigen::Index>(k - 1)) = parse_real(fields[k], path, record_line);
    }
    try {
      table->insert(std::string(fields[0]), std::move(vec));
    } catch (const Error& e) {
      throw Error(e.code(),
                  path + ":" + std::to_string(record_line) + ": " + e.what());
    }
  };

  if (!first_record.empty()) consume(first_record, first_record_line);
  while (read_line(in, line)) {
    ++line_no;
    consume(line, line_no);
  }
  if (!holder || holder->size() == 0) {
    throw Error(ErrorCode::kParse, path + ": no word-vector records");
  }
  return std::move(*holder);
}

void save_word_vectors(const WordVectorTable& table, const std::string& path) {
  std::ofstream out = open_output(path);
  out << table.size() << ' ' << table.dim() << '\n';
  for (const auto& token : table.tokens()) {
    out << token;
    const Eigen::VectorXd& v = table.vector(token);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out << ' ' << format_real(v(i));
    }
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

std::string normalize_attribute_name(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!out.empty()) pending_space = true;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Eigen::VectorXd embed_attribute(const std::string& name, const WordVectorTable& table) {
  const std::string normalized = normalize_attribute_name(name);
  if (normalized.empty()) {
    throw Error(ErrorCode::kVocabulary, "empty attribute name");
  }
  if (table.contains(normalized)) {
    return table.vector(normalized);
  }
  auto tokens = split_whitespace(normalized);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dim()));
  std::size_t hits = 0;
  for (auto tok : tokens) {
    std::string t(tok);
    if (table.contains(t)) {
      sum += table.vector(t);
      ++hits;
    }
  }
  if (hits == 0) {
    std::string listing;
    for (auto tok : tokens) {
      if (!listing.empty()) listing += ", ";
      listing += std::string(tok);
    }
    throw Error(ErrorCode::kVocabulary,
                "attribute '" + name + "' has no in-vocabulary tokens (" + listing + ")");
  }
  return sum / static_cast<double>(hits);
}

EmbeddedVocabulary embed_vocabulary(const AttributeVocabulary& vocabulary,
                                    const WordVectorTable& table) {
  Eigen::MatrixXd vectors(static_cast<Eigen::Index>(table.dim()),
                          static_cast<Eigen::Index>(vocabulary.size()));
  for (std::size_t p = 0; p < vocabulary.size(); ++p) {
    vectors.col(static_cast<Eigen::Index>(p)) = embed_attribute(vocabulary.name(p), table);
  }
  return EmbeddedVocabulary{vocabulary, std::move(vectors)};
}

AnnotationMatrix load_annotations(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  if (!read_line(in, line)) {
    throw Error(ErrorCode::kParse, path + ": empty annotation file");
  }
  ++line_no;
  auto header = split_fields(line, ',');
  if (header.size() < 2 || header[0] != "instance_id") {
    throw Error(ErrorCode::kParse,
                path + ":1: expected header 'instance_id,<attr1>,...'");
  }
  std::vector<std::string> names;
  names.reserve(header.size() - 1);
  for (std::size_t k = 1; k < header.size(); ++k) names.emplace_back(header[k]);
  AttributeVocabulary vocabulary(std::move(names));

  std::vector<std::string> ids;
  std::vector<std::vector<int>> columns;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_fields(line, ',');
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": row has " +
                                         std::to_string(fields.size()) + " fields, expected " +
                                         std::to_string(header.size()));
    }
    std::vector<int> column(vocabulary.size());
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (fields[k] == "0") {
        column[k - 1] = 0;
      } else if (fields[k] == "1") {
        column[k - 1] = 1;
      } else {
        throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) +
                                           ": non-binary cell '" + std::string(fields[k]) +
                                           "' for attribute " + vocabulary.name(k - 1));
      }
    }
    ids.emplace_back(fields[0]);
    columns.push_back(std::move(column));
  }

  Eigen::MatrixXi cells(static_cast<Eigen::Index>(vocabulary.size()),
                        static_cast<Eigen::Index>(ids.size()));
  for (std::size_t n = 0; n < columns.size(); ++n) {
    for (std::size_t p = 0; p < vocabulary.size(); ++p) {
      cells(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(n)) = columns[n][p];
    }
  }
  try {
    return AnnotationMatrix(std::move(vocabulary), std::move(ids), std::move(cells));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void save_annotations(const AnnotationMatrix& annotations, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "instance_id";
  for (const auto& name : annotations.vocabulary().names()) out << ',' << name;
  out << '\n';
  for (std::size_t n = 0; n < annotations.count(); ++n) {
    out << annotations.id(n);
    for (std::size_t p = 0; p < annotations.num_attributes(); ++p) {
      out << ',' << annotations.cell(p, n);
    }
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

FeatureMatrix load_features(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  if (!read_line(in, line)) {
    throw Error(ErrorCode::kParse, path + ": empty feature file");
  }
  ++line_no;
  auto header = split_fields(line, ',');
  if (header.empty() || header[0] != "instance_id") {
    throw Error(ErrorCode::kParse, path + ":1: expected header 'instance_id,f1,...'");
  }

  std::vector<std::string> ids;
  std::vector<std::vector<double>> columns;
  std::size_t dim = 0;
  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_fields(line, ',');
    if (fields.size() < 2) {
      throw Error(ErrorCode::kParse,
                  path + ":" + std::to_string(line_no) + ": row has no feature values");
    }
    if (dim == 0) dim = fields.size() - 1;
    if (fields.size() - 1 != dim) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": row has " +
                                         std::to_string(fields.size() - 1) +
                                         " features, expected " + std::to_string(dim));
    }
    std::vector<double> column(dim);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      column[k - 1] = parse_real(fields[k], path, line_no);
    }
    ids.emplace_back(fields[0]);
    columns.push_back(std::move(column));
  }
  if (ids.empty()) {
    throw Error(ErrorCode::kParse, path + ": no feature rows");
  }

  Eigen::MatrixXd data(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t n = 0; n < columns.size(); ++n) {
    for (std::size_t d = 0; d < dim; ++d) {
      data(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n)) = columns[n][d];
    }
  }
  try {
    return FeatureMatrix(std::move(ids), std::move(data));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void save_features(const FeatureMatrix& features, const std::string& path) {
  std::ofstream out = open_output(path);
  out << "instance_id";
  for (std::size_t d = 0; d < features.dim(); ++d) out << ",f" << d;
  out << '\n';
  for (std::size_t n = 0; n < features.count(); ++n) {
    out << features.id(n);
    for (std::size_t d = 0; d < features.dim(); ++d) {
      out << ',' << format_real(features.data()(static_cast<Eigen::Index>(d),
                                                static_cast<Eigen::Index>(n)));
    }
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

FeatureMatrix l2_normalized(const FeatureMatrix& features) {
  Eigen::MatrixXd data = features.data();
  for (Eigen::Index n = 0; n < data.cols(); ++n) {
    double norm = data.col(n).norm();
    if (norm > 0.0) data.col(n) /= norm;
  }
  return FeatureMatrix(features.ids(), std::move(data));
}

namespace {

// Partitions instances by the zero-positive-novel-labels rule and returns the
// split with id lists in canonical (lexicographic) order.
DatasetSplit split_by_label_rule(const AttributeVocabulary& vocabulary,
                                 const AnnotationMatrix& annotations,
                                 const std::vector<bool>& is_novel, std::int64_t seed,
                                 int split_index,
                                 const std::unordered_set<std::string>& excluded) {
  std::vector<std::string> known_names, novel_names;
  std::vector<std::size_t> novel_rows;
  for (std::size_t p = 0; p < vocabulary.size(); ++p) {
    if (is_novel[p]) {
      novel_names.push_back(vocabulary.name(p));
      novel_rows.push_back(annotations.vocabulary().index_of(vocabulary.name(p)));
    } else {
      known_names.push_back(vocabulary.name(p));
    }
  }

  std::vector<std::string> train_ids, test_ids;
  for (std::size_t n = 0; n < annotations.count(); ++n) {
    if (excluded.count(annotations.id(n)) > 0) continue;
    bool any_novel = false;
    for (std::size_t row : novel_rows) {
      if (annotations.cell(row, n) == 1) {
        any_novel = true;
        break;
      }
    }
    (any_novel ? test_ids : train_ids).push_back(annotations.id(n));
  }
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());
  return DatasetSplit(AttributeVocabulary(std::move(known_names)),
                      AttributeVocabulary(std::move(novel_names)), std::move(train_ids),
                      std::move(test_ids), seed, split_index);
}

void check_vocabulary_consistency(const AttributeVocabulary& vocabulary,
                                  const AnnotationMatrix& annotations) {
  for (const auto& name : vocabulary.names()) {
    if (!annotations.vocabulary().contains(name)) {
      throw Error(ErrorCode::kVocabulary,
                  "attribute not present in annotations: " + name);
    }
  }
}

std::unordered_set<std::string> make_exclusion_set(const std::vector<std::string>& ids) {
  return std::unordered_set<std::string>(ids.begin(), ids.end());
}

}  // namespace

DatasetSplit generate_split(const AttributeVocabulary& vocabulary,
                            const AnnotationMatrix& annotations, const SplitConfig& cfg,
                            int split_index) {
  if (cfg.num_novel <= 0 || cfg.num_splits < 1) {
    throw Error(ErrorCode::kConfig, "split config requires num_novel > 0 and num_splits >= 1");
  }
  if (static_cast<std::size_t>(cfg.num_novel) >= vocabulary.size()) {
    throw Error(ErrorCode::kConfig,
                "num_novel (" + std::to_string(cfg.num_novel) +
                    ") must be smaller than the vocabulary (" +
                    std::to_string(vocabulary.size()) + ")");
  }
  if (split_index < 0 || split_index >= cfg.num_splits) {
    throw Error(ErrorCode::kConfig, "split_index " + std::to_string(split_index) +
                                        " outside [0, " + std::to_string(cfg.num_splits) + ")");
  }
  check_vocabulary_consistency(vocabulary, annotations);

  rng::Rng rng(rng::mix_seed(static_cast<std::uint64_t>(cfg.seed),
                             static_cast<std::uint64_t>(split_index)));
  std::vector<std::size_t> order(vocabulary.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<bool> is_novel(vocabulary.size(), false);
  for (int k = 0; k < cfg.num_novel; ++k) is_novel[order[static_cast<std::size_t>(k)]] = true;
  return split_by_label_rule(vocabulary, annotations, is_novel, cfg.seed, split_index, {});
}

DatasetSplit split_with_novel(const AttributeVocabulary& vocabulary,
                              const AnnotationMatrix& annotations,
                              const std::vector<std::string>& novel_names, std::int64_t seed,
                              const std::vector<std::string>& exclude_ids) {
  if (novel_names.empty()) {
    throw Error(ErrorCode::kConfig, "novel attribute list is empty");
  }
  if (novel_names.size() >= vocabulary.size()) {
    throw Error(ErrorCode::kConfig, "novel set must be smaller than the vocabulary");
  }
  check_vocabulary_consistency(vocabulary, annotations);
  std::vector<bool> is_novel(vocabulary.size(), false);
  for (const auto& name : novel_names) {
    std::size_t p = vocabulary.index_of(name);
    if (is_novel[p]) {
      throw Error(ErrorCode::kConfig, "novel attribute listed twice: " + name);
    }
    is_novel[p] = true;
  }
  return split_by_label_rule(vocabulary, annotations, is_novel, seed, 0,
                             make_exclusion_set(exclude_ids));
}

DatasetSplit transfer_split(const AttributeVocabulary& vocabulary,
                            const AnnotationMatrix& annotations,
                            const std::vector<std::string>& novel_names,
                            double train_fraction, std::int64_t seed,
                            const std::vector<std::string>& exclude_ids) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorCode::kConfig, "train fraction must lie strictly between 0 and 1");
  }
  if (novel_names.empty()) {
    throw Error(ErrorCode::kConfig, "novel attribute list is empty");
  }
  if (novel_names.size() >= vocabulary.size()) {
    throw Error(ErrorCode::kConfig, "novel set must be smaller than the vocabulary");
  }
  check_vocabulary_consistency(vocabulary, annotations);

  std::vector<bool> is_novel(vocabulary.size(), false);
  std::vector<std::string> known_names, novel_list;
  for (const auto& name : novel_names) {
    std::size_t p = vocabulary.index_of(name);
    if (is_novel[p]) {
      throw Error(ErrorCode::kConfig, "novel attribute listed twice: " + name);
    }
    is_novel[p] = true;
  }
  for (std::size_t p = 0; p < vocabulary.size(); ++p) {
    (is_novel[p] ? novel_list : known_names).push_back(vocabulary.name(p));
  }

  auto excluded = make_exclusion_set(exclude_ids);
  std::vector<std::string> pool;
  for (std::size_t n = 0; n < annotations.count(); ++n) {
    if (excluded.count(annotations.id(n)) == 0) pool.push_back(annotations.id(n));
  }
  std::sort(pool.begin(), pool.end());
  if (pool.size() < 2) {
    throw Error(ErrorCode::kDegenerate, "too few instances for a transfer split");
  }

  rng::Rng rng(rng::mix_seed(static_cast<std::uint64_t>(seed), 0x7472616e73666572ULL));
  rng.shuffle(pool);
  std::size_t train_count = static_cast<std::size_t>(
      train_fraction * static_cast<double>(pool.size()));
  train_count = std::max<std::size_t>(1, std::min(train_count, pool.size() - 1));
  std::vector<std::string> train_ids(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(train_count));
  std::vector<std::string> test_ids(pool.begin() + static_cast<std::ptrdiff_t>(train_count), pool.end());
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());
  return DatasetSplit(AttributeVocabulary(std::move(known_names)),
                      AttributeVocabulary(std::move(novel_list)), std::move(train_ids),
                      std::move(test_ids), seed, 0);
}

void save_split(const DatasetSplit& split, const std::string& path) {
  nlohmann::json j;
  j["seed"] = split.seed();
  j["split_index"] = split.split_index();
  j["known"] = split.known().names();
  j["novel"] = split.novel().names();
  j["train_ids"] = split.train_ids();
  j["test_ids"] = split.test_ids();
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

DatasetSplit load_split(const std::string& path) {
  std::ifstream in = open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid split JSON: " + e.what());
  }
  try {
    return DatasetSplit(AttributeVocabulary(j.at("known").get<std::vector<std::string>>()),
                        AttributeVocabulary(j.at("novel").get<std::vector<std::string>>()),
                        j.at("train_ids").get<std::vector<std::string>>(),
                        j.at("test_ids").get<std::vector<std::string>>(),
                        j.at("seed").get<std::int64_t>(), j.at("split_index").get<int>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path + ": invalid split JSON: " + e.what());
  }
}

std::vector<std::string> load_name_list(const std::string& path) {
  std::ifstream in = open_input(path);
  std::vector<std::string> names;
  std::string line;
  while (read_line(in, line)) {
    // Trim outer whitespace; blank lines are skipped.
    std::size_t b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t e = line.find_last_not_of(" \t");
    names.push_back(line.substr(b, e - b + 1));
  }
  return names;
}

}  // namespace ctxzsl
