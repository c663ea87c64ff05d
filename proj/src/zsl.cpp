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

#include "ctxzsl/zsl.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "ctxzsl/ingest.hpp"

namespace ctxzsl {

namespace {

constexpr double kSimplexTolerance = 1e-6;

}  // namespace

ScoreMatrix marginal_predict(const ScoreMatrix& known_scores,
                             const ConditionalMatrix& conditional) {
  if (known_scores.vocabulary().names() != conditional.known().names()) {
    throw Error(ErrorCode::kVocabulary,
                "known-score vocabulary does not match the conditional's known vocabulary");
  }
  const Eigen::MatrixXd& probs = known_scores.scores();
  for (Eigen::Index n = 0; n < probs.cols(); ++n) {
    double sum = 0.0;
    for (Eigen::Index p = 0; p < probs.rows(); ++p) {
      if (probs(p, n) < -kSimplexTolerance) {
        throw Error(ErrorCode::kNumeric,
                    "known scores are not simplex points (negative entry for instance " +
                        known_scores.ids().at(static_cast<std::size_t>(n)) + ")");
      }
      sum += probs(p, n);
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      throw Error(ErrorCode::kNumeric,
                  "known scores are not simplex points (column sum " + std::to_string(sum) +
                      " for instance " + known_scores.ids().at(static_cast<std::size_t>(n)) + ")");
    }
  }
  Eigen::MatrixXd novel_scores = conditional.probabilities() * probs;
  // Convex combinations of [0,1] values; clip away round-off spill only.
  novel_scores = novel_scores.cwiseMax(0.0).cwiseMin(1.0);
  return ScoreMatrix(conditional.novel(), known_scores.ids(), std::move(novel_scores));
}

std::vector<std::pair<std::string, double>> explain_novel(
    const std::string& novel_name, const ConditionalMatrix& conditional) {
  const std::size_t q = conditional.novel().index_of(novel_name);
  std::vector<std::pair<std::string, double>> ranked;
  ranked.reserve(conditional.known().size());
  for (std::size_t p = 0; p < conditional.known().size(); ++p) {
    ranked.emplace_back(conditional.known().name(p),
                        conditional.probabilities()(static_cast<Eigen::Index>(q),
                                                    static_cast<Eigen::Index>(p)));
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

void save_scores(const ScoreMatrix& scores, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::kIo, "cannot open file for writing: " + path);
  }
  out << "instance_id";
  for (const auto& name : scores.vocabulary().names()) out << ',' << name;
  out << '\n';
  for (std::size_t n = 0; n < scores.count(); ++n) {
    out << scores.ids()[n];
    for (std::size_t a = 0; a < scores.num_attributes(); ++a) {
      out << ',' << format_real(scores.scores()(static_cast<Eigen::Index>(a),
                                                static_cast<Eigen::Index>(n)));
    }
    out << '\n';
  }
  if (!out) {
    throw Error(ErrorCode::kIo, "write failed: " + path);
  }
}

ScoreMatrix load_scores(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open file for reading: " + path);
  }
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&](std::string& out_line) {
    if (!std::getline(in, out_line)) return false;
    if (!out_line.empty() && out_line.back() == '\r') out_line.pop_back();
    ++line_no;
    return true;
  };
  if (!next_line(line)) {
    throw Error(ErrorCode::kParse, path + ": empty score file");
  }
  std::vector<std::string> names;
  {
    std::size_t start = 0;
    std::vector<std::string> fields;
    while (true) {
      std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() < 2 || fields[0] != "instance_id") {
      throw Error(ErrorCode::kParse, path + ":1: expected header 'instance_id,<attr1>,...'");
    }
    names.assign(fields.begin() + 1, fields.end());
  }
  AttributeVocabulary vocabulary(names);

  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  while (next_line(line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != names.size() + 1) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": row has " +
                                         std::to_string(fields.size()) + " fields, expected " +
                                         std::to_string(names.size() + 1));
    }
    std::vector<double> row(names.size());
    for (std::size_t k = 1; k < fields.size(); ++k) {
      double value = 0.0;
      const char* first = fields[k].data();
      const char* last = first + fields[k].size();
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last) {
        throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) +
                                           ": unparsable number '" + fields[k] + "'");
      }
      row[k - 1] = value;
    }
    ids.push_back(fields[0]);
    rows.push_back(std::move(row));
  }
  if (ids.empty()) {
    throw Error(ErrorCode::kParse, path + ": no score rows");
  }
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(vocabulary.size()),
                         static_cast<Eigen::Index>(ids.size()));
  for (std::size_t n = 0; n < rows.size(); ++n) {
    for (std::size_t a = 0; a < vocabulary.size(); ++a) {
      scores(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(n)) = rows[n][a];
    }
  }
  try {
    return ScoreMatrix(std::move(vocabulary), std::move(ids), std::move(scores));
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace ctxzsl
