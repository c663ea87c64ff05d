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

#ifndef CTXZSL_ZSL_HPP_
#define CTXZSL_ZSL_HPP_

#include <string>
#include <utility>
#include <vector>

#include "ctxzsl/core.hpp"

namespace ctxzsl {

// Marginalises known-attribute confidences through the known -> novel
// conditional:  score(q, n) = sum_p cond(q, p) * known_scores(p, n).
// known_scores columns must be probability simplex points and the score
// vocabulary must equal the conditional's known vocabulary.
ScoreMatrix marginal_predict(const ScoreMatrix& known_scores,
                             const ConditionalMatrix& conditional);

// Conditional row for one novel attribute as (known name, probability)
// pairs sorted by descending probability; ties break by ascending name.
std::vector<std::pair<std::string, double>> explain_novel(
    const std::string& novel_name, const ConditionalMatrix& conditional);

// Score CSV: header "instance_id,<attr1>,...", one row per instance, reals
// as shortest round-trip decimal text.
void save_scores(const ScoreMatrix& scores, const std::string& path);
ScoreMatrix load_scores(const std::string& path);

}  // namespace ctxzsl

#endif  // CTXZSL_ZSL_HPP_
