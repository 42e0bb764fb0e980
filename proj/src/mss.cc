// Copyright 2026 The FIM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fim/mss.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fim {

const std::vector<ViewKey>& all_views() {
  static const std::vector<ViewKey> views = {
      ViewKey::kAuthor, ViewKey::kBrand, ViewKey::kCategory, ViewKey::kPrice};
  return views;
}

const char* view_name(ViewKey view) {
  switch (view) {
    case ViewKey::kAuthor: return "author";
    case ViewKey::kBrand: return "brand";
    case ViewKey::kCategory: return "category";
    case ViewKey::kPrice: return "price";
  }
  return "?";
}

bool parse_view(const std::string& name, ViewKey* out) {
  for (ViewKey v : all_views()) {
    if (name == view_name(v)) {
      *out = v;
      return true;
    }
  }
  return false;
}

int score_hard(const InteractionRecord& item, const InteractionRecord& target,
               ViewKey view, const PriceBucketizer& buckets) {
  switch (view) {
    case ViewKey::kAuthor:
      return item.author_id == target.author_id ? 1 : 0;
    case ViewKey::kBrand:
      return item.brand == target.brand ? 1 : 0;
    case ViewKey::kCategory:
      return item.category == target.category ? 1 : 0;
    case ViewKey::kPrice:
      return buckets.bucket(item.price) == buckets.bucket(target.price) ? 1
                                                                        : 0;
  }
  return 0;
}

double score_soft(const Tensor& e_i, const Tensor& e_t, const Tensor& wb,
                  const Tensor& wt) {
  if (e_i.rank() != 1 || e_t.rank() != 1 || wb.rank() != 2 || wt.rank() != 2) {
    throw std::invalid_argument("score_soft: bad ranks");
  }
  if (wb.rows() != e_i.dim(0) || wt.rows() != e_t.dim(0) ||
      wb.cols() != wt.cols()) {
    throw std::invalid_argument("score_soft: projected dimensions differ");
  }
  const int p = wb.cols();
  double score = 0.0;
  for (int j = 0; j < p; ++j) {
    double a = 0.0, b = 0.0;
    for (int i = 0; i < wb.rows(); ++i) a += e_i.at(i) * wb.at(i, j);
    for (int i = 0; i < wt.rows(); ++i) b += e_t.at(i) * wt.at(i, j);
    score += a * b;
  }
  return score;
}

ViewSelection topk_select(ViewKey view, const std::vector<double>& scores,
                          const std::vector<bool>& valid, int k,
                          SearchMode mode) {
  if (k < 1) throw std::invalid_argument("topk_select: k must be >= 1");
  if (scores.size() != valid.size()) {
    throw std::invalid_argument("topk_select: scores/valid length mismatch");
  }
  std::vector<int> candidates;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!valid[i]) continue;
    if (mode == SearchMode::kHard && scores[i] != 1.0) continue;
    candidates.push_back(static_cast<int>(i));
  }
  bool any_valid = false;
  for (bool v : valid) any_valid = any_valid || v;
  if (!any_valid) {
    throw std::invalid_argument("topk_select: empty sequence after masking");
  }
  // Highest score first; equal scores prefer the later position.
  std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    if (scores[static_cast<size_t>(a)] != scores[static_cast<size_t>(b)]) {
      return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    }
    return a > b;
  });
  if (static_cast<int>(candidates.size()) > k) candidates.resize(static_cast<size_t>(k));
  std::sort(candidates.begin(), candidates.end());
  ViewSelection sel;
  sel.view = view;
  sel.indices = std::move(candidates);
  sel.scores.reserve(sel.indices.size());
  for (int i : sel.indices) sel.scores.push_back(scores[static_cast<size_t>(i)]);
  return sel;
}

Tape::Id target_attention(Tape& tape, Tape::Id query, Tape::Id keys,
                          AttnScoring scoring, const AttentionParams& params) {
  const Tensor& k = tape.value(keys);
  if (k.rank() != 2) {
    throw std::invalid_argument("target_attention: keys must be rank 2");
  }
  const int n_keys = k.rows();
  const int d = k.cols();
  if (tape.value(query).dim(0) != d) {
    throw std::invalid_argument("target_attention: query dim mismatch");
  }
  Tape::Id scores;
  if (scoring == AttnScoring::kDot) {
    Tape::Id scaled = tape.smul(query, 1.0 / std::sqrt(static_cast<double>(d)));
    scores = tape.matvec(keys, scaled);
  } else {
    Tape::Id feat = tape.attn_features(query, keys);
    Tape::Id hidden = tape.relu(
        tape.add_rowvec(tape.matmul(feat, params.w1), params.b1));
    scores = tape.matvec(hidden, params.w2);
  }
  (void)n_keys;
  Tape::Id weights = tape.softmax(scores);
  return tape.vecmat(weights, keys);
}

}  // namespace fim
