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

#include "fim/metrics.h"

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>

namespace fim {

std::optional<double> auc(const std::vector<double>& scores,
                          const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("auc: scores/labels length mismatch");
  }
  const size_t n = scores.size();
  int64_t n_pos = 0;
  for (int y : labels) {
    if (y != 0 && y != 1) throw std::invalid_argument("auc: labels must be 0/1");
    n_pos += y;
  }
  const int64_t n_neg = static_cast<int64_t>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });

  // Sum of positive ranks with 1-based average ranks over tied groups.
  double pos_rank_sum = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) pos_rank_sum += avg_rank;
    }
    i = j + 1;
  }
  const double numer =
      pos_rank_sum - static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return numer / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::optional<double> gauc(const std::vector<double>& scores,
                           const std::vector<int>& labels,
                           const std::vector<std::string>& user_ids) {
  if (scores.size() != labels.size() || scores.size() != user_ids.size()) {
    throw std::invalid_argument("gauc: input length mismatch");
  }
  std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> by_user;
  for (size_t i = 0; i < scores.size(); ++i) {
    auto& [s, l] = by_user[user_ids[i]];
    s.push_back(scores[i]);
    l.push_back(labels[i]);
  }
  double weighted = 0.0;
  double weight_sum = 0.0;
  for (const auto& [uid, sl] : by_user) {
    auto a = auc(sl.first, sl.second);
    if (!a.has_value()) continue;  // ineligible user
    const double w = static_cast<double>(sl.first.size());
    weighted += w * *a;
    weight_sum += w;
  }
  if (weight_sum == 0.0) return std::nullopt;
  return weighted / weight_sum;
}

}  // namespace fim
