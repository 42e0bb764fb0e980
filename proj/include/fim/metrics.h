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

#ifndef FIM_METRICS_H_
#define FIM_METRICS_H_

#include <optional>
#include <string>
#include <vector>

namespace fim {

// Rank-based AUC with ties counted 0.5. Undefined (nullopt) when either
// class is missing.
std::optional<double> auc(const std::vector<double>& scores,
                          const std::vector<int>& labels);

// Sample-count-weighted average of per-user AUCs. Users lacking either
// class are excluded from both sums; nullopt when no user is eligible.
std::optional<double> gauc(const std::vector<double>& scores,
                           const std::vector<int>& labels,
                           const std::vector<std::string>& user_ids);

}  // namespace fim

#endif  // FIM_METRICS_H_
