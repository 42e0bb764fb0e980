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

#ifndef FIM_RECORDS_H_
#define FIM_RECORDS_H_

#include <string>
#include <vector>

namespace fim {

// One behavior event. Every record carries exactly these nine attributes.
struct InteractionRecord {
  std::string goods_id;
  std::string author_id;
  std::string source_domain;
  std::string action;
  std::string brand;
  std::string category;
  int time_span = 0;            // bucketed time since the previous event
  double price = 0.0;           // currency units, >= 0
  double payment_amount = 0.0;  // >= 0

  bool operator==(const InteractionRecord&) const = default;
};

inline constexpr int kNumAttributes = 9;

// Chronologically ordered interactions of one user.
struct BehaviorSequence {
  std::string user_id;
  std::vector<InteractionRecord> records;
};

// One training/evaluation instance: the window of behaviors preceding the
// target step, the candidate item, and binary labels per task.
struct Sample {
  std::string user_id;
  int step = 0;  // target step, used for temporal splits
  std::vector<InteractionRecord> window;
  InteractionRecord target;
  double label_click = 0.0;
  double label_purchase = 0.0;

  bool operator==(const Sample&) const = default;
};

using Dataset = std::vector<Sample>;

}  // namespace fim

#endif  // FIM_RECORDS_H_
