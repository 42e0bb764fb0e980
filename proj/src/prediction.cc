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

#include "fim/prediction.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fim {

Tape::Id project_views(Tape& tape, Tape::Id h_concat, Tape::Id w, Tape::Id b) {
  return tape.add(tape.vecmat(h_concat, w), b);
}

Tape::Id fuse(Tape& tape, Tape::Id h_proj, Tape::Id f_mean, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("fuse: alpha out of [0, 1]");
  }
  return tape.add(tape.smul(h_proj, 1.0 - alpha), tape.smul(f_mean, alpha));
}

std::vector<Tape::Id> mmoe_forward(Tape& tape, Tape::Id z,
                                   const MmoeParams& params) {
  if (params.experts.empty() || params.tasks.empty()) {
    throw std::invalid_argument("mmoe: need at least one expert and task");
  }
  std::vector<Tape::Id> expert_outs;
  expert_outs.reserve(params.experts.size());
  for (const auto& e : params.experts) {
    Tape::Id hidden = tape.relu(tape.add(tape.vecmat(z, e.w1), e.b1));
    expert_outs.push_back(tape.add(tape.vecmat(hidden, e.w2), e.b2));
  }
  std::vector<Tape::Id> probs;
  probs.reserve(params.tasks.size());
  for (const auto& t : params.tasks) {
    Tape::Id gate =
        tape.softmax(tape.add(tape.vecmat(z, t.gate_w), t.gate_b));
    Tape::Id mixed = tape.add(tape.mix(expert_outs, gate), z);
    Tape::Id logit = tape.add(tape.dot(mixed, t.head_w), t.head_b);
    probs.push_back(tape.sigmoid(logit));
  }
  return probs;
}

double bce_loss(double prob, double label) {
  const double p = std::clamp(prob, 1e-12, 1.0 - 1e-12);
  return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
}

}  // namespace fim
