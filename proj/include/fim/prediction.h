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

#ifndef FIM_PREDICTION_H_
#define FIM_PREDICTION_H_

#include <vector>

#include "fim/tape.h"

namespace fim {

// Learned linear map from the concatenated multi-view vector (V*D) down to
// the shared width D, so the two branch outputs can be fused.
Tape::Id project_views(Tape& tape, Tape::Id h_concat, Tape::Id w, Tape::Id b);

// Convex combination (1 - alpha) * h + alpha * f. alpha must be in [0, 1].
Tape::Id fuse(Tape& tape, Tape::Id h_proj, Tape::Id f_mean, double alpha);

// Shared experts with per-task softmax gates, residual connection, and
// per-task sigmoid heads.
struct MmoeParams {
  struct Expert {
    Tape::Id w1 = -1;  // (D x D)
    Tape::Id b1 = -1;  // (D)
    Tape::Id w2 = -1;  // (D x D)
    Tape::Id b2 = -1;  // (D)
  };
  struct Task {
    Tape::Id gate_w = -1;  // (D x E)
    Tape::Id gate_b = -1;  // (E)
    Tape::Id head_w = -1;  // (D)
    Tape::Id head_b = -1;  // (1)
  };
  std::vector<Expert> experts;
  std::vector<Task> tasks;
};

// Per-task probabilities: head_t(sum_e gate_t[e] * expert_e(z) + z).
std::vector<Tape::Id> mmoe_forward(Tape& tape, Tape::Id z,
                                   const MmoeParams& params);

// Plain binary cross-entropy with the probability clamped to
// [1e-12, 1 - 1e-12]; matches the tape op used in training.
double bce_loss(double prob, double label);

}  // namespace fim

#endif  // FIM_PREDICTION_H_
