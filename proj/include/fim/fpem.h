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

#ifndef FIM_FPEM_H_
#define FIM_FPEM_H_

#include <vector>

#include "fim/tape.h"

namespace fim {

enum class FilterKind { kTrunc, kButter };
enum class FusionMode { kBeta, kDirect };

// Per-bin gains in [0, 1] for the three frequency bands.
struct BandMasks {
  std::vector<double> low;
  std::vector<double> band;
  std::vector<double> high;
};

// Truncation masks: 0/1 indicators of [0, p), [p, l-p), [l-p, l).
// Requires 1 <= p <= l/2; the three masks partition [0, l).
BandMasks band_masks_trunc(int l, int p);

// Butterworth gains: low is 1/sqrt(1 + (c/(fc*l))^(2r)), high mirrors it
// from the top bin, band is the clamped remainder. Requires 0 < fc < 0.5
// and r >= 1.
BandMasks band_masks_butter(int l, double fc, int order);

double butter_low_gain(double c, int l, double fc, int order);

// Band-filtered copies of an (N x D) sequence, one per mask.
struct BandSplit {
  Tape::Id low = -1;
  Tape::Id band = -1;
  Tape::Id high = -1;
};

BandSplit split_bands(Tape& tape, Tape::Id e_seq, const BandMasks& masks);

// Gate MLP: beta = sigmoid(w2 . relu(W1 x + b1) + b2), a scalar in (0, 1).
struct GateParams {
  Tape::Id w1 = -1;  // (in x hidden)
  Tape::Id b1 = -1;  // (hidden)
  Tape::Id w2 = -1;  // (hidden)
  Tape::Id b2 = -1;  // (1)
};

Tape::Id gate_beta(Tape& tape, Tape::Id gate_input, const GateParams& params);

struct FpemOutput {
  Tape::Id fused_seq = -1;  // (N x D) after residual LayerNorm
  Tape::Id beta_band = -1;  // scalar gates (constant 1 under direct fusion)
  Tape::Id beta_high = -1;
};

// Full module: band split, side-info conditioned gates on the band and high
// components, fusion with the low band, then residual LayerNorm per time
// step. side_info is the I_u vector (already flagged for gradient flow);
// the gate input is I_u concatenated with the masked time-mean of the band
// in question. Under direct fusion the gates are fixed to 1.
FpemOutput fpem_forward(Tape& tape, Tape::Id e_seq, Tape::Id side_info,
                        const BandMasks& masks, const GateParams& band_gate,
                        const GateParams& high_gate, Tape::Id ln_gamma,
                        Tape::Id ln_shift, double ln_eps, FusionMode fusion,
                        const std::vector<bool>& keep_rows);

}  // namespace fim

#endif  // FIM_FPEM_H_
