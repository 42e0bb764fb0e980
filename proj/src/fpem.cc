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

#include "fim/fpem.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fim {

BandMasks band_masks_trunc(int l, int p) {
  if (p < 1 || 2 * p > l) {
    throw std::invalid_argument("band_masks_trunc: p out of [1, l/2]");
  }
  BandMasks m;
  m.low.assign(static_cast<size_t>(l), 0.0);
  m.band.assign(static_cast<size_t>(l), 0.0);
  m.high.assign(static_cast<size_t>(l), 0.0);
  for (int c = 0; c < l; ++c) {
    if (c < p) {
      m.low[static_cast<size_t>(c)] = 1.0;
    } else if (c < l - p) {
      m.band[static_cast<size_t>(c)] = 1.0;
    } else {
      m.high[static_cast<size_t>(c)] = 1.0;
    }
  }
  return m;
}

double butter_low_gain(double c, int l, double fc, int order) {
  const double cut = fc * l;
  return 1.0 / std::sqrt(1.0 + std::pow(c / cut, 2.0 * order));
}

BandMasks band_masks_butter(int l, double fc, int order) {
  if (!(fc > 0.0 && fc < 0.5)) {
    throw std::invalid_argument("band_masks_butter: fc out of (0, 0.5)");
  }
  if (order < 1) {
    throw std::invalid_argument("band_masks_butter: order must be >= 1");
  }
  BandMasks m;
  m.low.resize(static_cast<size_t>(l));
  m.band.resize(static_cast<size_t>(l));
  m.high.resize(static_cast<size_t>(l));
  for (int c = 0; c < l; ++c) {
    const double low = butter_low_gain(c, l, fc, order);
    const double high = butter_low_gain(l - 1 - c, l, fc, order);
    m.low[static_cast<size_t>(c)] = low;
    m.high[static_cast<size_t>(c)] = high;
    m.band[static_cast<size_t>(c)] =
        std::clamp(1.0 - low - high, 0.0, 1.0);
  }
  return m;
}

BandSplit split_bands(Tape& tape, Tape::Id e_seq, const BandMasks& masks) {
  const int n = tape.value(e_seq).rows();
  Tape::Id stacked = tape.band_split3(e_seq, masks.low, masks.band, masks.high);
  BandSplit out;
  out.low = tape.slice_rows(stacked, 0, n);
  out.band = tape.slice_rows(stacked, n, n);
  out.high = tape.slice_rows(stacked, 2 * n, n);
  return out;
}

Tape::Id gate_beta(Tape& tape, Tape::Id gate_input, const GateParams& params) {
  Tape::Id hidden = tape.relu(
      tape.add(tape.vecmat(gate_input, params.w1), params.b1));
  Tape::Id logit = tape.add(tape.dot(hidden, params.w2), params.b2);
  return tape.sigmoid(logit);
}

FpemOutput fpem_forward(Tape& tape, Tape::Id e_seq, Tape::Id side_info,
                        const BandMasks& masks, const GateParams& band_gate,
                        const GateParams& high_gate, Tape::Id ln_gamma,
                        Tape::Id ln_shift, double ln_eps, FusionMode fusion,
                        const std::vector<bool>& keep_rows) {
  BandSplit bands = split_bands(tape, e_seq, masks);
  FpemOutput out;
  Tape::Id fused;
  if (fusion == FusionMode::kDirect) {
    out.beta_band = tape.input(Tensor::scalar(1.0));
    out.beta_high = tape.input(Tensor::scalar(1.0));
    fused = tape.add(bands.low, tape.add(bands.band, bands.high));
  } else {
    Tape::Id band_mean = tape.mean_rows(bands.band, keep_rows);
    Tape::Id high_mean = tape.mean_rows(bands.high, keep_rows);
    out.beta_band =
        gate_beta(tape, tape.concat({side_info, band_mean}), band_gate);
    out.beta_high =
        gate_beta(tape, tape.concat({side_info, high_mean}), high_gate);
    fused = tape.add(bands.low,
                     tape.add(tape.scalar_bmul(out.beta_band, bands.band),
                              tape.scalar_bmul(out.beta_high, bands.high)));
  }
  out.fused_seq =
      tape.layer_norm(tape.add(fused, e_seq), ln_gamma, ln_shift, ln_eps);
  return out;
}

}  // namespace fim
