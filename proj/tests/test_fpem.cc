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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fim/fft.h"
#include "fim/fpem.h"
#include "fim/tape.h"

using fim::BandMasks;
using fim::FusionMode;
using fim::GateParams;
using fim::Tape;
using fim::Tensor;

namespace {

GateParams zero_gate(Tape& tape, int in_dim, int hidden) {
  GateParams g;
  g.w1 = tape.input(Tensor::mat(in_dim, hidden));
  g.b1 = tape.input(Tensor::vec(hidden));
  g.w2 = tape.input(Tensor::vec(hidden));
  g.b2 = tape.input(Tensor::vec(1));
  return g;
}

}  // namespace

TEST_CASE("truncation masks partition [0, L) at the documented cuts") {
  // L = 14 with p = 5: low on 0..4, band on 5..8, high on 9..13.
  BandMasks m = fim::band_masks_trunc(14, 5);
  for (int c = 0; c < 14; ++c) {
    CHECK(m.low[static_cast<size_t>(c)] == (c < 5 ? 1.0 : 0.0));
    CHECK(m.band[static_cast<size_t>(c)] == (c >= 5 && c < 9 ? 1.0 : 0.0));
    CHECK(m.high[static_cast<size_t>(c)] == (c >= 9 ? 1.0 : 0.0));
  }
}

TEST_CASE("smallest valid truncation: L=3, p=1") {
  BandMasks m = fim::band_masks_trunc(3, 1);
  CHECK(m.low == std::vector<double>{1, 0, 0});
  CHECK(m.band == std::vector<double>{0, 1, 0});
  CHECK(m.high == std::vector<double>{0, 0, 1});
}

TEST_CASE("the three truncation masks sum to all-ones") {
  for (int l : {3, 14, 33}) {
    for (int p = 1; 2 * p <= l; ++p) {
      BandMasks m = fim::band_masks_trunc(l, p);
      for (int c = 0; c < l; ++c) {
        CHECK(m.low[static_cast<size_t>(c)] + m.band[static_cast<size_t>(c)] +
                  m.high[static_cast<size_t>(c)] ==
              doctest::Approx(1.0).epsilon(1e-15));
      }
    }
  }
}

TEST_CASE("truncation rejects out-of-range p") {
  CHECK_THROWS_AS(fim::band_masks_trunc(14, 0), std::invalid_argument);
  CHECK_THROWS_AS(fim::band_masks_trunc(14, 8), std::invalid_argument);
}

TEST_CASE("Butterworth gain hits 1/sqrt(2) at the cutoff and 1 at DC") {
  const int l = 14;
  const double fc = 0.25;
  for (int r : {1, 2, 4, 6}) {
    CHECK(fim::butter_low_gain(fc * l, l, fc, r) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(fim::butter_low_gain(0.0, l, fc, r) == doctest::Approx(1.0));
  }
  BandMasks m = fim::band_masks_butter(l, fc, 4);
  CHECK(m.low[0] == doctest::Approx(1.0));
  CHECK(m.high[static_cast<size_t>(l - 1)] == doctest::Approx(1.0));
  for (int c = 0; c < l; ++c) {
    CHECK(m.band[static_cast<size_t>(c)] >= 0.0);
    CHECK(m.band[static_cast<size_t>(c)] <= 1.0);
  }
}

TEST_CASE("Butterworth approaches the truncation step as order grows") {
  // Non-integer cutoff keeps every bin away from the 1/sqrt(2) point.
  const int l = 14;
  const double fc = 0.125;  // fc * l = 1.75
  const int p = static_cast<int>(std::lround(fc * l));  // 2
  BandMasks trunc = fim::band_masks_trunc(l, p);
  double first = 0.0, prev = 2.0;
  for (int r = 1; r <= 8; ++r) {
    BandMasks butter = fim::band_masks_butter(l, fc, r);
    double worst = 0.0;
    for (int c = 0; c < l; ++c) {
      worst = std::max(worst, std::fabs(butter.low[static_cast<size_t>(c)] -
                                        trunc.low[static_cast<size_t>(c)]));
    }
    CHECK(worst <= prev + 1e-12);
    if (r == 1) first = worst;
    prev = worst;
  }
  // Bin 2 sits at 1.14x the cutoff, so convergence is slow there; still the
  // gap at order 8 must have shrunk well below the order-1 gap.
  CHECK(prev < 0.6 * first);
}

TEST_CASE("Butterworth rejects invalid parameters") {
  CHECK_THROWS_AS(fim::band_masks_butter(14, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(fim::band_masks_butter(14, 0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(fim::band_masks_butter(14, 0.25, 0), std::invalid_argument);
}

TEST_CASE("an all-ones mask reproduces the input") {
  std::mt19937_64 rng(31);
  Tape tape;
  Tensor e = Tensor::randn({26, 4}, rng, 1.0);
  std::vector<double> ones(static_cast<size_t>(fim::rfft_len(26)), 1.0);
  const Tensor& f = tape.value(tape.band_filter(tape.input(e), ones));
  for (int64_t i = 0; i < e.size(); ++i) {
    CHECK(std::fabs(f.at(i) - e.at(i)) < 1e-9);
  }
}

TEST_CASE("a constant column passes a DC-keeping low mask unchanged") {
  Tape tape;
  const int n = 16;
  Tensor e = Tensor::mat(n, 2);
  for (int i = 0; i < n; ++i) {
    e.at(i, 0) = 3.25;
    e.at(i, 1) = -1.5;
  }
  BandMasks m = fim::band_masks_trunc(fim::rfft_len(n), 2);
  const Tensor& f = tape.value(tape.band_filter(tape.input(e), m.low));
  for (int64_t i = 0; i < e.size(); ++i) {
    CHECK(std::fabs(f.at(i) - e.at(i)) < 1e-9);
  }
}

TEST_CASE("band split reconstructs the input under truncation masks") {
  std::mt19937_64 rng(37);
  for (int n : {26, 64}) {
    Tape tape;
    Tensor e_v = Tensor::randn({n, 5}, rng, 1.0);
    Tape::Id e = tape.input(e_v);
    BandMasks m = fim::band_masks_trunc(fim::rfft_len(n), 5);
    fim::BandSplit bands = fim::split_bands(tape, e, m);
    const Tensor& sum = tape.value(
        tape.add(bands.low, tape.add(bands.band, bands.high)));
    for (int64_t i = 0; i < e_v.size(); ++i) {
      CHECK(std::fabs(sum.at(i) - e_v.at(i)) < 1e-9);
    }
  }
}

TEST_CASE("gate with all-zero parameters outputs 0.5") {
  Tape tape;
  GateParams g = zero_gate(tape, 3, 4);
  Tape::Id x = tape.input(Tensor::from({0.5, -1.0, 2.0}));
  CHECK(tape.value(fim::gate_beta(tape, x, g)).value() ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scalar gate oracle: sigmoid(2 relu(1)) ~= 0.8808") {
  Tape tape;
  GateParams g;
  g.w1 = tape.input(Tensor::from(1, 1, {1.0}));
  g.b1 = tape.input(Tensor::from({0.0}));
  g.w2 = tape.input(Tensor::from({2.0}));
  g.b2 = tape.input(Tensor::from({0.0}));
  Tape::Id x = tape.input(Tensor::from({1.0}));
  CHECK(tape.value(fim::gate_beta(tape, x, g)).value() ==
        doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
}

TEST_CASE("gate output stays in (0, 1) for random finite inputs") {
  // Logits of realistic magnitude; the sigmoid saturates to exactly 1.0 in
  // doubles only beyond |logit| ~ 37.
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 50; ++rep) {
    Tape tape;
    GateParams g;
    g.w1 = tape.input(Tensor::randn({5, 3}, rng, 1.0));
    g.b1 = tape.input(Tensor::randn({3}, rng, 1.0));
    g.w2 = tape.input(Tensor::randn({3}, rng, 1.0));
    g.b2 = tape.input(Tensor::randn({1}, rng, 1.0));
    Tape::Id x = tape.input(Tensor::randn({5}, rng, 1.0));
    const double beta = tape.value(fim::gate_beta(tape, x, g)).value();
    CHECK(beta > 0.0);
    CHECK(beta < 1.0);
  }
}

TEST_CASE("direct fusion with truncation masks collapses to LayerNorm(E)") {
  // The bands sum to E, and LayerNorm(2E) = LayerNorm(E) up to eps effects.
  std::mt19937_64 rng(43);
  const int n = 16, d = 6;
  Tensor e_v = Tensor::randn({n, d}, rng, 1.0);
  Tensor gamma = Tensor::vec(d);
  gamma.fill(1.0);
  Tensor shift = Tensor::vec(d);

  Tape tape;
  Tape::Id e = tape.input(e_v);
  BandMasks m = fim::band_masks_trunc(fim::rfft_len(n), 3);
  GateParams unused;
  std::vector<bool> keep(static_cast<size_t>(n), true);
  fim::FpemOutput out = fim::fpem_forward(
      tape, e, /*side_info=*/-1, m, unused, unused, tape.input(gamma),
      tape.input(shift), 1e-12, FusionMode::kDirect, keep);
  const Tensor& fused = tape.value(out.fused_seq);
  const Tensor& ln_e = tape.value(
      tape.layer_norm(tape.input(e_v), tape.input(gamma), tape.input(shift), 1e-12));
  for (int64_t i = 0; i < fused.size(); ++i) {
    CHECK(std::fabs(fused.at(i) - ln_e.at(i)) < 1e-7);
  }
  CHECK(tape.value(out.beta_band).value() == 1.0);
  CHECK(tape.value(out.beta_high).value() == 1.0);
}

TEST_CASE("zero input yields the LayerNorm shift vector at every step") {
  Tape tape;
  const int n = 8, d = 4;
  Tensor shift = Tensor::from({0.1, -0.2, 0.3, 0.0});
  Tensor gamma = Tensor::vec(d);
  gamma.fill(1.0);
  BandMasks m = fim::band_masks_trunc(fim::rfft_len(n), 2);
  GateParams unused;
  std::vector<bool> keep(static_cast<size_t>(n), true);
  fim::FpemOutput out = fim::fpem_forward(
      tape, tape.input(Tensor::mat(n, d)), -1, m, unused, unused,
      tape.input(gamma), tape.input(shift), 1e-6, FusionMode::kDirect, keep);
  const Tensor& fused = tape.value(out.fused_seq);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < d; ++c) {
      CHECK(fused.at(r, c) == doctest::Approx(shift.at(c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta fusion: decreasing beta shrinks the gated band's norm") {
  std::mt19937_64 rng(47);
  Tensor band = Tensor::randn({12, 4}, rng, 1.0);
  double prev = 1e300;
  for (double beta : {0.9, 0.5, 0.1}) {
    double norm = 0.0;
    for (int64_t i = 0; i < band.size(); ++i) {
      norm += beta * band.at(i) * beta * band.at(i);
    }
    CHECK(norm < prev);
    prev = norm;
  }
}

TEST_CASE("band split commutes with circular time shifts for 0/1 masks") {
  std::mt19937_64 rng(53);
  const int n = 24, d = 3, shift_by = 7;
  Tensor e = Tensor::randn({n, d}, rng, 1.0);
  Tensor e_shifted = Tensor::mat(n, d);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) {
      e_shifted.at((i + shift_by) % n, c) = e.at(i, c);
    }
  }
  BandMasks m = fim::band_masks_trunc(fim::rfft_len(n), 4);
  for (const auto& mask : {m.low, m.band, m.high}) {
    Tensor f = fim::band_filter_apply(e, mask);
    Tensor f_shifted = fim::band_filter_apply(e_shifted, mask);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < d; ++c) {
        CHECK(std::fabs(f_shifted.at((i + shift_by) % n, c) - f.at(i, c)) <
              1e-9);
      }
    }
  }
}

TEST_CASE("beta-fusion gates feed back into gate parameters") {
  // End-to-end: gradients reach the gate weights through the fused output.
  std::mt19937_64 rng(59);
  const int n = 8, d = 4;
  Tape tape;
  Tape::Id e = tape.input(Tensor::randn({n, d}, rng, 1.0));
  Tape::Id side = tape.param("side", Tensor::randn({3}, rng, 0.5));
  BandMasks m = fim::band_masks_trunc(fim::rfft_len(n), 2);
  GateParams band_gate, high_gate;
  const int gate_in = 3 + d;
  band_gate.w1 = tape.param("bg.w1", Tensor::randn({gate_in, 2}, rng, 0.5));
  band_gate.b1 = tape.param("bg.b1", Tensor::randn({2}, rng, 0.5));
  band_gate.w2 = tape.param("bg.w2", Tensor::randn({2}, rng, 0.5));
  band_gate.b2 = tape.param("bg.b2", Tensor::randn({1}, rng, 0.5));
  high_gate.w1 = tape.param("hg.w1", Tensor::randn({gate_in, 2}, rng, 0.5));
  high_gate.b1 = tape.param("hg.b1", Tensor::randn({2}, rng, 0.5));
  high_gate.w2 = tape.param("hg.w2", Tensor::randn({2}, rng, 0.5));
  high_gate.b2 = tape.param("hg.b2", Tensor::randn({1}, rng, 0.5));
  Tensor gamma = Tensor::vec(d);
  gamma.fill(1.0);
  std::vector<bool> keep(static_cast<size_t>(n), true);
  fim::FpemOutput out =
      fim::fpem_forward(tape, e, side, m, band_gate, high_gate,
                        tape.input(gamma), tape.input(Tensor::vec(d)), 1e-5,
                        FusionMode::kBeta, keep);
  Tape::Id pooled = tape.mean_rows(out.fused_seq, keep);
  tape.backward(tape.dot(pooled, pooled));
  double g = 0.0;
  for (int64_t i = 0; i < tape.grad_of("bg.w1").size(); ++i) {
    g += std::fabs(tape.grad_of("bg.w1").at(i));
  }
  CHECK(g > 0.0);
}
