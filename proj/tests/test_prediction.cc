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

#include "fim/prediction.h"
#include "fim/tape.h"

using fim::MmoeParams;
using fim::Tape;
using fim::Tensor;

namespace {

MmoeParams make_mmoe(Tape& tape, int d, int n_experts, int n_tasks,
                     std::mt19937_64& rng, bool zero_experts = false) {
  MmoeParams p;
  for (int e = 0; e < n_experts; ++e) {
    MmoeParams::Expert ex;
    ex.w1 = tape.input(zero_experts ? Tensor::mat(d, d)
                                    : Tensor::randn({d, d}, rng, 0.4));
    ex.b1 = tape.input(Tensor::vec(d));
    ex.w2 = tape.input(zero_experts ? Tensor::mat(d, d)
                                    : Tensor::randn({d, d}, rng, 0.4));
    ex.b2 = tape.input(Tensor::vec(d));
    p.experts.push_back(ex);
  }
  for (int t = 0; t < n_tasks; ++t) {
    MmoeParams::Task task;
    task.gate_w = tape.input(Tensor::randn({d, n_experts}, rng, 0.4));
    task.gate_b = tape.input(Tensor::vec(n_experts));
    task.head_w = tape.input(Tensor::randn({d}, rng, 0.4));
    task.head_b = tape.input(Tensor::vec(1));
    p.tasks.push_back(task);
  }
  return p;
}

}  // namespace

TEST_CASE("masked mean pooling") {
  Tape tape;
  // Single row: the row itself.
  Tape::Id one = tape.input(Tensor::from(1, 2, {4.0, -2.0}));
  CHECK(tape.value(tape.mean_rows(one, {true})).at(0) == 4.0);
  // Two rows average.
  Tape::Id two = tape.input(Tensor::from(2, 2, {1.0, 3.0, 3.0, 1.0}));
  const Tensor& m = tape.value(tape.mean_rows(two, {true, true}));
  CHECK(m.at(0) == doctest::Approx(2.0));
  CHECK(m.at(1) == doctest::Approx(2.0));
  // Padded rows are excluded.
  Tape::Id padded = tape.input(Tensor::from(2, 2, {5.0, 5.0, 0.0, 0.0}));
  const Tensor& mp = tape.value(tape.mean_rows(padded, {true, false}));
  CHECK(mp.at(0) == doctest::Approx(5.0));
  CHECK(mp.at(1) == doctest::Approx(5.0));
  // All rows masked is an error.
  CHECK_THROWS_AS(tape.mean_rows(two, {false, false}), std::invalid_argument);
}

TEST_CASE("projection with identity weights passes the input through") {
  Tape tape;
  Tensor w = Tensor::mat(3, 3);
  for (int i = 0; i < 3; ++i) w.at(i, i) = 1.0;
  Tape::Id h = tape.input(Tensor::from({0.5, -1.0, 2.0}));
  const Tensor& out = tape.value(fim::project_views(
      tape, h, tape.input(w), tape.input(Tensor::vec(3))));
  CHECK(out.at(0) == 0.5);
  CHECK(out.at(1) == -1.0);
  CHECK(out.at(2) == 2.0);
}

TEST_CASE("projection of zero input returns the bias") {
  Tape tape;
  std::mt19937_64 rng(7);
  Tensor b = Tensor::from({0.3, -0.4});
  const Tensor& out = tape.value(fim::project_views(
      tape, tape.input(Tensor::vec(4)),
      tape.input(Tensor::randn({4, 2}, rng, 0.5)), tape.input(b)));
  CHECK(out.at(0) == doctest::Approx(0.3));
  CHECK(out.at(1) == doctest::Approx(-0.4));
}

TEST_CASE("fuse forms the documented convex combination") {
  Tape tape;
  Tape::Id h = tape.input(Tensor::from({2.0, 4.0}));
  Tape::Id f = tape.input(Tensor::from({0.0, 0.0}));
  const Tensor& half = tape.value(fim::fuse(tape, h, f, 0.5));
  CHECK(half.at(0) == doctest::Approx(1.0));
  CHECK(half.at(1) == doctest::Approx(2.0));
  const Tensor& h_only = tape.value(fim::fuse(tape, h, f, 0.0));
  CHECK(h_only.at(0) == 2.0);
  CHECK(h_only.at(1) == 4.0);
  const Tensor& f_only = tape.value(fim::fuse(tape, h, f, 1.0));
  CHECK(f_only.at(0) == 0.0);
  CHECK(f_only.at(1) == 0.0);
  CHECK_THROWS_AS(fim::fuse(tape, h, f, 1.5), std::invalid_argument);
}

TEST_CASE("fuse output lies between the two inputs coordinate-wise") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    Tape tape;
    Tensor hv = Tensor::randn({5}, rng, 1.0);
    Tensor fv = Tensor::randn({5}, rng, 1.0);
    std::uniform_real_distribution<double> ua(0.0, 1.0);
    const double alpha = ua(rng);
    const Tensor& z = tape.value(
        fim::fuse(tape, tape.input(hv), tape.input(fv), alpha));
    for (int i = 0; i < 5; ++i) {
      const double lo = std::min(hv.at(i), fv.at(i));
      const double hi = std::max(hv.at(i), fv.at(i));
      CHECK(z.at(i) >= lo - 1e-12);
      CHECK(z.at(i) <= hi + 1e-12);
    }
  }
}

TEST_CASE("single-expert MMoE reduces to expert(z) + z through the head") {
  std::mt19937_64 rng(13);
  Tape tape;
  const int d = 4;
  Tensor zv = Tensor::randn({d}, rng, 1.0);
  Tape::Id z = tape.input(zv);
  MmoeParams p = make_mmoe(tape, d, 1, 1, rng);
  auto probs = fim::mmoe_forward(tape, z, p);
  REQUIRE(probs.size() == 1);
  // Rebuild by hand: gate of a single expert is softmax of one logit = 1.
  Tape::Id hidden = tape.relu(
      tape.add(tape.vecmat(z, p.experts[0].w1), p.experts[0].b1));
  Tape::Id expert = tape.add(tape.vecmat(hidden, p.experts[0].w2),
                             p.experts[0].b2);
  Tape::Id mixed = tape.add(expert, z);
  Tape::Id logit = tape.add(tape.dot(mixed, p.tasks[0].head_w),
                            p.tasks[0].head_b);
  const double expected = tape.value(tape.sigmoid(logit)).value();
  CHECK(tape.value(probs[0]).value() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("zero experts make the residual a passthrough") {
  std::mt19937_64 rng(17);
  Tape tape;
  const int d = 3;
  Tensor zv = Tensor::from({0.2, -0.6, 1.0});
  Tape::Id z = tape.input(zv);
  MmoeParams p = make_mmoe(tape, d, 2, 1, rng, /*zero_experts=*/true);
  auto probs = fim::mmoe_forward(tape, z, p);
  // Task input is exactly z, so the head sees z.
  Tape::Id logit = tape.add(tape.dot(z, p.tasks[0].head_w), p.tasks[0].head_b);
  const double expected = tape.value(tape.sigmoid(logit)).value();
  CHECK(tape.value(probs[0]).value() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("gate weights are nonnegative and sum to 1 per task") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 10; ++rep) {
    Tape tape;
    const int d = 5, experts = 4;
    Tape::Id z = tape.input(Tensor::randn({d}, rng, 1.0));
    Tape::Id gate_w = tape.input(Tensor::randn({d, experts}, rng, 1.0));
    Tape::Id gate_b = tape.input(Tensor::randn({experts}, rng, 1.0));
    const Tensor& gate = tape.value(
        tape.softmax(tape.add(tape.vecmat(z, gate_w), gate_b)));
    double sum = 0.0;
    for (int e = 0; e < experts; ++e) {
      CHECK(gate.at(e) >= 0.0);
      sum += gate.at(e);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("bce_loss values match the closed form") {
  CHECK(fim::bce_loss(1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(fim::bce_loss(0.5, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(fim::bce_loss(0.9, 0.0) == doctest::Approx(-std::log(0.1)));
}

TEST_CASE("bce_loss is monotone in the probability") {
  // Strictly decreasing for label 1, strictly increasing for label 0.
  double prev1 = fim::bce_loss(0.01, 1.0);
  double prev0 = fim::bce_loss(0.01, 0.0);
  for (int i = 2; i <= 99; ++i) {
    const double p = i / 100.0;
    const double l1 = fim::bce_loss(p, 1.0);
    const double l0 = fim::bce_loss(p, 0.0);
    CHECK(l1 < prev1);
    CHECK(l0 > prev0);
    prev1 = l1;
    prev0 = l0;
  }
}
