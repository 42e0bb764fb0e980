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
#include <cstdio>
#include <random>

#include "fim/adam.h"
#include "fim/gradcheck.h"
#include "fim/params.h"
#include "fim/tape.h"

using fim::AdamState;
using fim::ParamStore;
using fim::Tensor;

TEST_CASE("first Adam step moves each coordinate by about lr") {
  Tensor w = Tensor::from({1.0, -2.0, 0.5});
  Tensor g = Tensor::from({1.0, -0.5, 1e-3});
  Tensor orig = w;
  AdamState state;
  fim::adam_step(w, g, state, 0.01);
  for (int64_t i = 0; i < w.size(); ++i) {
    const double step = std::fabs(w.at(i) - orig.at(i));
    CHECK(step == doctest::Approx(0.01).epsilon(1e-4));
    // Sign opposes the gradient.
    CHECK((w.at(i) - orig.at(i)) * g.at(i) < 0.0);
  }
  CHECK(state.t == 1);
}

TEST_CASE("zero gradients leave parameters unchanged") {
  Tensor w = Tensor::from({1.0, 2.0});
  Tensor g = Tensor::from({0.0, 0.0});
  AdamState state;
  fim::adam_step(w, g, state, 0.01);
  CHECK(w.at(0) == 1.0);
  CHECK(w.at(1) == 2.0);
}

TEST_CASE("identical calls from identical state are bit-identical") {
  std::mt19937_64 rng(5);
  Tensor w1 = Tensor::randn({8}, rng, 1.0);
  Tensor w2 = w1;
  Tensor g = Tensor::randn({8}, rng, 1.0);
  AdamState s1, s2;
  for (int step = 0; step < 5; ++step) {
    fim::adam_step(w1, g, s1, 0.01);
    fim::adam_step(w2, g, s2, 0.01);
  }
  for (int64_t i = 0; i < w1.size(); ++i) {
    CHECK(w1.at(i) == w2.at(i));
    CHECK(s1.m.at(i) == s2.m.at(i));
    CHECK(s1.v.at(i) == s2.v.at(i));
  }
}

TEST_CASE("shape mismatch is rejected") {
  Tensor w = Tensor::from({1.0, 2.0});
  Tensor g = Tensor::from({1.0});
  AdamState state;
  CHECK_THROWS_AS(fim::adam_step(w, g, state, 0.01), std::invalid_argument);
}

TEST_CASE("grad_check is exact on a quadratic") {
  ParamStore params;
  params.create("w", Tensor::from({3.0}));
  auto loss = [](const ParamStore& p) {
    const double w = p.get("w").at(0);
    return w * w;
  };
  std::map<std::string, Tensor> analytic;
  analytic["w"] = Tensor::from({6.0});
  auto report = fim::grad_check(loss, params, analytic, 1e-5);
  CHECK(report.max_rel_err < 1e-9);
}

TEST_CASE("grad_check catches a wrong gradient") {
  ParamStore params;
  params.create("w", Tensor::from({3.0}));
  auto loss = [](const ParamStore& p) {
    const double w = p.get("w").at(0);
    return w * w;
  };
  std::map<std::string, Tensor> analytic;
  analytic["w"] = Tensor::from({5.0});
  auto report = fim::grad_check(loss, params, analytic, 1e-5);
  CHECK(report.max_rel_err > 0.1);
  CHECK(report.worst_param == "w");
}

TEST_CASE("grad_check exempts flagged parameters but records FD magnitude") {
  ParamStore params;
  params.create("w", Tensor::from({2.0}));
  params.create("frozen", Tensor::from({1.0}));
  auto loss = [](const ParamStore& p) {
    const double w = p.get("w").at(0);
    const double f = p.get("frozen").at(0);
    return w * w + 3.0 * f;
  };
  std::map<std::string, Tensor> analytic;
  analytic["w"] = Tensor::from({4.0});
  analytic["frozen"] = Tensor::from({0.0});  // stopped by contract
  auto report = fim::grad_check(loss, params, analytic, 1e-5, {"frozen"});
  CHECK(report.max_rel_err < 1e-8);
  REQUIRE(report.exempt_fd_mag.count("frozen") == 1);
  // Forward perturbation still changes the loss.
  CHECK(report.exempt_fd_mag.at("frozen") == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("grad_check rejects non-finite losses") {
  ParamStore params;
  params.create("w", Tensor::from({1.0}));
  auto loss = [](const ParamStore&) {
    return std::numeric_limits<double>::quiet_NaN();
  };
  std::map<std::string, Tensor> analytic;
  CHECK_THROWS(fim::grad_check(loss, params, analytic, 1e-5));
}

TEST_CASE("checkpoints roundtrip bit-exactly") {
  std::mt19937_64 rng(9);
  ParamStore store;
  store.create("emb.goods", Tensor::randn({5, 3}, rng, 0.3));
  store.create("head.w", Tensor::randn({7}, rng, 0.3));
  const std::string path = "test_ckpt.bin";
  store.save(path);
  ParamStore back = fim::ParamStore::load(path);
  REQUIRE(back.names() == store.names());
  for (const auto& name : store.names()) {
    const Tensor& a = store.get(name);
    const Tensor& b = back.get(name);
    REQUIRE(a.shape == b.shape);
    for (int64_t i = 0; i < a.size(); ++i) CHECK(a.at(i) == b.at(i));
  }
  std::remove(path.c_str());
}
