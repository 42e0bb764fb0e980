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

#include "fim/data.h"
#include "fim/gradcheck.h"
#include "fim/model.h"

using fim::AttributeIndexer;
using fim::Dataset;
using fim::FimModel;
using fim::GenResult;
using fim::ModelConfig;
using fim::PriceBucketizer;
using fim::SideInfoMode;
using fim::SyntheticConfig;
using fim::Tensor;

namespace {

SyntheticConfig toy_data_config() {
  SyntheticConfig cfg;
  cfg.n_users = 4;
  cfg.seq_len = 8;
  cfg.eval_steps = 1;
  cfg.category_periods = {3, 4, 3};
  cfg.categories_per_user = 1;
  cfg.exploration_rate = 0.2;
  cfg.goods_per_category = 16;
  cfg.seed = 11;
  return cfg;
}

AttributeIndexer indexer_for(const GenResult& gen) {
  AttributeIndexer idx;
  auto absorb = [&](const fim::InteractionRecord& r) {
    idx.goods.add(r.goods_id);
    idx.author.add(r.author_id);
    idx.domain.add(r.source_domain);
    idx.action.add(r.action);
    idx.brand.add(r.brand);
    idx.category.add(r.category);
  };
  for (const auto& stream : gen.streams) {
    for (const auto& r : stream.records) absorb(r);
  }
  for (const auto& s : gen.samples) absorb(s.target);
  idx.price = PriceBucketizer(std::max(1.0, gen.max_price));
  return idx;
}

ModelConfig toy_model_config() {
  ModelConfig cfg;
  cfg.d_attr = 2;
  cfg.max_seq_len = 8;
  cfg.top_k = 3;
  cfg.n_experts = 2;
  cfg.fpem_p = 2;  // L = 5 for N = 8
  cfg.init_seed = 5;
  return cfg;
}

struct Fixture {
  GenResult gen;
  AttributeIndexer idx;
  Dataset batch;
  Fixture() : gen(generate_synthetic(toy_data_config())), idx(indexer_for(gen)) {
    batch = Dataset(gen.samples.begin(), gen.samples.begin() + 4);
  }
};

// Heads default to zero (untrained predictions sit at 0.5), which makes the
// loss locally flat in every upstream parameter. Gradient checks must run
// at a generic point, so give the heads small random weights first.
void randomize_heads(FimModel& model, uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int t = 0; t < model.config().n_tasks; ++t) {
    Tensor& w = model.params().get("head" + std::to_string(t) + ".w");
    w = Tensor::randn(w.shape, rng, 0.3);
    Tensor& b = model.params().get("head" + std::to_string(t) + ".b");
    b = Tensor::randn(b.shape, rng, 0.1);
  }
}

double check_model(FimModel& model, const Dataset& batch) {
  randomize_heads(model, 321);
  std::map<std::string, Tensor> analytic;
  model.gradients(batch, &analytic);
  auto loss_fn = [&](const fim::ParamStore& store) {
    return model.loss_value(store, batch);
  };
  auto report = fim::grad_check(loss_fn, model.params(), analytic, 1e-5,
                                model.stopgrad_exempt_params());
  INFO("worst: ", report.worst_param, " coord ", report.worst_coord, " err ",
       report.max_rel_err);
  return report.max_rel_err;
}

}  // namespace

TEST_CASE("full-pipeline gradients match central differences (hard search)") {
  Fixture f;
  FimModel model(toy_model_config(), f.idx);
  CHECK(check_model(model, f.batch) < 1e-4);
}

TEST_CASE("full-pipeline gradients match central differences (soft search)") {
  Fixture f;
  ModelConfig cfg = toy_model_config();
  cfg.search = fim::SearchMode::kSoft;
  cfg.soft_proj_dim = 3;
  FimModel model(cfg, f.idx);
  CHECK(check_model(model, f.batch) < 1e-4);
}

TEST_CASE("gradients check out with side info flowing (Table-style row 2)") {
  Fixture f;
  ModelConfig cfg = toy_model_config();
  cfg.sideinfo = SideInfoMode::kGrad;
  FimModel model(cfg, f.idx);
  CHECK(model.stopgrad_exempt_params().empty());
  CHECK(check_model(model, f.batch) < 1e-4);
}

TEST_CASE("gradients check out with pay_len only (Table-style row 1)") {
  Fixture f;
  ModelConfig cfg = toy_model_config();
  cfg.sideinfo = SideInfoMode::kNone;
  FimModel model(cfg, f.idx);
  CHECK(model.stopgrad_exempt_params().empty());
  CHECK(check_model(model, f.batch) < 1e-4);
}

TEST_CASE("gradients check out with direct fusion and butterworth masks") {
  Fixture f;
  ModelConfig cfg = toy_model_config();
  cfg.fpem_fusion = fim::FusionMode::kDirect;
  cfg.fpem_filter = fim::FilterKind::kButter;
  cfg.fpem_fc = 0.2;
  cfg.fpem_order = 3;
  FimModel model(cfg, f.idx);
  CHECK(check_model(model, f.batch) < 1e-4);
}

TEST_CASE("stop-gradient contract: zero tape grads, live forward path") {
  Fixture f;
  ModelConfig cfg = toy_model_config();
  cfg.sideinfo = SideInfoMode::kNoGrad;
  FimModel model(cfg, f.idx);
  randomize_heads(model, 321);
  const auto exempt = model.stopgrad_exempt_params();
  CHECK(exempt == std::set<std::string>{"side.user_age", "side.user_gender",
                                        "side.item_brand", "side.item_price"});

  // Tape gradients via the beta path are exactly zero...
  std::map<std::string, Tensor> grads;
  model.gradients(f.batch, &grads);
  for (const auto& name : exempt) {
    const Tensor& g = grads.at(name);
    for (int64_t i = 0; i < g.size(); ++i) CHECK(g.at(i) == 0.0);
  }
  // ...while pay_len (the one flowing slice) receives gradient.
  double pay_sum = 0.0;
  const Tensor& gp = grads.at("side.pay_len");
  for (int64_t i = 0; i < gp.size(); ++i) pay_sum += std::fabs(gp.at(i));
  CHECK(pay_sum > 0.0);

  // ...and perturbing a stopped table still changes the loss.
  auto loss_fn = [&](const fim::ParamStore& store) {
    return model.loss_value(store, f.batch);
  };
  auto report = fim::grad_check(loss_fn, model.params(), grads, 1e-5, exempt);
  CHECK(report.max_rel_err < 1e-4);
  double fd_mag = 0.0;
  for (const auto& [name, mag] : report.exempt_fd_mag) fd_mag += mag;
  CHECK(fd_mag > 1e-6);
}

TEST_CASE("flipping the side-info gradient flag never changes forward values") {
  Fixture f;
  ModelConfig with_grad = toy_model_config();
  with_grad.sideinfo = SideInfoMode::kGrad;
  ModelConfig no_grad = toy_model_config();
  no_grad.sideinfo = SideInfoMode::kNoGrad;
  FimModel a(with_grad, f.idx);
  FimModel b(no_grad, f.idx);
  auto pa = a.predict(f.batch);
  auto pb = b.predict(f.batch);
  REQUIRE(pa.size() == pb.size());
  for (size_t i = 0; i < pa.size(); ++i) {
    for (size_t t = 0; t < pa[i].size(); ++t) {
      CHECK(pa[i][t] == pb[i][t]);  // bit-identical
    }
  }
}

TEST_CASE("zero-initialized heads predict 0.5, so the loss starts at ln 2") {
  Fixture f;
  FimModel model(toy_model_config(), f.idx);
  auto probs = model.predict(f.batch);
  for (const auto& row : probs) {
    for (double p : row) CHECK(p == doctest::Approx(0.5).epsilon(1e-12));
  }
  fim::Tape tape;
  auto nodes = model.build_batch(tape, model.params(), f.batch, false);
  for (auto id : nodes.task_losses) {
    CHECK(tape.value(id).value() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }
  CHECK(tape.value(nodes.loss).value() ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("gradient computation is deterministic across repeats") {
  Fixture f;
  FimModel model(toy_model_config(), f.idx);
  std::map<std::string, Tensor> g1, g2;
  const double l1 = model.gradients(f.batch, &g1);
  const double l2 = model.gradients(f.batch, &g2);
  CHECK(l1 == l2);
  for (const auto& name : model.params().names()) {
    const Tensor& a = g1.at(name);
    const Tensor& b = g2.at(name);
    for (int64_t i = 0; i < a.size(); ++i) CHECK(a.at(i) == b.at(i));
  }
}

TEST_CASE("disabled components keep their parameter groups absent") {
  Fixture f;
  ModelConfig cfg = toy_model_config();
  cfg.fpem_enabled = false;
  FimModel model(cfg, f.idx);
  for (const auto& name : model.params().names()) {
    CHECK(FimModel::param_group(name) != "fpem");
  }
  // Hard search keeps soft projections out as well.
  for (const auto& name : model.params().names()) {
    CHECK(name.find("soft") == std::string::npos);
  }
  CHECK(check_model(model, f.batch) < 1e-4);
}

TEST_CASE("category-only hard search with FPEM off is a valid baseline") {
  Fixture f;
  ModelConfig cfg = toy_model_config();
  cfg.fpem_enabled = false;
  cfg.views = {fim::ViewKey::kCategory};
  FimModel model(cfg, f.idx);
  auto probs = model.predict(f.batch);
  CHECK(probs.size() == f.batch.size());
  CHECK(check_model(model, f.batch) < 1e-4);
}

TEST_CASE("empty views run on the frequency branch alone") {
  Fixture f;
  ModelConfig cfg = toy_model_config();
  cfg.views = {};
  FimModel model(cfg, f.idx);
  auto probs = model.predict(f.batch);
  CHECK(probs.size() == f.batch.size());
  for (const auto& name : model.params().names()) {
    CHECK(name.rfind("proj.", 0) != 0);
    CHECK(name.rfind("mss.", 0) != 0);
  }
}

TEST_CASE("short windows are left-padded and still evaluate") {
  Fixture f;
  FimModel model(toy_model_config(), f.idx);
  Dataset batch = f.batch;
  // Truncate one window to 3 events (PAD rows fill the front).
  batch[0].window.erase(batch[0].window.begin(), batch[0].window.end() - 3);
  auto probs = model.predict(batch);
  CHECK(probs.size() == batch.size());
  for (double p : probs[0]) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  CHECK(std::isfinite(model.loss_value(model.params(), batch)));
}
