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

#include "fim/model.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fim/fft.h"

namespace fim {

namespace {

std::string view_param(ViewKey v, const char* leaf) {
  return std::string("mss.") + view_name(v) + "." + leaf;
}

}  // namespace

struct FimModel::ParamNodes {
  std::array<Tape::Id, kNumAttributes> emb{};
  Tape::Id side_user_age = -1;
  Tape::Id side_user_gender = -1;
  Tape::Id side_item_brand = -1;
  Tape::Id side_item_price = -1;
  Tape::Id side_pay_len = -1;
  std::map<ViewKey, AttentionParams> attn;
  Tape::Id proj_w = -1;
  Tape::Id proj_b = -1;
  GateParams band_gate;
  GateParams high_gate;
  Tape::Id ln_gamma = -1;
  Tape::Id ln_shift = -1;
  MmoeParams mmoe;
};

FimModel::FimModel(ModelConfig config, AttributeIndexer indexer)
    : config_(std::move(config)), indexer_(std::move(indexer)) {
  const int d = config_.d();
  const int n_views = static_cast<int>(config_.views.size());
  if (n_views < 1 && !config_.fpem_enabled) {
    throw std::invalid_argument("model: empty views require the FPEM branch");
  }
  if (config_.top_k < 1) throw std::invalid_argument("model: top_k < 1");
  std::mt19937_64 rng(config_.init_seed);
  auto dense = [&](int rows, int cols) {
    return Tensor::randn({rows, cols}, rng,
                         std::sqrt(2.0 / std::max(1, rows)));
  };

  for (int a = 0; a < kNumAttributes; ++a) {
    params_.create(std::string("emb.") + kAttributeNames[static_cast<size_t>(a)],
                   Tensor::randn({indexer_.table_rows(a), config_.d_attr}, rng,
                                 0.1));
  }
  params_.create("side.user_age",
                 Tensor::randn({kUserAgeBuckets, config_.d_attr}, rng, 0.1));
  params_.create("side.user_gender",
                 Tensor::randn({kUserGenderBuckets, config_.d_attr}, rng, 0.1));
  params_.create("side.item_brand",
                 Tensor::randn({indexer_.brand.size(), config_.d_attr}, rng, 0.1));
  params_.create("side.item_price",
                 Tensor::randn({indexer_.price.n_buckets(), config_.d_attr},
                               rng, 0.1));
  params_.create("side.pay_len",
                 Tensor::randn({config_.max_seq_len + 1, config_.d_attr}, rng,
                               0.1));

  const int view_dim =
      config_.view_attrs == ViewAttrMode::kAll ? d : 2 * config_.d_attr;
  for (ViewKey v : config_.views) {
    if (config_.search == SearchMode::kSoft) {
      if (!config_.share_soft_weights || v == config_.views.front()) {
        params_.create(view_param(v, "soft.wb"),
                       dense(view_dim, config_.soft_proj_dim));
        params_.create(view_param(v, "soft.wt"),
                       dense(view_dim, config_.soft_proj_dim));
      }
    }
    if (config_.attn_scoring == AttnScoring::kMlp) {
      const int attn_hidden = std::max(4, d / 2);
      params_.create(view_param(v, "attn.w1"), dense(3 * d, attn_hidden));
      params_.create(view_param(v, "attn.b1"), Tensor::vec(attn_hidden));
      params_.create(view_param(v, "attn.w2"),
                     Tensor::randn({attn_hidden}, rng,
                                   std::sqrt(1.0 / attn_hidden)));
    }
  }

  if (n_views >= 1) {
    params_.create("proj.w", dense(n_views * d, d));
    params_.create("proj.b", Tensor::vec(d));
  }

  if (config_.fpem_enabled) {
    if (config_.fpem_fusion == FusionMode::kBeta) {
      int side_dim = config_.d_attr;  // pay_len slice
      if (config_.sideinfo != SideInfoMode::kNone) {
        side_dim += 4 * config_.d_attr;
      }
      const int gate_in = side_dim + d;
      const int gate_hidden = std::max(1, d / 2);
      auto make_gate = [&](const std::string& prefix) {
        params_.create(prefix + ".w1", dense(gate_in, gate_hidden));
        params_.create(prefix + ".b1", Tensor::vec(gate_hidden));
        params_.create(prefix + ".w2",
                       Tensor::randn({gate_hidden}, rng,
                                     std::sqrt(1.0 / gate_hidden)));
        params_.create(prefix + ".b2", Tensor::vec(1));
      };
      make_gate("fpem.band");
      if (!config_.share_gates) make_gate("fpem.high");
    }
    Tensor gamma = Tensor::vec(d);
    gamma.fill(1.0);
    params_.create("fpem.ln.gamma", std::move(gamma));
    params_.create("fpem.ln.shift", Tensor::vec(d));
  }

  for (int e = 0; e < config_.n_experts; ++e) {
    const std::string prefix = "mmoe.expert" + std::to_string(e);
    params_.create(prefix + ".w1", dense(d, d));
    params_.create(prefix + ".b1", Tensor::vec(d));
    params_.create(prefix + ".w2", dense(d, d));
    params_.create(prefix + ".b2", Tensor::vec(d));
  }
  for (int t = 0; t < config_.n_tasks; ++t) {
    const std::string prefix = "mmoe.gate" + std::to_string(t);
    params_.create(prefix + ".w", dense(d, config_.n_experts));
    params_.create(prefix + ".b", Tensor::vec(config_.n_experts));
  }
  // Heads start at zero so untrained predictions sit at 0.5.
  for (int t = 0; t < config_.n_tasks; ++t) {
    const std::string prefix = "head" + std::to_string(t);
    params_.create(prefix + ".w", Tensor::vec(d));
    params_.create(prefix + ".b", Tensor::vec(1));
  }
}

FimModel::ParamNodes FimModel::register_params(Tape& tape,
                                               const ParamStore& store,
                                               bool trainable) const {
  std::map<std::string, Tape::Id> ids;
  for (const auto& name : store.names()) {
    ids[name] = tape.param(name, store.get(name), trainable);
  }
  ParamNodes nodes;
  for (int a = 0; a < kNumAttributes; ++a) {
    nodes.emb[static_cast<size_t>(a)] =
        ids.at(std::string("emb.") + kAttributeNames[static_cast<size_t>(a)]);
  }
  nodes.side_user_age = ids.at("side.user_age");
  nodes.side_user_gender = ids.at("side.user_gender");
  nodes.side_item_brand = ids.at("side.item_brand");
  nodes.side_item_price = ids.at("side.item_price");
  nodes.side_pay_len = ids.at("side.pay_len");
  for (ViewKey v : config_.views) {
    if (config_.attn_scoring == AttnScoring::kMlp) {
      AttentionParams ap;
      ap.w1 = ids.at(view_param(v, "attn.w1"));
      ap.b1 = ids.at(view_param(v, "attn.b1"));
      ap.w2 = ids.at(view_param(v, "attn.w2"));
      nodes.attn[v] = ap;
    } else {
      nodes.attn[v] = AttentionParams{};
    }
  }
  if (!config_.views.empty()) {
    nodes.proj_w = ids.at("proj.w");
    nodes.proj_b = ids.at("proj.b");
  }
  if (config_.fpem_enabled) {
    if (config_.fpem_fusion == FusionMode::kBeta) {
      nodes.band_gate.w1 = ids.at("fpem.band.w1");
      nodes.band_gate.b1 = ids.at("fpem.band.b1");
      nodes.band_gate.w2 = ids.at("fpem.band.w2");
      nodes.band_gate.b2 = ids.at("fpem.band.b2");
      const std::string high = config_.share_gates ? "fpem.band" : "fpem.high";
      nodes.high_gate.w1 = ids.at(high + ".w1");
      nodes.high_gate.b1 = ids.at(high + ".b1");
      nodes.high_gate.w2 = ids.at(high + ".w2");
      nodes.high_gate.b2 = ids.at(high + ".b2");
    }
    nodes.ln_gamma = ids.at("fpem.ln.gamma");
    nodes.ln_shift = ids.at("fpem.ln.shift");
  }
  nodes.mmoe.experts.resize(static_cast<size_t>(config_.n_experts));
  for (int e = 0; e < config_.n_experts; ++e) {
    const std::string prefix = "mmoe.expert" + std::to_string(e);
    auto& ex = nodes.mmoe.experts[static_cast<size_t>(e)];
    ex.w1 = ids.at(prefix + ".w1");
    ex.b1 = ids.at(prefix + ".b1");
    ex.w2 = ids.at(prefix + ".w2");
    ex.b2 = ids.at(prefix + ".b2");
  }
  nodes.mmoe.tasks.resize(static_cast<size_t>(config_.n_tasks));
  for (int t = 0; t < config_.n_tasks; ++t) {
    auto& task = nodes.mmoe.tasks[static_cast<size_t>(t)];
    task.gate_w = ids.at("mmoe.gate" + std::to_string(t) + ".w");
    task.gate_b = ids.at("mmoe.gate" + std::to_string(t) + ".b");
    task.head_w = ids.at("head" + std::to_string(t) + ".w");
    task.head_b = ids.at("head" + std::to_string(t) + ".b");
  }
  return nodes;
}

Tensor FimModel::soft_view_vector(const ParamStore& store,
                                  const InteractionRecord& record,
                                  ViewKey view) const {
  const auto idx = indexer_.indices(record);
  auto append_row = [&](std::vector<double>& out, int attribute) {
    const Tensor& table = store.get(
        std::string("emb.") + kAttributeNames[static_cast<size_t>(attribute)]);
    const int row = idx[static_cast<size_t>(attribute)];
    for (int c = 0; c < table.cols(); ++c) out.push_back(table.at(row, c));
  };
  std::vector<double> out;
  if (config_.view_attrs == ViewAttrMode::kAll) {
    out.reserve(static_cast<size_t>(config_.d()));
    for (int a = 0; a < kNumAttributes; ++a) append_row(out, a);
  } else {
    out.reserve(static_cast<size_t>(2 * config_.d_attr));
    int attr = 0;
    switch (view) {
      case ViewKey::kAuthor: attr = 1; break;
      case ViewKey::kBrand: attr = 4; break;
      case ViewKey::kCategory: attr = 5; break;
      case ViewKey::kPrice: attr = 7; break;
    }
    append_row(out, attr);
    append_row(out, 0);  // goods id
  }
  return Tensor::from(std::move(out));
}

std::vector<Tape::Id> FimModel::sample_forward(Tape& tape,
                                               const ParamNodes& nodes,
                                               const ParamStore& store,
                                               const Sample& sample) const {
  const int d = config_.d();
  const int n_max = config_.max_seq_len;

  // Keep the most recent events when the window exceeds the model length.
  std::vector<InteractionRecord> window = sample.window;
  if (static_cast<int>(window.size()) > n_max) {
    window.erase(window.begin(),
                 window.end() - static_cast<std::ptrdiff_t>(n_max));
  }
  const int n_real = static_cast<int>(window.size());
  if (n_real < 1) throw std::invalid_argument("model: empty behavior window");

  Tape::Id e_real = embed_sequence(tape, nodes.emb, indexer_, window);

  // Multi-view search + target attention over the selected rows.
  Tape::Id h_proj = -1;
  std::vector<Tape::Id> view_outputs;
  std::vector<bool> valid(static_cast<size_t>(n_real), true);
  Tape::Id e_target = -1;
  if (!config_.views.empty()) {
    e_target = embed_record(tape, nodes.emb, indexer_, sample.target);
  }
  for (ViewKey v : config_.views) {
    std::vector<double> scores(static_cast<size_t>(n_real), 0.0);
    if (config_.search == SearchMode::kHard) {
      for (int i = 0; i < n_real; ++i) {
        scores[static_cast<size_t>(i)] = score_hard(
            window[static_cast<size_t>(i)], sample.target, v, indexer_.price);
      }
    } else {
      const ViewKey wv = config_.share_soft_weights ? config_.views.front() : v;
      const Tensor& wb = store.get(view_param(wv, "soft.wb"));
      const Tensor& wt = store.get(view_param(wv, "soft.wt"));
      const Tensor e_t = soft_view_vector(store, sample.target, v);
      for (int i = 0; i < n_real; ++i) {
        const Tensor e_i =
            soft_view_vector(store, window[static_cast<size_t>(i)], v);
        scores[static_cast<size_t>(i)] = score_soft(e_i, e_t, wb, wt);
      }
    }
    ViewSelection sel =
        topk_select(v, scores, valid, config_.top_k, config_.search);
    if (sel.indices.empty()) {
      view_outputs.push_back(tape.input(Tensor::vec(d)));
      continue;
    }
    Tape::Id keys = tape.select_rows(e_real, sel.indices);
    view_outputs.push_back(target_attention(tape, e_target, keys,
                                            config_.attn_scoring,
                                            nodes.attn.at(v)));
  }
  if (!view_outputs.empty()) {
    Tape::Id h_concat = view_outputs.size() == 1 ? view_outputs[0]
                                                 : tape.concat(view_outputs);
    h_proj = project_views(tape, h_concat, nodes.proj_w, nodes.proj_b);
  }

  Tape::Id z = h_proj;
  if (config_.fpem_enabled) {
    // Zero pad rows in front so padding injects no spectral energy.
    Tape::Id e_padded = n_real == n_max
                            ? e_real
                            : tape.pad_rows(e_real, n_max, n_max - n_real);
    std::vector<bool> keep(static_cast<size_t>(n_max), false);
    for (int i = n_max - n_real; i < n_max; ++i) keep[static_cast<size_t>(i)] = true;

    const int l = rfft_len(n_max);
    BandMasks masks = config_.fpem_filter == FilterKind::kTrunc
                          ? band_masks_trunc(l, config_.fpem_p)
                          : band_masks_butter(l, config_.fpem_fc,
                                              config_.fpem_order);

    Tape::Id side_info = -1;
    if (config_.fpem_fusion == FusionMode::kBeta) {
      int purchases = 0;
      for (const auto& r : window) purchases += r.payment_amount > 0.0 ? 1 : 0;
      const bool flows_all = config_.sideinfo == SideInfoMode::kGrad;
      std::vector<SideSlice> slices;
      if (config_.sideinfo != SideInfoMode::kNone) {
        slices.push_back({"user_age", nodes.side_user_age,
                          user_age_bucket(sample.user_id, kUserAgeBuckets),
                          flows_all});
        slices.push_back({"user_gender", nodes.side_user_gender,
                          user_gender_bucket(sample.user_id, kUserGenderBuckets),
                          flows_all});
        slices.push_back({"item_brand", nodes.side_item_brand,
                          indexer_.brand.lookup(sample.target.brand),
                          flows_all});
        slices.push_back({"item_price", nodes.side_item_price,
                          indexer_.price.bucket(sample.target.price),
                          flows_all});
      }
      slices.push_back({"pay_len", nodes.side_pay_len,
                        pay_len_bucket(purchases, config_.max_seq_len + 1),
                        true});
      side_info = embed_side_info(tape, slices);
    }

    FpemOutput fpem = fpem_forward(tape, e_padded, side_info, masks,
                                   nodes.band_gate, nodes.high_gate,
                                   nodes.ln_gamma, nodes.ln_shift,
                                   config_.ln_eps, config_.fpem_fusion, keep);
    Tape::Id f_mean = tape.mean_rows(fpem.fused_seq, keep);
    z = h_proj < 0 ? f_mean : fuse(tape, h_proj, f_mean, config_.alpha);
  }
  if (z < 0) throw std::invalid_argument("model: no active branch");

  return mmoe_forward(tape, z, nodes.mmoe);
}

BatchNodes FimModel::build_batch(Tape& tape, const ParamStore& store,
                                 std::span<const Sample> batch,
                                 bool trainable) const {
  if (batch.empty()) throw std::invalid_argument("model: empty batch");
  ParamNodes nodes = register_params(tape, store, trainable);
  BatchNodes out;
  out.probs.reserve(batch.size());
  std::vector<std::vector<Tape::Id>> task_bces(
      static_cast<size_t>(config_.n_tasks));
  for (const Sample& sample : batch) {
    std::vector<Tape::Id> probs = sample_forward(tape, nodes, store, sample);
    for (int t = 0; t < config_.n_tasks; ++t) {
      const double label = t == 0 ? sample.label_click : sample.label_purchase;
      task_bces[static_cast<size_t>(t)].push_back(
          tape.bce(probs[static_cast<size_t>(t)], label));
    }
    out.probs.push_back(std::move(probs));
  }
  std::vector<Tape::Id> task_means;
  for (int t = 0; t < config_.n_tasks; ++t) {
    task_means.push_back(
        tape.smul(tape.add_n(task_bces[static_cast<size_t>(t)]),
                  1.0 / static_cast<double>(batch.size())));
  }
  out.task_losses = task_means;
  out.loss = task_means.size() == 1 ? task_means[0] : tape.add_n(task_means);
  return out;
}

double FimModel::loss_value(const ParamStore& store,
                            std::span<const Sample> batch) const {
  Tape tape;
  BatchNodes nodes = build_batch(tape, store, batch, /*trainable=*/false);
  return tape.value(nodes.loss).value();
}

double FimModel::gradients(std::span<const Sample> batch,
                           std::map<std::string, Tensor>* grads) const {
  Tape tape;
  BatchNodes nodes = build_batch(tape, params_, batch, /*trainable=*/true);
  tape.backward(nodes.loss);
  if (grads) {
    grads->clear();
    for (const auto& name : params_.names()) {
      (*grads)[name] = tape.grad_of(name);
    }
  }
  return tape.value(nodes.loss).value();
}

std::vector<std::vector<double>> FimModel::predict(
    std::span<const Sample> batch) const {
  Tape tape;
  BatchNodes nodes = build_batch(tape, params_, batch, /*trainable=*/false);
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& sample_probs : nodes.probs) {
    std::vector<double> row;
    row.reserve(sample_probs.size());
    for (Tape::Id id : sample_probs) row.push_back(tape.value(id).value());
    out.push_back(std::move(row));
  }
  return out;
}

std::set<std::string> FimModel::stopgrad_exempt_params() const {
  std::set<std::string> exempt;
  if (config_.fpem_enabled && config_.fpem_fusion == FusionMode::kBeta &&
      config_.sideinfo == SideInfoMode::kNoGrad) {
    exempt = {"side.user_age", "side.user_gender", "side.item_brand",
              "side.item_price"};
  }
  return exempt;
}

std::string FimModel::param_group(const std::string& name) {
  const auto dot = name.find('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

}  // namespace fim
