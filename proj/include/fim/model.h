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

#ifndef FIM_MODEL_H_
#define FIM_MODEL_H_

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fim/embeddings.h"
#include "fim/fpem.h"
#include "fim/mss.h"
#include "fim/params.h"
#include "fim/prediction.h"
#include "fim/records.h"
#include "fim/tape.h"

namespace fim {

enum class SideInfoMode { kNone, kGrad, kNoGrad };

struct ModelConfig {
  int d_attr = 4;        // per-attribute embedding width; D = 9 * d_attr
  int max_seq_len = 64;  // sequences are left-padded/truncated to this
  int top_k = 16;

  std::vector<ViewKey> views = all_views();
  SearchMode search = SearchMode::kHard;
  ViewAttrMode view_attrs = ViewAttrMode::kAll;
  bool share_soft_weights = false;
  int soft_proj_dim = 16;
  AttnScoring attn_scoring = AttnScoring::kMlp;

  bool fpem_enabled = true;
  FilterKind fpem_filter = FilterKind::kTrunc;
  int fpem_p = 5;
  double fpem_fc = 0.125;
  int fpem_order = 6;
  FusionMode fpem_fusion = FusionMode::kBeta;
  SideInfoMode sideinfo = SideInfoMode::kNoGrad;
  bool share_gates = false;

  double alpha = 0.5;
  int n_experts = 4;
  int n_tasks = 2;
  double ln_eps = 1e-5;
  uint64_t init_seed = 1;

  int d() const { return kNumAttributes * d_attr; }
};

inline constexpr int kUserAgeBuckets = 8;
inline constexpr int kUserGenderBuckets = 3;

// Node handles of the per-batch graph.
struct BatchNodes {
  Tape::Id loss = -1;                        // mean over samples, sum of tasks
  std::vector<Tape::Id> task_losses;         // per-task means
  std::vector<std::vector<Tape::Id>> probs;  // [sample][task]
};

// The full pipeline: embeddings -> multi-view search + target attention,
// frequency band split with gated fusion -> projection/fusion -> MMoE heads.
class FimModel {
 public:
  FimModel(ModelConfig config, AttributeIndexer indexer);

  const ModelConfig& config() const { return config_; }
  const AttributeIndexer& indexer() const { return indexer_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  // Builds the graph for a batch on the given tape using the given store
  // (usually this model's own). With trainable == false the graph carries
  // no gradient bookkeeping.
  BatchNodes build_batch(Tape& tape, const ParamStore& store,
                         std::span<const Sample> batch, bool trainable) const;

  // Forward-only scalar loss, for finite-difference checks.
  double loss_value(const ParamStore& store,
                    std::span<const Sample> batch) const;

  // Loss plus gradients for every parameter (exact zeros when unused).
  double gradients(std::span<const Sample> batch,
                   std::map<std::string, Tensor>* grads) const;

  // Per-task probabilities for each sample.
  std::vector<std::vector<double>> predict(
      std::span<const Sample> batch) const;

  // Parameters whose every gradient path is stopped under this config;
  // finite-difference checks must exempt them.
  std::set<std::string> stopgrad_exempt_params() const;

  // Top-level component for each parameter name ("emb", "mss", ...).
  static std::string param_group(const std::string& name);

 private:
  struct ParamNodes;
  ParamNodes register_params(Tape& tape, const ParamStore& store,
                             bool trainable) const;
  std::vector<Tape::Id> sample_forward(Tape& tape, const ParamNodes& nodes,
                                       const ParamStore& store,
                                       const Sample& sample) const;
  // Raw (value-level) view vector fed to soft-search scoring.
  Tensor soft_view_vector(const ParamStore& store,
                          const InteractionRecord& record, ViewKey view) const;

  ModelConfig config_;
  AttributeIndexer indexer_;
  ParamStore params_;
};

}  // namespace fim

#endif  // FIM_MODEL_H_
