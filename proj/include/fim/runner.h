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

#ifndef FIM_RUNNER_H_
#define FIM_RUNNER_H_

#include <optional>
#include <string>
#include <vector>

#include "fim/config.h"
#include "fim/data.h"
#include "fim/gradcheck.h"
#include "fim/model.h"

namespace fim {

// One metrics CSV row: step 0 carries the pre-update loss of the first
// batch; later rows land at epoch boundaries with test metrics.
struct MetricRow {
  int64_t step = 0;
  int task = 0;
  double loss = 0.0;
  std::optional<double> auc;
  std::optional<double> gauc;
};

struct TrainResult {
  std::vector<MetricRow> rows;
  // Final test metrics of the configured metric task.
  std::optional<double> final_auc;
  std::optional<double> final_gauc;
  double wall_seconds = 0.0;
};

// Generates the synthetic dataset and writes events/targets/vocabularies
// plus the manifest into out_dir.
void run_generate(const RunConfig& cfg, const std::string& out_dir);

// Trains on the temporal train split and evaluates per epoch on the test
// split. When out_dir is nonempty, writes metrics.csv and model.ckpt there
// (byte-identical across reruns with the same config and seed). A trained
// model can be returned through `trained` for callers that evaluate further.
TrainResult run_train(const RunConfig& cfg, const LoadedData& data,
                      const std::string& out_dir,
                      FimModel* trained = nullptr);

// Test metrics of a checkpoint restored from disk.
TrainResult run_eval(const RunConfig& cfg, const LoadedData& data,
                     const std::string& checkpoint_path);

// One row per grid point: config hash, human-readable assignment, metrics,
// wall time. Grid keys are "grid.<config key>" with comma-separated values;
// "grid.views = powerset" expands to all 16 view subsets.
struct AblationRow {
  std::string hash;
  std::string assignment;
  std::optional<double> auc;
  std::optional<double> gauc;
  double wall_seconds = 0.0;
};
std::vector<AblationRow> run_ablate(const KeyValues& base_config,
                                    const std::string& out_csv);

// Full-pipeline finite-difference check on a small generated batch.
struct GradCheckRun {
  GradCheckReport report;
  std::map<std::string, double> group_max;  // per parameter group
  std::set<std::string> exempt_groups;
  bool passed = false;
};
GradCheckRun run_gradcheck(const RunConfig& cfg);

// Serializes metric rows with a stable format: step,task,loss,auc,gauc.
std::string metrics_csv(const std::vector<MetricRow>& rows);

}  // namespace fim

#endif  // FIM_RUNNER_H_
