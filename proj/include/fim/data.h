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

#ifndef FIM_DATA_H_
#define FIM_DATA_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fim/embeddings.h"
#include "fim/records.h"

namespace fim {

struct PromoWindow {
  int start = 0;
  int end = 0;      // half-open [start, end)
  double boost = 1.0;
};

// Synthetic periodic-behavior generator settings. Each user plants a few
// categories with fixed per-category periods; scheduled purchases recur at
// the planted phase, the remaining steps explore other categories.
struct SyntheticConfig {
  int n_users = 2000;
  int seq_len = 64;
  int eval_steps = 8;  // number of target steps after the first full window
  std::vector<int> category_periods = {3, 4, 3, 4, 3, 4, 3, 4};
  double exploration_rate = 0.1;
  std::vector<PromoWindow> promo_windows;
  // Per-category [min, max) price ranges; derived defaults when empty.
  std::vector<std::pair<double, double>> price_ranges;
  uint64_t seed = 1;

  // Catalog structure. Goods map onto (brand, author) pairs in a stride
  // pattern, so each pair owns goods_per_category / (brands * authors) ids;
  // the pool is sized so fresh target goods stay available.
  int categories_per_user = 2;
  int goods_per_category = 256;
  int brands_per_category = 4;
  int authors_per_category = 4;
  double pref_strength = 0.8;  // chance an event uses the preferred goods pool

  // Target sampling. Negatives mix three cases: explored categories with
  // preferred-style attributes, off-preference attributes on a not-due
  // category, and planted-but-not-due categories with preferred attributes.
  double positive_rate = 0.5;
  double neg_explored_frac = 0.6;
  double neg_offpref_frac = 0.4;
  double click_in_set = 0.3;
  double click_out_set = 0.05;
};

// Ground truth of one planted habit.
struct PlantedSchedule {
  int category = 0;
  int period = 1;
  int phase = 0;
};

struct GenResult {
  std::vector<BehaviorSequence> streams;  // full event stream per user
  Dataset samples;
  std::map<std::string, std::vector<PlantedSchedule>> schedules;
  double max_price = 0.0;
};

// Fully deterministic given cfg.seed; each user draws from a stream seeded
// by (seed, user id). The positive label marks targets whose category is
// due at the target step under the user's planted schedule.
GenResult generate_synthetic(const SyntheticConfig& cfg);

// ---------------------------------------------------------------------------
// Dataset files. A dataset directory holds:
//   events.jsonl    one behavior record per line
//   targets.jsonl   one target + labels per line
//   vocab_<attr>.txt  token-per-line vocabularies (line 0 reserved)
//   manifest.json   seed, config hash, max price, counts, format version
// ---------------------------------------------------------------------------

struct DatasetManifest {
  int format_version = 1;
  uint64_t seed = 0;
  std::string config_hash;
  int n_users = 0;
  int seq_len = 0;
  int eval_steps = 0;
  double max_price = 0.0;
  int64_t n_events = 0;
  int64_t n_targets = 0;
};

struct LoadedData {
  std::vector<BehaviorSequence> streams;
  Dataset samples;
  AttributeIndexer indexer;
  DatasetManifest manifest;
};

void save_dataset(const std::string& dir, const GenResult& gen,
                  const SyntheticConfig& cfg, const std::string& config_hash);
LoadedData load_dataset(const std::string& dir);

// In-memory equivalent of save + load: builds vocabularies and the price
// bucketizer straight from the generated events and targets.
LoadedData dataset_from(GenResult gen, const SyntheticConfig& cfg);

// Low-level loaders, exposed for validation tests. Malformed lines raise
// errors naming the line number and the missing/invalid field.
std::vector<BehaviorSequence> load_events_jsonl(const std::string& path);
// Targets need the event streams to rebuild behavior windows.
Dataset load_targets_jsonl(const std::string& path,
                           const std::vector<BehaviorSequence>& streams,
                           int seq_len);

// Temporal split on the target step: samples with step <= cutoff train,
// later ones test. cutoff may be min_step - 1 (empty train) up to max_step
// (empty test); anything else is an error.
std::pair<Dataset, Dataset> split_temporal(Dataset dataset, int cutoff_step);

}  // namespace fim

#endif  // FIM_DATA_H_
