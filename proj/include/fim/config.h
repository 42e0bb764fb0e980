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

#ifndef FIM_CONFIG_H_
#define FIM_CONFIG_H_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fim/data.h"
#include "fim/model.h"

namespace fim {

// Exit-code-bearing error categories for the CLI: config errors exit 1,
// data errors 2, numeric failures 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Everything one experiment needs, resolved from flat key=value pairs.
struct RunConfig {
  SyntheticConfig data;
  ModelConfig model;
  double lr = 0.01;
  int batch_size = 256;
  int epochs = 1;
  uint64_t seed = 1;
  int cutoff = -1;      // target-step split point; derived when negative
  int metric_task = 1;  // 0 = click, 1 = purchase

  // Split point actually used (derived default: last quarter of the target
  // steps becomes the test set).
  int effective_cutoff() const;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Reads "key = value" lines; '#' starts a comment. Later keys win.
KeyValues read_config_file(const std::string& path);

// Applies keys in order onto defaults. Unknown keys, bad values, and
// out-of-range settings raise ConfigError naming the key. The `baseline`
// key expands to presets (none | fpem_off | sim_hard) and may be overridden
// by later keys.
RunConfig parse_run_config(const KeyValues& kv);

// Canonical listing of every resolved field, one key=value per line,
// sorted; two runs with equal canonical text behave identically.
std::string canonical_config(const RunConfig& cfg);

// FNV-1a hash of the canonical text, in hex.
std::string config_hash(const RunConfig& cfg);

}  // namespace fim

#endif  // FIM_CONFIG_H_
