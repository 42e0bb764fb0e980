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

#ifndef FIM_PARAMS_H_
#define FIM_PARAMS_H_

#include <map>
#include <string>
#include <vector>

#include "fim/tensor.h"

namespace fim {

// All trainable tensors, addressable by stable names. Iteration follows
// creation order, which keeps checkpoints and optimizer state deterministic.
class ParamStore {
 public:
  Tensor& create(const std::string& name, Tensor init);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  int64_t total_size() const;

  // Checkpoint file layout (all integers little-endian):
  //   8 bytes   magic "FIMCKPT1"
  //   u32       format version (1)
  //   u32       parameter count
  //   per parameter:
  //     u32       name length, then name bytes
  //     u32       rank, then u32 dims[rank]
  //     f64[...]  row-major values
  void save(const std::string& path) const;
  static ParamStore load(const std::string& path);

 private:
  std::map<std::string, Tensor> values_;
  std::vector<std::string> order_;
};

}  // namespace fim

#endif  // FIM_PARAMS_H_
