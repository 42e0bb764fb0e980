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

#ifndef FIM_ADAM_H_
#define FIM_ADAM_H_

#include <map>
#include <string>

#include "fim/params.h"
#include "fim/tensor.h"

namespace fim {

// Per-parameter Adam accumulators. Moments are shaped like the parameter;
// t counts completed steps.
struct AdamState {
  Tensor m;
  Tensor v;
  int64_t t = 0;
};

// One bias-corrected Adam update. Deterministic given inputs.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

// Applies adam_step across a ParamStore, creating state lazily per name.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(ParamStore& params, const std::map<std::string, Tensor>& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  std::map<std::string, AdamState> states_;
};

}  // namespace fim

#endif  // FIM_ADAM_H_
