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

#include "fim/adam.h"

#include <cmath>
#include <stdexcept>

namespace fim {

void adam_step(Tensor& param, const Tensor& grad, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
  if (!param.same_shape(grad)) {
    throw std::invalid_argument("adam_step: param/grad shape mismatch");
  }
  if (state.m.empty()) {
    state.m = Tensor(param.shape);
    state.v = Tensor(param.shape);
  }
  if (!state.m.same_shape(param)) {
    throw std::invalid_argument("adam_step: state shape mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (int64_t i = 0; i < param.size(); ++i) {
    const double g = grad.at(i);
    state.m.at(i) = beta1 * state.m.at(i) + (1.0 - beta1) * g;
    state.v.at(i) = beta2 * state.v.at(i) + (1.0 - beta2) * g * g;
    const double mhat = state.m.at(i) / bc1;
    const double vhat = state.v.at(i) / bc2;
    param.at(i) -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}

void AdamOptimizer::step(ParamStore& params,
                         const std::map<std::string, Tensor>& grads) {
  for (const auto& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end()) continue;
    adam_step(params.get(name), it->second, states_[name], lr_, beta1_, beta2_,
              eps_);
  }
}

}  // namespace fim
