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

#ifndef FIM_GRADCHECK_H_
#define FIM_GRADCHECK_H_

#include <functional>
#include <map>
#include <set>
#include <string>

#include "fim/params.h"
#include "fim/tensor.h"

namespace fim {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  int64_t worst_coord = -1;
  // Max relative error per checked parameter.
  std::map<std::string, double> per_param;
  // Parameters exempted from the finite-difference comparison because their
  // gradients are stopped by contract. For those the analytic gradient must
  // be exactly zero; the entry records the largest observed |FD| so callers
  // can verify the forward path still depends on them.
  std::map<std::string, double> exempt_fd_mag;
};

// Compares analytic gradients against central differences
// (f(w+h) - f(w-h)) / 2h, coordinate by coordinate, over every parameter in
// the store. Relative error uses max(1, |analytic|, |fd|) as denominator.
// Throws if the loss evaluates to a non-finite value.
GradCheckReport grad_check(
    const std::function<double(const ParamStore&)>& loss_fn,
    ParamStore& params, const std::map<std::string, Tensor>& analytic,
    double h, const std::set<std::string>& exempt = {});

}  // namespace fim

#endif  // FIM_GRADCHECK_H_
