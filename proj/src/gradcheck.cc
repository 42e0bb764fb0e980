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

#include "fim/gradcheck.h"

#include <cmath>
#include <stdexcept>

namespace fim {

namespace {

double eval(const std::function<double(const ParamStore&)>& loss_fn,
            const ParamStore& params) {
  const double v = loss_fn(params);
  if (!std::isfinite(v)) {
    throw std::runtime_error("grad_check: non-finite loss");
  }
  return v;
}

}  // namespace

GradCheckReport grad_check(
    const std::function<double(const ParamStore&)>& loss_fn,
    ParamStore& params, const std::map<std::string, Tensor>& analytic,
    double h, const std::set<std::string>& exempt) {
  if (h < 1e-7 || h > 1e-3) {
    throw std::invalid_argument("grad_check: h out of [1e-7, 1e-3]");
  }
  GradCheckReport report;
  for (const auto& name : params.names()) {
    Tensor& w = params.get(name);
    auto it = analytic.find(name);
    const bool is_exempt = exempt.count(name) > 0;
    double worst = 0.0;
    double fd_mag = 0.0;
    for (int64_t i = 0; i < w.size(); ++i) {
      const double orig = w.at(i);
      w.at(i) = orig + h;
      const double f_plus = eval(loss_fn, params);
      w.at(i) = orig - h;
      const double f_minus = eval(loss_fn, params);
      w.at(i) = orig;
      const double fd = (f_plus - f_minus) / (2.0 * h);
      const double an = (it == analytic.end()) ? 0.0 : it->second.at(i);
      if (is_exempt) {
        if (an != 0.0) {
          throw std::runtime_error(
              "grad_check: exempt parameter has nonzero analytic gradient: " +
              name);
        }
        fd_mag = std::max(fd_mag, std::fabs(fd));
        continue;
      }
      const double denom = std::max({1.0, std::fabs(an), std::fabs(fd)});
      const double rel = std::fabs(an - fd) / denom;
      if (rel > worst) worst = rel;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_coord = i;
      }
    }
    if (is_exempt) {
      report.exempt_fd_mag[name] = fd_mag;
    } else {
      report.per_param[name] = worst;
    }
  }
  return report;
}

}  // namespace fim
