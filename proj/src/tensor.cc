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

#include "fim/tensor.h"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fim {

namespace {
int64_t shape_size(const std::vector<int>& shape) {
  int64_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("tensor: negative dimension");
    n *= d;
  }
  return n;
}
}  // namespace

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  data.assign(static_cast<size_t>(shape_size(shape)), 0.0);
}

Tensor Tensor::scalar(double v) {
  Tensor t({1});
  t.data[0] = v;
  return t;
}

Tensor Tensor::vec(int n) { return Tensor({n}); }

Tensor Tensor::mat(int rows, int cols) { return Tensor({rows, cols}); }

Tensor Tensor::from(std::vector<double> values) {
  Tensor t;
  t.shape = {static_cast<int>(values.size())};
  t.data = std::move(values);
  return t;
}

Tensor Tensor::from(int rows, int cols, std::vector<double> values) {
  if (static_cast<int64_t>(values.size()) !=
      static_cast<int64_t>(rows) * cols) {
    throw std::invalid_argument("tensor: data length does not match shape");
  }
  Tensor t;
  t.shape = {rows, cols};
  t.data = std::move(values);
  return t;
}

Tensor Tensor::randn(const std::vector<int>& shape, std::mt19937_64& rng,
                     double stddev) {
  Tensor t(shape);
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.data) v = dist(rng);
  return t;
}

int Tensor::rows() const {
  if (rank() != 2) throw std::invalid_argument("tensor: rows() needs rank 2");
  return shape[0];
}

int Tensor::cols() const {
  if (rank() != 2) throw std::invalid_argument("tensor: cols() needs rank 2");
  return shape[1];
}

double Tensor::value() const {
  if (size() != 1) throw std::invalid_argument("tensor: value() needs size 1");
  return data[0];
}

bool Tensor::all_finite() const {
  for (double v : data) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::fill(double v) {
  for (auto& x : data) x = v;
}

}  // namespace fim
