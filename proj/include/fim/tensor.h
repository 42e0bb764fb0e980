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

#ifndef FIM_TENSOR_H_
#define FIM_TENSOR_H_

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace fim {

// Dense row-major tensor of 64-bit reals. Rank 1 (vectors) and rank 2
// (matrices) cover everything the model needs.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  static Tensor scalar(double v);
  static Tensor vec(int n);
  static Tensor mat(int rows, int cols);
  static Tensor from(std::vector<double> values);  // rank-1
  static Tensor from(int rows, int cols, std::vector<double> values);
  static Tensor randn(const std::vector<int>& shape, std::mt19937_64& rng,
                      double stddev);

  int rank() const { return static_cast<int>(shape.size()); }
  int dim(int i) const { return shape[i]; }
  int rows() const;  // rank-2 only
  int cols() const;
  int64_t size() const { return static_cast<int64_t>(data.size()); }
  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool empty() const { return data.empty(); }

  double& at(int64_t i) { return data[static_cast<size_t>(i)]; }
  double at(int64_t i) const { return data[static_cast<size_t>(i)]; }
  // Rank-2 element access; hot path, so no rank validation here.
  double& at(int r, int c) {
    return data[static_cast<size_t>(r) * static_cast<size_t>(shape[1]) + c];
  }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * static_cast<size_t>(shape[1]) + c];
  }
  // Single-element read for scalar nodes.
  double value() const;

  bool all_finite() const;
  void fill(double v);

  std::vector<int> shape;
  std::vector<double> data;
};

// L x D complex spectrum storage (half-spectrum rows, feature columns).
struct ComplexTensor {
  std::vector<int> shape;
  std::vector<std::complex<double>> data;

  int rows() const { return shape[0]; }
  int cols() const { return shape.size() > 1 ? shape[1] : 1; }
  std::complex<double>& at(int r, int c) {
    return data[static_cast<size_t>(r) * cols() + c];
  }
  const std::complex<double>& at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols() + c];
  }
};

}  // namespace fim

#endif  // FIM_TENSOR_H_
