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

#ifndef FIM_TAPE_H_
#define FIM_TAPE_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "fim/tensor.h"

namespace fim {

// Reverse-mode gradient tape. Nodes are created in topological order by
// construction; backward() replays records in exact reverse order.
//
// One tape per training step; not shared across threads.
class Tape {
 public:
  using Id = int;

  // Leaf holding a constant (no gradient tracked).
  Id input(Tensor value);
  // Named trainable leaf. Names must be unique per tape. When trainable is
  // false the leaf behaves like input() but stays addressable by name.
  Id param(const std::string& name, Tensor value, bool trainable = true);

  // Elementwise and linear-algebra ops.
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id smul(Id a, double c);
  Id add_rowvec(Id matrix, Id row);        // matrix + broadcast row vector
  Id matmul(Id a, Id b);                   // (n x k) * (k x m)
  Id vecmat(Id v, Id m);                   // (k) * (k x m) -> (m)
  Id matvec(Id m, Id v);                   // (n x k) * (k) -> (n)
  Id dot(Id a, Id b);                      // (k) . (k) -> scalar
  Id relu(Id a);
  Id sigmoid(Id a);
  Id softmax(Id v);                        // rank-1
  Id concat(const std::vector<Id>& parts);       // rank-1 pieces
  Id concat_cols(const std::vector<Id>& parts);  // rank-2, same row count
  Id select_rows(Id matrix, std::vector<int> indices);
  Id pad_rows(Id matrix, int total_rows, int offset);
  Id broadcast_row(Id v, int n_rows);
  Id mean_rows(Id matrix, std::vector<bool> keep);  // masked mean over rows
  Id add_n(const std::vector<Id>& parts);           // same-shape sum
  Id scalar_bmul(Id scalar, Id tensor);             // broadcast scalar * tensor
  Id mix(const std::vector<Id>& vectors, Id weights);  // sum_e w[e] * v_e

  // Per-row layer normalization of an (n x d) matrix with affine parameters
  // gamma, shift of dimension d. Each row is normalized to zero mean and
  // unit variance (population) before the affine transform.
  Id layer_norm(Id x, Id gamma, Id shift, double eps);

  // Frequency-domain per-bin gain applied column-wise; the mask is a
  // constant. The operator is self-adjoint, so backward applies it again.
  Id band_filter(Id x, std::vector<double> mask);

  // Three band filters sharing one forward transform per column; the result
  // stacks the filtered copies as rows [low; band; high], shape (3N x D).
  Id band_split3(Id x, std::vector<double> low, std::vector<double> band,
                 std::vector<double> high);

  // Contiguous row range [offset, offset + n_rows); cheaper than
  // select_rows for block slices.
  Id slice_rows(Id matrix, int offset, int n_rows);

  // Scoring features for target attention: row r is [q, k_r, q * k_r],
  // shape (K x 3D). Fuses broadcast, concat, and elementwise product.
  Id attn_features(Id query, Id keys);

  // Forward identity whose backward contribution is dropped.
  Id stop_gradient(Id a);

  // Binary cross-entropy of a scalar probability against a fixed label,
  // with the probability clamped to [eps, 1 - eps], eps = 1e-12.
  Id bce(Id prob, double label);

  const Tensor& value(Id id) const { return nodes_[static_cast<size_t>(id)].value; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  // Clears previous gradients and replays the tape from `loss` (a scalar)
  // in reverse creation order. May be called repeatedly; results are
  // deterministic and identical across replays.
  void backward(Id loss);

  // Gradient of a node after backward(); zeros if the node was not reached.
  Tensor grad(Id id) const;
  // Gradient accumulator for a named parameter; exact zeros when the
  // parameter was never used by the loss.
  Tensor grad_of(const std::string& name) const;
  bool has_param(const std::string& name) const;
  const std::vector<std::string>& param_names() const { return param_order_; }

 private:
  struct Node {
    Tensor value;
    bool needs_grad = false;
    std::function<void(Tape&, Id)> backward;
  };

  Id emplace(Tensor value, bool needs_grad,
             std::function<void(Tape&, Id)> backward);
  bool needs(Id id) const { return nodes_[static_cast<size_t>(id)].needs_grad; }
  // Accumulator for a node, allocated as zeros on first touch.
  Tensor& grad_acc(Id id);
  void accumulate(Id parent, const Tensor& g);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;
  std::map<std::string, Id> params_;
  std::vector<std::string> param_order_;
};

}  // namespace fim

#endif  // FIM_TAPE_H_
