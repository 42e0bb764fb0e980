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

#include "fim/tape.h"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "fim/fft.h"

namespace fim {

namespace {

constexpr double kBceEps = 1e-12;

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Tape::Id Tape::emplace(Tensor value, bool needs_grad,
                       std::function<void(Tape&, Id)> backward) {
  Node node;
  node.value = std::move(value);
  node.needs_grad = needs_grad;
  node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::input(Tensor value) {
  return emplace(std::move(value), false, nullptr);
}

Tape::Id Tape::param(const std::string& name, Tensor value, bool trainable) {
  require(!params_.count(name), "tape: duplicate parameter name");
  Id id = emplace(std::move(value), trainable, nullptr);
  params_[name] = id;
  param_order_.push_back(name);
  return id;
}

Tape::Id Tape::add(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require(va.same_shape(vb), "add: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.size(); ++i) out.at(i) += vb.at(i);
  return emplace(std::move(out), needs(a) || needs(b),
                 [a, b](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   t.accumulate(a, g);
                   t.accumulate(b, g);
                 });
}

Tape::Id Tape::sub(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require(va.same_shape(vb), "sub: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.size(); ++i) out.at(i) -= vb.at(i);
  return emplace(std::move(out), needs(a) || needs(b),
                 [a, b](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   t.accumulate(a, g);
                   if (!t.needs(b)) return;
                   Tensor neg = g;
                   for (auto& v : neg.data) v = -v;
                   t.accumulate(b, neg);
                 });
}

Tape::Id Tape::mul(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require(va.same_shape(vb), "mul: shape mismatch");
  Tensor out = va;
  for (int64_t i = 0; i < out.size(); ++i) out.at(i) *= vb.at(i);
  return emplace(std::move(out), needs(a) || needs(b),
                 [a, b](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   if (t.needs(a)) {
                     Tensor da = g;
                     const Tensor& vb2 = t.value(b);
                     for (int64_t i = 0; i < da.size(); ++i) da.at(i) *= vb2.at(i);
                     t.accumulate(a, da);
                   }
                   if (t.needs(b)) {
                     Tensor db = g;
                     const Tensor& va2 = t.value(a);
                     for (int64_t i = 0; i < db.size(); ++i) db.at(i) *= va2.at(i);
                     t.accumulate(b, db);
                   }
                 });
}

Tape::Id Tape::smul(Id a, double c) {
  Tensor out = value(a);
  for (auto& v : out.data) v *= c;
  return emplace(std::move(out), needs(a), [a, c](Tape& t, Id self) {
    Tensor g = t.grad_acc(self);
    for (auto& v : g.data) v *= c;
    t.accumulate(a, g);
  });
}

Tape::Id Tape::add_rowvec(Id matrix, Id row) {
  const Tensor& m = value(matrix);
  const Tensor& v = value(row);
  require(m.rank() == 2 && v.rank() == 1 && m.cols() == v.dim(0),
          "add_rowvec: shape mismatch");
  Tensor out = m;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out.at(r, c) += v.at(c);
  }
  return emplace(std::move(out), needs(matrix) || needs(row),
                 [matrix, row](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   t.accumulate(matrix, g);
                   if (!t.needs(row)) return;
                   Tensor dv = Tensor::vec(g.cols());
                   for (int r = 0; r < g.rows(); ++r) {
                     for (int c = 0; c < g.cols(); ++c) dv.at(c) += g.at(r, c);
                   }
                   t.accumulate(row, dv);
                 });
}

namespace {

// out(n x m) += A(n x k) * B(k x m), row-major raw loops.
void matmul_acc(const double* a, const double* b, double* out, int n, int k,
                int m) {
  for (int i = 0; i < n; ++i) {
    const double* arow = a + static_cast<size_t>(i) * k;
    double* orow = out + static_cast<size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<size_t>(p) * m;
      for (int j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
}

// out(n x k) += G(n x m) * B^T, i.e. out(i, p) += sum_j g(i, j) b(p, j).
void matmul_bt_acc(const double* g, const double* b, double* out, int n,
                   int k, int m) {
  for (int i = 0; i < n; ++i) {
    const double* grow = g + static_cast<size_t>(i) * m;
    double* orow = out + static_cast<size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double* brow = b + static_cast<size_t>(p) * m;
      double s = 0.0;
      for (int j = 0; j < m; ++j) s += grow[j] * brow[j];
      orow[p] += s;
    }
  }
}

}  // namespace

Tape::Id Tape::matmul(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require(va.rank() == 2 && vb.rank() == 2 && va.cols() == vb.rows(),
          "matmul: shape mismatch");
  const int n = va.rows(), k = va.cols(), m = vb.cols();
  Tensor out = Tensor::mat(n, m);
  matmul_acc(va.data.data(), vb.data.data(), out.data.data(), n, k, m);
  return emplace(std::move(out), needs(a) || needs(b),
                 [a, b, n, k, m](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   if (t.needs(a)) {
                     Tensor da = Tensor::mat(n, k);
                     matmul_bt_acc(g.data.data(), t.value(b).data.data(),
                                   da.data.data(), n, k, m);
                     t.accumulate(a, da);
                   }
                   if (t.needs(b)) {
                     // db = A^T G: accumulate row p of db from column p of A.
                     Tensor db = Tensor::mat(k, m);
                     const Tensor& va2 = t.value(a);
                     for (int i = 0; i < n; ++i) {
                       const double* arow =
                           va2.data.data() + static_cast<size_t>(i) * k;
                       const double* grow =
                           g.data.data() + static_cast<size_t>(i) * m;
                       for (int p = 0; p < k; ++p) {
                         const double av = arow[p];
                         if (av == 0.0) continue;
                         double* drow =
                             db.data.data() + static_cast<size_t>(p) * m;
                         for (int j = 0; j < m; ++j) drow[j] += av * grow[j];
                       }
                     }
                     t.accumulate(b, db);
                   }
                 });
}

Tape::Id Tape::vecmat(Id v, Id m) {
  const Tensor& vv = value(v);
  const Tensor& vm = value(m);
  require(vv.rank() == 1 && vm.rank() == 2 && vv.dim(0) == vm.rows(),
          "vecmat: shape mismatch");
  const int k = vm.rows(), cols = vm.cols();
  Tensor out = Tensor::vec(cols);
  for (int p = 0; p < k; ++p) {
    const double av = vv.at(p);
    if (av == 0.0) continue;
    for (int j = 0; j < cols; ++j) out.at(j) += av * vm.at(p, j);
  }
  return emplace(std::move(out), needs(v) || needs(m),
                 [v, m, k, cols](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   if (t.needs(v)) {
                     Tensor dv = Tensor::vec(k);
                     const Tensor& vm2 = t.value(m);
                     for (int p = 0; p < k; ++p) {
                       double s = 0.0;
                       for (int j = 0; j < cols; ++j) s += vm2.at(p, j) * g.at(j);
                       dv.at(p) = s;
                     }
                     t.accumulate(v, dv);
                   }
                   if (t.needs(m)) {
                     Tensor dm = Tensor::mat(k, cols);
                     const Tensor& vv2 = t.value(v);
                     for (int p = 0; p < k; ++p) {
                       const double av = vv2.at(p);
                       if (av == 0.0) continue;
                       for (int j = 0; j < cols; ++j) dm.at(p, j) = av * g.at(j);
                     }
                     t.accumulate(m, dm);
                   }
                 });
}

Tape::Id Tape::matvec(Id m, Id v) {
  const Tensor& vm = value(m);
  const Tensor& vv = value(v);
  require(vm.rank() == 2 && vv.rank() == 1 && vm.cols() == vv.dim(0),
          "matvec: shape mismatch");
  const int n = vm.rows(), k = vm.cols();
  Tensor out = Tensor::vec(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int p = 0; p < k; ++p) s += vm.at(i, p) * vv.at(p);
    out.at(i) = s;
  }
  return emplace(std::move(out), needs(m) || needs(v),
                 [m, v, n, k](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   if (t.needs(m)) {
                     Tensor dm = Tensor::mat(n, k);
                     const Tensor& vv2 = t.value(v);
                     for (int i = 0; i < n; ++i) {
                       const double gv = g.at(i);
                       if (gv == 0.0) continue;
                       for (int p = 0; p < k; ++p) dm.at(i, p) = gv * vv2.at(p);
                     }
                     t.accumulate(m, dm);
                   }
                   if (t.needs(v)) {
                     Tensor dv = Tensor::vec(k);
                     const Tensor& vm2 = t.value(m);
                     for (int i = 0; i < n; ++i) {
                       const double gv = g.at(i);
                       if (gv == 0.0) continue;
                       for (int p = 0; p < k; ++p) dv.at(p) += gv * vm2.at(i, p);
                     }
                     t.accumulate(v, dv);
                   }
                 });
}

Tape::Id Tape::dot(Id a, Id b) {
  const Tensor& va = value(a);
  const Tensor& vb = value(b);
  require(va.rank() == 1 && va.same_shape(vb), "dot: shape mismatch");
  double s = 0.0;
  for (int64_t i = 0; i < va.size(); ++i) s += va.at(i) * vb.at(i);
  return emplace(Tensor::scalar(s), needs(a) || needs(b),
                 [a, b](Tape& t, Id self) {
                   const double g = t.grad_acc(self).value();
                   if (t.needs(a)) {
                     Tensor da = t.value(b);
                     for (auto& x : da.data) x *= g;
                     t.accumulate(a, da);
                   }
                   if (t.needs(b)) {
                     Tensor db = t.value(a);
                     for (auto& x : db.data) x *= g;
                     t.accumulate(b, db);
                   }
                 });
}

Tape::Id Tape::relu(Id a) {
  Tensor out = value(a);
  for (auto& v : out.data) v = v > 0.0 ? v : 0.0;
  return emplace(std::move(out), needs(a), [a](Tape& t, Id self) {
    Tensor g = t.grad_acc(self);
    const Tensor& x = t.value(a);
    for (int64_t i = 0; i < g.size(); ++i) {
      if (x.at(i) <= 0.0) g.at(i) = 0.0;
    }
    t.accumulate(a, g);
  });
}

Tape::Id Tape::sigmoid(Id a) {
  Tensor out = value(a);
  for (auto& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return emplace(std::move(out), needs(a), [a](Tape& t, Id self) {
    Tensor g = t.grad_acc(self);
    const Tensor& y = t.value(self);
    for (int64_t i = 0; i < g.size(); ++i) {
      const double yi = y.at(i);
      g.at(i) *= yi * (1.0 - yi);
    }
    t.accumulate(a, g);
  });
}

Tape::Id Tape::softmax(Id v) {
  const Tensor& x = value(v);
  require(x.rank() == 1, "softmax: rank-1 input expected");
  Tensor out = x;
  double mx = out.at(0);
  for (double t : out.data) mx = std::max(mx, t);
  double z = 0.0;
  for (auto& t : out.data) {
    t = std::exp(t - mx);
    z += t;
  }
  for (auto& t : out.data) t /= z;
  return emplace(std::move(out), needs(v), [v](Tape& t, Id self) {
    const Tensor& g = t.grad_acc(self);
    const Tensor& y = t.value(self);
    double gy = 0.0;
    for (int64_t i = 0; i < g.size(); ++i) gy += g.at(i) * y.at(i);
    Tensor dv = y;
    for (int64_t i = 0; i < dv.size(); ++i) dv.at(i) = y.at(i) * (g.at(i) - gy);
    t.accumulate(v, dv);
  });
}

Tape::Id Tape::concat(const std::vector<Id>& parts) {
  require(!parts.empty(), "concat: no parts");
  int total = 0;
  bool ng = false;
  for (Id p : parts) {
    require(value(p).rank() == 1, "concat: rank-1 parts expected");
    total += value(p).dim(0);
    ng = ng || needs(p);
  }
  Tensor out = Tensor::vec(total);
  int off = 0;
  for (Id p : parts) {
    const Tensor& vp = value(p);
    for (int i = 0; i < vp.dim(0); ++i) out.at(off + i) = vp.at(i);
    off += vp.dim(0);
  }
  return emplace(std::move(out), ng, [parts](Tape& t, Id self) {
    const Tensor& g = t.grad_acc(self);
    int off2 = 0;
    for (Id p : parts) {
      const int len = t.value(p).dim(0);
      if (t.needs(p)) {
        Tensor dp = Tensor::vec(len);
        for (int i = 0; i < len; ++i) dp.at(i) = g.at(off2 + i);
        t.accumulate(p, dp);
      }
      off2 += len;
    }
  });
}

Tape::Id Tape::concat_cols(const std::vector<Id>& parts) {
  require(!parts.empty(), "concat_cols: no parts");
  const int n = value(parts[0]).rows();
  int total = 0;
  bool ng = false;
  for (Id p : parts) {
    require(value(p).rank() == 2 && value(p).rows() == n,
            "concat_cols: row mismatch");
    total += value(p).cols();
    ng = ng || needs(p);
  }
  Tensor out = Tensor::mat(n, total);
  int off = 0;
  for (Id p : parts) {
    const Tensor& vp = value(p);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < vp.cols(); ++c) out.at(r, off + c) = vp.at(r, c);
    }
    off += vp.cols();
  }
  return emplace(std::move(out), ng, [parts, n](Tape& t, Id self) {
    const Tensor& g = t.grad_acc(self);
    int off2 = 0;
    for (Id p : parts) {
      const int w = t.value(p).cols();
      if (t.needs(p)) {
        Tensor dp = Tensor::mat(n, w);
        for (int r = 0; r < n; ++r) {
          for (int c = 0; c < w; ++c) dp.at(r, c) = g.at(r, off2 + c);
        }
        t.accumulate(p, dp);
      }
      off2 += w;
    }
  });
}

Tape::Id Tape::select_rows(Id matrix, std::vector<int> indices) {
  const Tensor& m = value(matrix);
  require(m.rank() == 2, "select_rows: rank-2 input expected");
  const int cols = m.cols();
  Tensor out = Tensor::mat(static_cast<int>(indices.size()), cols);
  for (size_t r = 0; r < indices.size(); ++r) {
    require(indices[r] >= 0 && indices[r] < m.rows(),
            "select_rows: index out of range");
    for (int c = 0; c < cols; ++c) {
      out.at(static_cast<int>(r), c) = m.at(indices[r], c);
    }
  }
  return emplace(std::move(out), needs(matrix),
                 [matrix, idx = std::move(indices), cols](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   Tensor dm(t.value(matrix).shape);
                   for (size_t r = 0; r < idx.size(); ++r) {
                     for (int c = 0; c < cols; ++c) {
                       dm.at(idx[r], c) += g.at(static_cast<int>(r), c);
                     }
                   }
                   t.accumulate(matrix, dm);
                 });
}

Tape::Id Tape::pad_rows(Id matrix, int total_rows, int offset) {
  const Tensor& m = value(matrix);
  require(m.rank() == 2, "pad_rows: rank-2 input expected");
  require(offset >= 0 && offset + m.rows() <= total_rows,
          "pad_rows: rows do not fit");
  const int rows = m.rows(), cols = m.cols();
  Tensor out = Tensor::mat(total_rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.at(offset + r, c) = m.at(r, c);
  }
  return emplace(std::move(out), needs(matrix),
                 [matrix, offset, rows, cols](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   Tensor dm = Tensor::mat(rows, cols);
                   for (int r = 0; r < rows; ++r) {
                     for (int c = 0; c < cols; ++c) {
                       dm.at(r, c) = g.at(offset + r, c);
                     }
                   }
                   t.accumulate(matrix, dm);
                 });
}

Tape::Id Tape::broadcast_row(Id v, int n_rows) {
  const Tensor& x = value(v);
  require(x.rank() == 1, "broadcast_row: rank-1 input expected");
  const int d = x.dim(0);
  Tensor out = Tensor::mat(n_rows, d);
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < d; ++c) out.at(r, c) = x.at(c);
  }
  return emplace(std::move(out), needs(v), [v, n_rows, d](Tape& t, Id self) {
    const Tensor& g = t.grad_acc(self);
    Tensor dv = Tensor::vec(d);
    for (int r = 0; r < n_rows; ++r) {
      for (int c = 0; c < d; ++c) dv.at(c) += g.at(r, c);
    }
    t.accumulate(v, dv);
  });
}

Tape::Id Tape::mean_rows(Id matrix, std::vector<bool> keep) {
  const Tensor& m = value(matrix);
  require(m.rank() == 2, "mean_rows: rank-2 input expected");
  require(static_cast<int>(keep.size()) == m.rows(),
          "mean_rows: mask length mismatch");
  int count = 0;
  for (bool k : keep) count += k ? 1 : 0;
  require(count > 0, "mean_rows: all rows masked");
  const int cols = m.cols();
  Tensor out = Tensor::vec(cols);
  for (int r = 0; r < m.rows(); ++r) {
    if (!keep[static_cast<size_t>(r)]) continue;
    for (int c = 0; c < cols; ++c) out.at(c) += m.at(r, c);
  }
  for (int c = 0; c < cols; ++c) out.at(c) /= count;
  return emplace(std::move(out), needs(matrix),
                 [matrix, keep = std::move(keep), count, cols](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   Tensor dm(t.value(matrix).shape);
                   for (int r = 0; r < dm.rows(); ++r) {
                     if (!keep[static_cast<size_t>(r)]) continue;
                     for (int c = 0; c < cols; ++c) {
                       dm.at(r, c) = g.at(c) / count;
                     }
                   }
                   t.accumulate(matrix, dm);
                 });
}

Tape::Id Tape::add_n(const std::vector<Id>& parts) {
  require(!parts.empty(), "add_n: no parts");
  Tensor out = value(parts[0]);
  bool ng = needs(parts[0]);
  for (size_t i = 1; i < parts.size(); ++i) {
    const Tensor& v = value(parts[i]);
    require(v.same_shape(out), "add_n: shape mismatch");
    for (int64_t j = 0; j < out.size(); ++j) out.at(j) += v.at(j);
    ng = ng || needs(parts[i]);
  }
  return emplace(std::move(out), ng, [parts](Tape& t, Id self) {
    const Tensor& g = t.grad_acc(self);
    for (Id p : parts) t.accumulate(p, g);
  });
}

Tape::Id Tape::scalar_bmul(Id scalar, Id tensor) {
  const Tensor& s = value(scalar);
  require(s.size() == 1, "scalar_bmul: scalar expected");
  Tensor out = value(tensor);
  const double sv = s.value();
  for (auto& v : out.data) v *= sv;
  return emplace(std::move(out), needs(scalar) || needs(tensor),
                 [scalar, tensor](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   if (t.needs(scalar)) {
                     const Tensor& x = t.value(tensor);
                     double s2 = 0.0;
                     for (int64_t i = 0; i < g.size(); ++i) s2 += g.at(i) * x.at(i);
                     t.accumulate(scalar, Tensor::scalar(s2));
                   }
                   if (t.needs(tensor)) {
                     Tensor dx = g;
                     const double sv2 = t.value(scalar).value();
                     for (auto& v : dx.data) v *= sv2;
                     t.accumulate(tensor, dx);
                   }
                 });
}

Tape::Id Tape::mix(const std::vector<Id>& vectors, Id weights) {
  require(!vectors.empty(), "mix: no vectors");
  const Tensor& w = value(weights);
  require(w.rank() == 1 && w.dim(0) == static_cast<int>(vectors.size()),
          "mix: weight count mismatch");
  const int d = value(vectors[0]).dim(0);
  Tensor out = Tensor::vec(d);
  bool ng = needs(weights);
  for (size_t e = 0; e < vectors.size(); ++e) {
    const Tensor& v = value(vectors[e]);
    require(v.rank() == 1 && v.dim(0) == d, "mix: vector shape mismatch");
    for (int i = 0; i < d; ++i) out.at(i) += w.at(static_cast<int64_t>(e)) * v.at(i);
    ng = ng || needs(vectors[e]);
  }
  return emplace(std::move(out), ng, [vectors, weights, d](Tape& t, Id self) {
    const Tensor& g = t.grad_acc(self);
    const Tensor& w2 = t.value(weights);
    Tensor dw = Tensor::vec(static_cast<int>(vectors.size()));
    for (size_t e = 0; e < vectors.size(); ++e) {
      const Tensor& v = t.value(vectors[e]);
      if (t.needs(vectors[e])) {
        Tensor dv = Tensor::vec(d);
        for (int i = 0; i < d; ++i) dv.at(i) = w2.at(static_cast<int64_t>(e)) * g.at(i);
        t.accumulate(vectors[e], dv);
      }
      double s = 0.0;
      for (int i = 0; i < d; ++i) s += v.at(i) * g.at(i);
      dw.at(static_cast<int64_t>(e)) = s;
    }
    if (t.needs(weights)) t.accumulate(weights, dw);
  });
}

Tape::Id Tape::layer_norm(Id x, Id gamma, Id shift, double eps) {
  const Tensor& xv = value(x);
  const Tensor& gv = value(gamma);
  const Tensor& sv = value(shift);
  require(xv.rank() == 2, "layer_norm: rank-2 input expected");
  require(gv.rank() == 1 && gv.dim(0) == xv.cols(), "layer_norm: gamma dim");
  require(sv.rank() == 1 && sv.dim(0) == xv.cols(), "layer_norm: shift dim");
  require(eps > 0.0, "layer_norm: eps must be positive");
  const int n = xv.rows(), d = xv.cols();
  // Normalized rows and inverse stddevs are needed again in backward.
  auto xhat = std::make_shared<Tensor>(Tensor::mat(n, d));
  auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(n));
  Tensor out = Tensor::mat(n, d);
  for (int r = 0; r < n; ++r) {
    double mean = 0.0;
    for (int c = 0; c < d; ++c) mean += xv.at(r, c);
    mean /= d;
    double var = 0.0;
    for (int c = 0; c < d; ++c) {
      const double dv = xv.at(r, c) - mean;
      var += dv * dv;
    }
    var /= d;
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[static_cast<size_t>(r)] = is;
    for (int c = 0; c < d; ++c) {
      const double h = (xv.at(r, c) - mean) * is;
      xhat->at(r, c) = h;
      out.at(r, c) = gv.at(c) * h + sv.at(c);
    }
  }
  return emplace(std::move(out), needs(x) || needs(gamma) || needs(shift),
                 [x, gamma, shift, xhat, inv_std, n, d](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   const Tensor& gv2 = t.value(gamma);
                   if (t.needs(gamma) || t.needs(shift)) {
                     Tensor dgamma = Tensor::vec(d);
                     Tensor dshift = Tensor::vec(d);
                     for (int r = 0; r < n; ++r) {
                       for (int c = 0; c < d; ++c) {
                         dgamma.at(c) += g.at(r, c) * xhat->at(r, c);
                         dshift.at(c) += g.at(r, c);
                       }
                     }
                     if (t.needs(gamma)) t.accumulate(gamma, dgamma);
                     if (t.needs(shift)) t.accumulate(shift, dshift);
                   }
                   if (!t.needs(x)) return;
                   Tensor dx = Tensor::mat(n, d);
                   for (int r = 0; r < n; ++r) {
                     double sum_dh = 0.0, sum_dh_h = 0.0;
                     for (int c = 0; c < d; ++c) {
                       const double dh = g.at(r, c) * gv2.at(c);
                       sum_dh += dh;
                       sum_dh_h += dh * xhat->at(r, c);
                     }
                     const double is = (*inv_std)[static_cast<size_t>(r)];
                     for (int c = 0; c < d; ++c) {
                       const double dh = g.at(r, c) * gv2.at(c);
                       dx.at(r, c) = is * (dh - sum_dh / d -
                                           xhat->at(r, c) * sum_dh_h / d);
                     }
                   }
                   t.accumulate(x, dx);
                 });
}

Tape::Id Tape::band_filter(Id x, std::vector<double> mask) {
  Tensor out = band_filter_apply(value(x), mask);
  return emplace(std::move(out), needs(x),
                 [x, mask = std::move(mask)](Tape& t, Id self) {
                   t.accumulate(x, band_filter_apply(t.grad_acc(self), mask));
                 });
}

Tape::Id Tape::band_split3(Id x, std::vector<double> low,
                           std::vector<double> band,
                           std::vector<double> high) {
  Tensor out = band_split3_apply(value(x), low, band, high);
  return emplace(std::move(out), needs(x),
                 [x, low = std::move(low), band = std::move(band),
                  high = std::move(high)](Tape& t, Id self) {
                   t.accumulate(x, band_split3_adjoint(t.grad_acc(self), low,
                                                       band, high));
                 });
}

Tape::Id Tape::slice_rows(Id matrix, int offset, int n_rows) {
  const Tensor& m = value(matrix);
  require(m.rank() == 2, "slice_rows: rank-2 input expected");
  require(offset >= 0 && n_rows >= 1 && offset + n_rows <= m.rows(),
          "slice_rows: range out of bounds");
  const int cols = m.cols();
  Tensor out = Tensor::mat(n_rows, cols);
  for (int r = 0; r < n_rows; ++r) {
    for (int c = 0; c < cols; ++c) out.at(r, c) = m.at(offset + r, c);
  }
  return emplace(std::move(out), needs(matrix),
                 [matrix, offset, n_rows, cols](Tape& t, Id self) {
                   if (!t.needs(matrix)) return;
                   const Tensor& g = t.grad_acc(self);
                   Tensor& acc = t.grad_acc(matrix);
                   for (int r = 0; r < n_rows; ++r) {
                     for (int c = 0; c < cols; ++c) {
                       acc.at(offset + r, c) += g.at(r, c);
                     }
                   }
                 });
}

Tape::Id Tape::attn_features(Id query, Id keys) {
  const Tensor& q = value(query);
  const Tensor& k = value(keys);
  require(q.rank() == 1 && k.rank() == 2 && k.cols() == q.dim(0),
          "attn_features: shape mismatch");
  const int rows = k.rows(), d = k.cols();
  Tensor out = Tensor::mat(rows, 3 * d);
  for (int r = 0; r < rows; ++r) {
    const double* krow = k.data.data() + static_cast<size_t>(r) * d;
    double* orow = out.data.data() + static_cast<size_t>(r) * 3 * d;
    for (int c = 0; c < d; ++c) {
      orow[c] = q.at(c);
      orow[d + c] = krow[c];
      orow[2 * d + c] = q.at(c) * krow[c];
    }
  }
  return emplace(std::move(out), needs(query) || needs(keys),
                 [query, keys, rows, d](Tape& t, Id self) {
                   const Tensor& g = t.grad_acc(self);
                   const Tensor& q2 = t.value(query);
                   const Tensor& k2 = t.value(keys);
                   if (t.needs(query)) {
                     Tensor dq = Tensor::vec(d);
                     for (int r = 0; r < rows; ++r) {
                       const double* grow =
                           g.data.data() + static_cast<size_t>(r) * 3 * d;
                       const double* krow =
                           k2.data.data() + static_cast<size_t>(r) * d;
                       for (int c = 0; c < d; ++c) {
                         dq.at(c) += grow[c] + grow[2 * d + c] * krow[c];
                       }
                     }
                     t.accumulate(query, dq);
                   }
                   if (t.needs(keys)) {
                     Tensor dk = Tensor::mat(rows, d);
                     for (int r = 0; r < rows; ++r) {
                       const double* grow =
                           g.data.data() + static_cast<size_t>(r) * 3 * d;
                       double* drow =
                           dk.data.data() + static_cast<size_t>(r) * d;
                       for (int c = 0; c < d; ++c) {
                         drow[c] = grow[d + c] + grow[2 * d + c] * q2.at(c);
                       }
                     }
                     t.accumulate(keys, dk);
                   }
                 });
}

Tape::Id Tape::stop_gradient(Id a) {
  return emplace(value(a), false, nullptr);
}

Tape::Id Tape::bce(Id prob, double label) {
  const Tensor& p = value(prob);
  require(p.size() == 1, "bce: scalar probability expected");
  require(label == 0.0 || label == 1.0, "bce: label must be 0 or 1");
  const double ph = std::min(1.0 - kBceEps, std::max(kBceEps, p.value()));
  const double loss = -(label * std::log(ph) + (1.0 - label) * std::log(1.0 - ph));
  return emplace(Tensor::scalar(loss), needs(prob),
                 [prob, label](Tape& t, Id self) {
                   const double g = t.grad_acc(self).value();
                   const double raw = t.value(prob).value();
                   double d = 0.0;
                   if (raw > kBceEps && raw < 1.0 - kBceEps) {
                     d = g * (raw - label) / (raw * (1.0 - raw));
                   }
                   t.accumulate(prob, Tensor::scalar(d));
                 });
}

void Tape::backward(Id loss) {
  require(loss >= 0 && loss < node_count(), "backward: bad node id");
  require(value(loss).size() == 1, "backward: loss must be a scalar");
  grads_.assign(nodes_.size(), Tensor());
  grads_[static_cast<size_t>(loss)] = Tensor::scalar(1.0);
  for (Id i = loss; i >= 0; --i) {
    Node& node = nodes_[static_cast<size_t>(i)];
    if (!node.backward) continue;
    if (grads_[static_cast<size_t>(i)].empty()) continue;
    node.backward(*this, i);
  }
}

Tensor& Tape::grad_acc(Id id) {
  Tensor& g = grads_[static_cast<size_t>(id)];
  if (g.empty()) g = Tensor(nodes_[static_cast<size_t>(id)].value.shape);
  return g;
}

void Tape::accumulate(Id parent, const Tensor& g) {
  if (!needs(parent)) return;
  Tensor& acc = grad_acc(parent);
  for (int64_t i = 0; i < acc.size(); ++i) acc.at(i) += g.at(i);
}

Tensor Tape::grad(Id id) const {
  if (id < 0 || id >= node_count()) {
    throw std::invalid_argument("grad: bad node id");
  }
  if (static_cast<size_t>(id) < grads_.size() &&
      !grads_[static_cast<size_t>(id)].empty()) {
    return grads_[static_cast<size_t>(id)];
  }
  return Tensor(nodes_[static_cast<size_t>(id)].value.shape);
}

Tensor Tape::grad_of(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) {
    throw std::invalid_argument("grad_of: unknown parameter " + name);
  }
  return grad(it->second);
}

bool Tape::has_param(const std::string& name) const {
  return params_.count(name) > 0;
}

}  // namespace fim
