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

#ifndef FIM_FFT_H_
#define FIM_FFT_H_

#include <complex>
#include <span>
#include <vector>

#include "fim/tensor.h"

namespace fim {

// Half-spectrum length for a real signal of length n: ceil(n/2) + 1.
int rfft_len(int n);

// In-place complex FFT for arbitrary n (radix-2 for powers of two,
// Bluestein otherwise). O(n log n).
void fft(std::vector<std::complex<double>>& a, bool inverse);

// Forward real FFT. Entry k of the result is sum_i x[i] e^{-j 2pi k i / n}
// for k in [0, rfft_len(n)).
std::vector<std::complex<double>> rfft(std::span<const double> x);

// Inverse of rfft. Rebuilds the full spectrum by conjugate symmetry from the
// half spectrum, inverts, and discards the imaginary residue.
std::vector<double> irfft(std::span<const std::complex<double>> spectrum,
                          int n);

// Parseval weight of half-spectrum bin k for signal length n: 1 for DC and
// the Nyquist bin, 2 for interior bins, 0 for the redundant top bin of odd n.
double parseval_weight(int k, int n);

// Applies a real per-bin gain in the frequency domain to each column of a
// rank-2 tensor: column d becomes irfft(mask * rfft(column d)). The mask has
// rfft_len(rows) entries. As a real linear map this operator is symmetric,
// so it serves as its own adjoint in backprop.
Tensor band_filter_apply(const Tensor& x, std::span<const double> mask);

// Three band filters of the same input sharing one forward transform per
// column. The result stacks the filtered copies as rows [low; band; high],
// shape (3N x D).
Tensor band_split3_apply(const Tensor& x, std::span<const double> low,
                         std::span<const double> band,
                         std::span<const double> high);

// Adjoint of band_split3_apply: folds a stacked (3N x D) cotangent back to
// (N x D), again with one inverse transform per column.
Tensor band_split3_adjoint(const Tensor& g, std::span<const double> low,
                           std::span<const double> band,
                           std::span<const double> high);

// Column-wise forward transform of an N x D tensor into an L x D spectrum.
ComplexTensor rfft_cols(const Tensor& x);

}  // namespace fim

#endif  // FIM_FFT_H_
