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

#include "fim/fft.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <stdexcept>

namespace fim {

namespace {

using cd = std::complex<double>;

bool is_pow2(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Twiddle factors w_n^j for j in [0, n/2), cached per size.
const std::vector<cd>& twiddles(size_t n) {
  thread_local std::map<size_t, std::vector<cd>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cd> w(n / 2);
  for (size_t j = 0; j < n / 2; ++j) {
    const double ang = -2.0 * std::numbers::pi * static_cast<double>(j) /
                       static_cast<double>(n);
    w[j] = cd(std::cos(ang), std::sin(ang));
  }
  return cache.emplace(n, std::move(w)).first->second;
}

// Iterative radix-2 Cooley-Tukey, forward only.
void fft_pow2(std::vector<cd>& a) {
  const size_t n = a.size();
  const std::vector<cd>& w = twiddles(n);
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const size_t stride = n / len;
    for (size_t i = 0; i < n; i += len) {
      for (size_t k = 0; k < len / 2; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + len / 2] * w[k * stride];
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// Bluestein chirp-z transform for arbitrary n, forward only.
void fft_bluestein(std::vector<cd>& a) {
  const size_t n = a.size();
  const size_t m = next_pow2(2 * n + 1);
  // Chirp c_k = exp(-i pi k^2 / n); k^2 is reduced mod 2n to keep the
  // argument small (the exponential has period 2n in k^2).
  std::vector<cd> chirp(n);
  for (size_t k = 0; k < n; ++k) {
    const size_t k2 = (k * k) % (2 * n);
    const double ang = -std::numbers::pi * static_cast<double>(k2) /
                       static_cast<double>(n);
    chirp[k] = cd(std::cos(ang), std::sin(ang));
  }
  std::vector<cd> fa(m, cd(0.0, 0.0));
  std::vector<cd> fb(m, cd(0.0, 0.0));
  for (size_t k = 0; k < n; ++k) fa[k] = a[k] * chirp[k];
  fb[0] = std::conj(chirp[0]);
  for (size_t k = 1; k < n; ++k) {
    fb[k] = std::conj(chirp[k]);
    fb[m - k] = std::conj(chirp[k]);
  }
  fft_pow2(fa);
  fft_pow2(fb);
  for (size_t i = 0; i < m; ++i) fa[i] *= fb[i];
  // Inverse pow-2 FFT via conjugation.
  for (auto& v : fa) v = std::conj(v);
  fft_pow2(fa);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (size_t k = 0; k < n; ++k) {
    a[k] = std::conj(fa[k]) * inv_m * chirp[k];
  }
}

void fft_forward(std::vector<cd>& a) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size())) {
    fft_pow2(a);
  } else {
    fft_bluestein(a);
  }
}

}  // namespace

int rfft_len(int n) {
  if (n < 1) throw std::invalid_argument("rfft_len: n must be >= 1");
  return (n + 1) / 2 + 1;
}

void fft(std::vector<cd>& a, bool inverse) {
  if (!inverse) {
    fft_forward(a);
    return;
  }
  for (auto& v : a) v = std::conj(v);
  fft_forward(a);
  const double inv_n = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v = std::conj(v) * inv_n;
}

std::vector<cd> rfft(std::span<const double> x) {
  const int n = static_cast<int>(x.size());
  if (n < 1) throw std::invalid_argument("rfft: empty input");
  std::vector<cd> a(x.begin(), x.end());
  fft_forward(a);
  const int l = rfft_len(n);
  std::vector<cd> out(static_cast<size_t>(l));
  // For n == 1 both half-spectrum bins alias to bin 0; otherwise l <= n.
  for (int k = 0; k < l; ++k) out[k] = a[k % n];
  return out;
}

std::vector<double> irfft(std::span<const cd> spectrum, int n) {
  if (n < 1) throw std::invalid_argument("irfft: n must be >= 1");
  const int l = rfft_len(n);
  if (static_cast<int>(spectrum.size()) != l) {
    throw std::invalid_argument("irfft: spectrum length inconsistent with n");
  }
  std::vector<cd> full(static_cast<size_t>(n));
  for (int k = 0; k < n && k < l; ++k) full[k] = spectrum[k];
  for (int k = l; k < n; ++k) full[k] = std::conj(spectrum[n - k]);
  fft(full, /*inverse=*/true);
  std::vector<double> out(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = full[i].real();
  return out;
}

double parseval_weight(int k, int n) {
  if (k == 0) return 1.0;
  if (2 * k < n) return 2.0;
  if (2 * k == n) return 1.0;
  return 0.0;  // redundant top bin (odd n, or n == 1)
}

namespace {

// Scratch-reusing full-spectrum helpers for the hot band ops. The half
// spectrum of a real column is expanded in place to all n bins so masked
// inverses stay a single complex FFT.
struct FftScratch {
  std::vector<cd> spec;
  std::vector<cd> work;
};

FftScratch& scratch() {
  thread_local FftScratch s;
  return s;
}

// Forward transform of one real column into scratch().spec (n bins).
void column_spectrum(const Tensor& x, int col, std::vector<cd>& spec) {
  const int n = x.rows();
  spec.assign(static_cast<size_t>(n), cd(0.0, 0.0));
  for (int i = 0; i < n; ++i) spec[static_cast<size_t>(i)] = cd(x.at(i, col), 0.0);
  fft_forward(spec);
}

// Half-spectrum mask applied over the full spectrum, conjugate-mirrored the
// same way irfft() fills bins [L, n).
void apply_mask_full(const std::vector<cd>& spec, std::span<const double> mask,
                     int n, std::vector<cd>& out) {
  const int l = rfft_len(n);
  out.assign(static_cast<size_t>(n), cd(0.0, 0.0));
  for (int k = 0; k < n && k < l; ++k) {
    out[static_cast<size_t>(k)] = spec[static_cast<size_t>(k)] * mask[static_cast<size_t>(k)];
  }
  for (int k = l; k < n; ++k) {
    out[static_cast<size_t>(k)] =
        std::conj(spec[static_cast<size_t>(n - k)] * mask[static_cast<size_t>(n - k)]);
  }
}

void inverse_into_column(std::vector<cd>& full, Tensor* out, int row_offset,
                         int col) {
  const int n = static_cast<int>(full.size());
  for (auto& v : full) v = std::conj(v);
  fft_forward(full);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    out->at(row_offset + i, col) = full[static_cast<size_t>(i)].real() * inv_n;
  }
}

}  // namespace

Tensor band_filter_apply(const Tensor& x, std::span<const double> mask) {
  if (x.rank() != 2) {
    throw std::invalid_argument("band_filter: input must be rank 2");
  }
  const int n = x.rows();
  const int d = x.cols();
  const int l = rfft_len(n);
  if (static_cast<int>(mask.size()) != l) {
    throw std::invalid_argument("band_filter: mask length != rfft_len(rows)");
  }
  Tensor out = Tensor::mat(n, d);
  FftScratch& s = scratch();
  for (int c = 0; c < d; ++c) {
    column_spectrum(x, c, s.spec);
    apply_mask_full(s.spec, mask, n, s.work);
    inverse_into_column(s.work, &out, 0, c);
  }
  return out;
}

namespace {

// Full-spectrum gains for an even length: symmetric around the Nyquist bin,
// so the masked spectrum of a real signal stays conjugate-symmetric and the
// filter acts independently on the real and imaginary parts of a packed
// pair of columns.
std::vector<double> full_gains_even(std::span<const double> mask, int n) {
  std::vector<double> g(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    g[static_cast<size_t>(k)] = mask[static_cast<size_t>(std::min(k, n - k))];
  }
  return g;
}

void check_band3_masks(int n, std::span<const double> low,
                       std::span<const double> band,
                       std::span<const double> high) {
  const int l = rfft_len(n);
  if (static_cast<int>(low.size()) != l || static_cast<int>(band.size()) != l ||
      static_cast<int>(high.size()) != l) {
    throw std::invalid_argument("band_split3: mask length != rfft_len(rows)");
  }
}

}  // namespace

Tensor band_split3_apply(const Tensor& x, std::span<const double> low,
                         std::span<const double> band,
                         std::span<const double> high) {
  if (x.rank() != 2) {
    throw std::invalid_argument("band_split3: input must be rank 2");
  }
  const int n = x.rows();
  const int d = x.cols();
  check_band3_masks(n, low, band, high);
  Tensor out = Tensor::mat(3 * n, d);
  FftScratch& s = scratch();
  const std::span<const double> masks[3] = {low, band, high};
  if (n % 2 != 0) {
    for (int c = 0; c < d; ++c) {
      column_spectrum(x, c, s.spec);
      for (int b = 0; b < 3; ++b) {
        apply_mask_full(s.spec, masks[b], n, s.work);
        inverse_into_column(s.work, &out, b * n, c);
      }
    }
    return out;
  }
  // Even length: process two real columns per complex transform.
  std::vector<double> gains[3];
  for (int b = 0; b < 3; ++b) gains[b] = full_gains_even(masks[b], n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int c = 0; c < d; c += 2) {
    const bool paired = c + 1 < d;
    s.spec.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      s.spec[static_cast<size_t>(i)] =
          cd(x.at(i, c), paired ? x.at(i, c + 1) : 0.0);
    }
    fft_forward(s.spec);
    for (int b = 0; b < 3; ++b) {
      s.work.resize(static_cast<size_t>(n));
      for (int k = 0; k < n; ++k) {
        s.work[static_cast<size_t>(k)] =
            std::conj(s.spec[static_cast<size_t>(k)]) * gains[b][static_cast<size_t>(k)];
      }
      fft_forward(s.work);
      for (int i = 0; i < n; ++i) {
        out.at(b * n + i, c) = s.work[static_cast<size_t>(i)].real() * inv_n;
        if (paired) {
          out.at(b * n + i, c + 1) = -s.work[static_cast<size_t>(i)].imag() * inv_n;
        }
      }
    }
  }
  return out;
}

Tensor band_split3_adjoint(const Tensor& g, std::span<const double> low,
                           std::span<const double> band,
                           std::span<const double> high) {
  if (g.rank() != 2 || g.rows() % 3 != 0) {
    throw std::invalid_argument("band_split3_adjoint: bad cotangent shape");
  }
  const int n = g.rows() / 3;
  const int d = g.cols();
  const int l = rfft_len(n);
  check_band3_masks(n, low, band, high);
  Tensor out = Tensor::mat(n, d);
  FftScratch& s = scratch();
  const std::span<const double> masks[3] = {low, band, high};
  if (n % 2 != 0) {
    std::vector<cd> acc;
    for (int c = 0; c < d; ++c) {
      acc.assign(static_cast<size_t>(n), cd(0.0, 0.0));
      for (int b = 0; b < 3; ++b) {
        // Each band filter is self-adjoint: fold back by summing the masked
        // spectra of the per-band cotangents.
        s.spec.assign(static_cast<size_t>(n), cd(0.0, 0.0));
        for (int i = 0; i < n; ++i) {
          s.spec[static_cast<size_t>(i)] = cd(g.at(b * n + i, c), 0.0);
        }
        fft_forward(s.spec);
        for (int k = 0; k < n && k < l; ++k) {
          acc[static_cast<size_t>(k)] +=
              s.spec[static_cast<size_t>(k)] * masks[b][static_cast<size_t>(k)];
        }
        for (int k = l; k < n; ++k) {
          acc[static_cast<size_t>(k)] += std::conj(
              s.spec[static_cast<size_t>(n - k)] * masks[b][static_cast<size_t>(n - k)]);
        }
      }
      inverse_into_column(acc, &out, 0, c);
    }
    return out;
  }
  std::vector<double> gains[3];
  for (int b = 0; b < 3; ++b) gains[b] = full_gains_even(masks[b], n);
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<cd> acc;
  for (int c = 0; c < d; c += 2) {
    const bool paired = c + 1 < d;
    acc.assign(static_cast<size_t>(n), cd(0.0, 0.0));
    for (int b = 0; b < 3; ++b) {
      s.spec.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        s.spec[static_cast<size_t>(i)] =
            cd(g.at(b * n + i, c), paired ? g.at(b * n + i, c + 1) : 0.0);
      }
      fft_forward(s.spec);
      for (int k = 0; k < n; ++k) {
        acc[static_cast<size_t>(k)] +=
            s.spec[static_cast<size_t>(k)] * gains[b][static_cast<size_t>(k)];
      }
    }
    for (auto& v : acc) v = std::conj(v);
    fft_forward(acc);
    for (int i = 0; i < n; ++i) {
      out.at(i, c) = acc[static_cast<size_t>(i)].real() * inv_n;
      if (paired) out.at(i, c + 1) = -acc[static_cast<size_t>(i)].imag() * inv_n;
    }
  }
  return out;
}

ComplexTensor rfft_cols(const Tensor& x) {
  if (x.rank() != 2) {
    throw std::invalid_argument("rfft_cols: input must be rank 2");
  }
  const int n = x.rows();
  const int d = x.cols();
  const int l = rfft_len(n);
  ComplexTensor out;
  out.shape = {l, d};
  out.data.assign(static_cast<size_t>(l) * d, cd(0.0, 0.0));
  std::vector<double> col(static_cast<size_t>(n));
  for (int c = 0; c < d; ++c) {
    for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = x.at(i, c);
    auto spec = rfft(col);
    for (int k = 0; k < l; ++k) out.at(k, c) = spec[static_cast<size_t>(k)];
  }
  return out;
}

}  // namespace fim
