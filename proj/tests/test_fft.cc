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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "fim/fft.h"

using fim::irfft;
using fim::parseval_weight;
using fim::rfft;
using fim::rfft_len;

namespace {

using cd = std::complex<double>;

// Independent O(N^2) DFT summation oracle.
std::vector<cd> naive_dft_half(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  const int l = rfft_len(n);
  std::vector<cd> out(static_cast<size_t>(l));
  for (int k = 0; k < l; ++k) {
    cd acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
      const double ang = -2.0 * std::numbers::pi * k * i / n;
      acc += x[static_cast<size_t>(i)] * cd(std::cos(ang), std::sin(ang));
    }
    out[static_cast<size_t>(k)] = acc;
  }
  return out;
}

std::vector<double> random_signal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(static_cast<size_t>(n));
  for (auto& v : x) v = dist(rng);
  return x;
}

}  // namespace

TEST_CASE("rfft_len follows the half-spectrum convention") {
  CHECK(rfft_len(4) == 3);
  CHECK(rfft_len(26) == 14);
  CHECK(rfft_len(64) == 33);
  CHECK(rfft_len(5) == 4);
  CHECK(rfft_len(1) == 2);
}

TEST_CASE("rfft on a constant signal puts all energy at DC") {
  auto spec = rfft(std::vector<double>{1, 1, 1, 1});
  REQUIRE(spec.size() == 3);
  CHECK(spec[0].real() == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(std::abs(spec[0].imag()) < 1e-12);
  CHECK(std::abs(spec[1]) < 1e-12);
  CHECK(std::abs(spec[2]) < 1e-12);
}

TEST_CASE("rfft of zeros is zero") {
  auto spec = rfft(std::vector<double>{0, 0, 0, 0});
  for (const auto& v : spec) CHECK(std::abs(v) < 1e-15);
}

TEST_CASE("rfft matches the naive DFT oracle on [1,2,3,4]") {
  // Oracle values: [10, -2+2j, -2].
  std::vector<double> x{1, 2, 3, 4};
  auto spec = rfft(x);
  auto oracle = naive_dft_half(x);
  REQUIRE(spec.size() == oracle.size());
  CHECK(spec[1].real() == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(spec[1].imag() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(spec[2].real() == doctest::Approx(-2.0).epsilon(1e-12));
  for (size_t k = 0; k < spec.size(); ++k) {
    CHECK(std::abs(spec[k] - oracle[k]) < 1e-10);
  }
}

TEST_CASE("rfft matches the naive DFT oracle on awkward lengths") {
  std::mt19937_64 rng(7);
  for (int n : {1, 2, 3, 5, 7, 12, 26, 31, 48, 100}) {
    auto x = random_signal(n, rng);
    auto spec = rfft(x);
    auto oracle = naive_dft_half(x);
    REQUIRE(spec.size() == oracle.size());
    for (size_t k = 0; k < spec.size(); ++k) {
      CHECK(std::abs(spec[k] - oracle[k]) < 1e-8);
    }
  }
}

TEST_CASE("irfft inverts the DC-only spectrum") {
  std::vector<cd> spec{cd(4, 0), cd(0, 0), cd(0, 0)};
  auto x = irfft(spec, 4);
  REQUIRE(x.size() == 4);
  for (double v : x) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("irfft inverts the [1,2,3,4] oracle case") {
  std::vector<cd> spec{cd(10, 0), cd(-2, 2), cd(-2, 0)};
  auto x = irfft(spec, 4);
  REQUIRE(x.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(x[static_cast<size_t>(i)] == doctest::Approx(i + 1).epsilon(1e-12));
  }
}

TEST_CASE("irfft rejects inconsistent lengths") {
  std::vector<cd> spec{cd(1, 0), cd(0, 0)};
  CHECK_THROWS_AS(irfft(spec, 4), std::invalid_argument);
}

TEST_CASE("rfft rejects empty input") {
  CHECK_THROWS_AS(rfft(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("roundtrip identity on random vectors") {
  std::mt19937_64 rng(11);
  for (int n : {1, 2, 3, 4, 5, 8, 13, 26, 27, 64, 100}) {
    for (int rep = 0; rep < 10; ++rep) {
      auto x = random_signal(n, rng);
      auto back = irfft(rfft(x), n);
      for (int i = 0; i < n; ++i) {
        CHECK(std::fabs(back[static_cast<size_t>(i)] -
                        x[static_cast<size_t>(i)]) < 1e-9);
      }
    }
  }
}

TEST_CASE("rfft is linear") {
  std::mt19937_64 rng(13);
  for (int n : {8, 26, 33}) {
    auto x = random_signal(n, rng);
    auto y = random_signal(n, rng);
    const double a = 1.7, b = -0.3;
    std::vector<double> z(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
      z[static_cast<size_t>(i)] =
          a * x[static_cast<size_t>(i)] + b * y[static_cast<size_t>(i)];
    }
    auto sx = rfft(x);
    auto sy = rfft(y);
    auto sz = rfft(z);
    for (size_t k = 0; k < sz.size(); ++k) {
      CHECK(std::abs(sz[k] - (a * sx[k] + b * sy[k])) < 1e-9);
    }
  }
}

TEST_CASE("Parseval holds with half-spectrum weights") {
  std::mt19937_64 rng(17);
  for (int n : {2, 3, 4, 5, 16, 26, 64, 100}) {
    auto x = random_signal(n, rng);
    double time_energy = 0.0;
    for (double v : x) time_energy += v * v;
    auto spec = rfft(x);
    double freq_energy = 0.0;
    for (int k = 0; k < static_cast<int>(spec.size()); ++k) {
      freq_energy += parseval_weight(k, n) * std::norm(spec[static_cast<size_t>(k)]);
    }
    freq_energy /= n;
    CHECK(std::fabs(time_energy - freq_energy) < 1e-9);
  }
}

TEST_CASE("band_filter_apply with an all-ones mask is the identity") {
  std::mt19937_64 rng(23);
  fim::Tensor x = fim::Tensor::randn({26, 5}, rng, 1.0);
  std::vector<double> ones(static_cast<size_t>(rfft_len(26)), 1.0);
  fim::Tensor y = fim::band_filter_apply(x, ones);
  for (int64_t i = 0; i < x.size(); ++i) {
    CHECK(std::fabs(y.at(i) - x.at(i)) < 1e-9);
  }
}

TEST_CASE("band_filter_apply is self-adjoint") {
  // <A x, y> == <x, A y> for a real per-bin gain, including odd lengths
  // where the top half-spectrum bin is redundant.
  std::mt19937_64 rng(29);
  for (int n : {8, 9, 26}) {
    const int l = rfft_len(n);
    std::vector<double> mask(static_cast<size_t>(l));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& m : mask) m = u(rng);
    fim::Tensor x = fim::Tensor::randn({n, 3}, rng, 1.0);
    fim::Tensor y = fim::Tensor::randn({n, 3}, rng, 1.0);
    fim::Tensor ax = fim::band_filter_apply(x, mask);
    fim::Tensor ay = fim::band_filter_apply(y, mask);
    double lhs = 0.0, rhs = 0.0;
    for (int64_t i = 0; i < x.size(); ++i) {
      lhs += ax.at(i) * y.at(i);
      rhs += x.at(i) * ay.at(i);
    }
    CHECK(std::fabs(lhs - rhs) < 1e-9);
  }
}
