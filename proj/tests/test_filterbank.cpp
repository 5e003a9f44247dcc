/* Copyright 2026 The anisolab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "anisolab/filterbank.hpp"

namespace anisolab {
namespace {

const DecomposedAnisotropy& va12() {
  static const DecomposedAnisotropy va({Anisotropy::scalar(1.0, 1), Anisotropy::scalar(2.0, 1)});
  return va;
}

TorusGrid canonical(std::size_t n = 64) {
  return TorusGrid({n, n}, {std::numbers::pi, std::numbers::pi / 64.0});
}

TEST(FilterBank, NmaxExample) {
  const DecomposedAnisotropy iso(Anisotropy::scalar(1.0, 1));
  const FilterBank b(make_grid({64}, {1.0}), iso, 1.0, 2.0);
  EXPECT_EQ(b.n_max(), 6u);
  EXPECT_NEAR(b.nyquist(), 64.0 * std::numbers::pi, 1e-12);
}

TEST(FilterBank, CanonicalGrid) {
  const FilterBank b(canonical(), va12());
  EXPECT_EQ(b.n_max(), 5u);
  EXPECT_DOUBLE_EQ(b.covered_radius(), 32.0);
}

TEST(FilterBank, Rejections) {
  EXPECT_THROW(FilterBank(canonical(), va12(), 2.0, 1.0), InvalidArgument);
  EXPECT_THROW(FilterBank(canonical(), va12(), 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(FilterBank(make_grid({4, 4}, {2 * std::numbers::pi, 2 * std::numbers::pi}), va12(), 1.0, 2.0), InvalidArgument);
  const FilterBank b(canonical(), va12());
  EXPECT_THROW(b.multiplier(b.n_max() + 1), InvalidArgument);
}

TEST(FilterBank, Origin) {
  const FilterBank b(canonical(), va12());
  EXPECT_EQ(b.multiplier(0)[0], 1.0);
  for (std::size_t n = 1; n <= b.n_max(); ++n) EXPECT_EQ(b.multiplier(n)[0], 0.0);
}

TEST(FilterBankProperty, ProfileBounds) {
  for (double delta : {2.0, 1.5}) {
    const FilterBank b(canonical(), va12(), 1.0, delta);
    const auto& rho = b.rho();
    const auto& m0 = b.multiplier(0);
    for (std::size_t i = 0; i < rho.size(); ++i) {
      EXPECT_GE(m0[i], 0.0);
      EXPECT_LE(m0[i], 1.0);
      if (rho[i] <= 1.0) EXPECT_EQ(m0[i], 1.0);
      if (rho[i] >= delta) EXPECT_EQ(m0[i], 0.0);
    }
  }
}

TEST(FilterBankProperty, PartitionOfUnity) {
  for (double delta : {2.0, 1.5}) {
    const FilterBank b(canonical(128), va12(), 1.0, delta);
    double worst = 0.0;
    for (std::size_t i = 0; i < b.rho().size(); ++i) {
      if (b.rho()[i] > b.covered_radius()) continue;
      double s = 0.0;
      for (std::size_t n = 0; n <= b.n_max(); ++n) s += b.multiplier(n)[i];
      worst = std::max(worst, std::abs(s - 1.0));
    }
    EXPECT_LE(worst, 1e-15);
  }
}

TEST(FilterBankProperty, SupportDiscipline) {
  const FilterBank b(canonical(), va12(), 1.0, 2.0);
  const auto& rho = b.rho();
  for (std::size_t n = 0; n <= b.n_max(); ++n) {
    for (std::size_t m = n + 2; m <= b.n_max(); ++m)
      for (std::size_t i = 0; i < rho.size(); ++i)
        EXPECT_EQ(b.multiplier(n)[i] * b.multiplier(m)[i], 0.0);
    if (n == 0) continue;
    const double lo = std::exp2(static_cast<double>(n) - 1.0), hi = 2.0 * std::exp2(static_cast<double>(n));
    for (std::size_t i = 0; i < rho.size(); ++i)
      if (b.multiplier(n)[i] != 0.0) {
        EXPECT_GE(rho[i], lo);
        EXPECT_LE(rho[i], hi);
      }
  }
}

TEST(FilterBankProperty, SquareSumBounds) {
  const FilterBank coarse(canonical(64), va12());
  const FilterBank fine(canonical(128), va12());
  const auto [lo, hi] = coarse.square_sum_bounds();
  EXPECT_GE(lo, 0.5);
  EXPECT_LE(hi, 1.0 + 1e-15);
  const auto [lo2, hi2] = fine.square_sum_bounds();
  EXPECT_LE(std::abs(lo2 - lo) / lo, 0.05);
  EXPECT_LE(hi2, 1.0 + 1e-15);
}

TEST(FilterBank, FlatZoneIsolation) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  // xi = (8, 0): rho = 8, the flat zone of phi_3.
  const auto e = GridFunction::exponential(g, {4, 0});
  EXPECT_NEAR(b.rho()[g.flat({4, 0})], 8.0, 1e-14);
  for (std::size_t n = 0; n <= b.n_max(); ++n) {
    const auto s = b.apply(n, e);
    if (n == 3)
      EXPECT_EQ(s.spectrum(), e.spectrum());
    else
      EXPECT_TRUE(s.is_zero());
  }
}

TEST(FilterBank, ConstantLivesInScaleZero) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  const auto c = GridFunction::constant(g, 2.5);
  EXPECT_EQ(b.apply(0, c).spectrum(), c.spectrum());
}

TEST(FilterBankProperty, Reconstruction) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_bandlimited(g, seed, annulus_band(va12(), 0.0, 32.0), 2);
    const auto r = reconstruct(b, b.decompose(f));
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < f.samples().size(); ++i) {
      err = std::max(err, std::abs(r.samples()[i] - f.samples()[i]));
      peak = std::max(peak, std::abs(f.samples()[i]));
    }
    EXPECT_LE(err, 1e-13 * peak);
  }
}

TEST(FilterBank, CoverageIsEnforced) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  const auto f = random_bandlimited(g, 1, annulus_band(va12(), 33.0, 60.0));
  EXPECT_FALSE(b.covers(f));
  EXPECT_THROW(b.decompose(f), CoverageError);
}

TEST(FilterBankProperty, DilationCovariance) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_bandlimited(g, seed, annulus_band(va12(), 0.0, 16.0));
    const auto df = dilate_sample(f, va12(), 1);
    // phi_n(xi) = phi_{n-1}(A_{1/2} xi) holds from n = 2; at n = 1 only
    // the low-pass sum phi_0 + phi_1 dilates from phi_0.
    for (std::size_t n = 1; n <= b.n_max(); ++n) {
      const auto lhs = n == 1 ? b.apply(0, df).plus(b.apply(1, df)) : b.apply(n, df);
      const auto rhs = dilate_sample(b.apply(n - 1, f), va12(), 1);
      for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(std::abs(lhs.spectrum()[i] - rhs.spectrum()[i]), 0.0,
                    1e-14 * std::abs(df.spectrum()[i]) + 1e-300);
    }
  }
}

TEST(FilterBank, SubsetOfAxes) {
  const auto g = canonical();
  const DecomposedAnisotropy outer(Anisotropy::scalar(1.0, 1));
  const FilterBank b(g, outer, 1.0, 2.0, 1);
  EXPECT_EQ(b.first_axis(), 1u);
  EXPECT_EQ(b.axis_count(), 1u);
  // Axis 1 has xi = 128 k, Nyquist 4096 * 2.
  EXPECT_NEAR(b.nyquist(), g.nyquist_frequency(1), 1e-9);
  const auto e = GridFunction::exponential(g, {5, 0});
  EXPECT_EQ(b.apply(0, e).spectrum(), e.spectrum());
}

}  // namespace
}  // namespace anisolab
