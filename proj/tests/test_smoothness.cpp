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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "anisolab/smoothness.hpp"

namespace anisolab {
namespace {

const DecomposedAnisotropy& va12() {
  static const DecomposedAnisotropy va({Anisotropy::scalar(1.0, 1), Anisotropy::scalar(2.0, 1)});
  return va;
}

TorusGrid canonical() { return TorusGrid({64, 64}, {std::numbers::pi, std::numbers::pi / 64.0}); }

GridFunction sample(std::uint64_t seed, double hi = 16) {
  return random_bandlimited(canonical(), seed, annulus_band(va12(), 0, hi));
}

double max_diff(const GridFunction& a, const GridFunction& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.samples().size(); ++i)
    m = std::max(m, std::abs(a.samples()[i] - b.samples()[i]));
  return m;
}

double max_abs(const GridFunction& a) {
  double m = 0.0;
  for (auto v : a.samples()) m = std::max(m, std::abs(v));
  return m;
}

TEST(Smoothness, BinomialRow) {
  EXPECT_EQ(binomial_row(1), (std::vector<double>{1, 1}));
  EXPECT_EQ(binomial_row(3), (std::vector<double>{1, 3, 3, 1}));
  EXPECT_EQ(binomial_row(4), (std::vector<double>{1, 4, 6, 4, 1}));
  EXPECT_NEAR(unit_ball_volume(1), 2.0, 1e-15);
  EXPECT_NEAR(unit_ball_volume(2), std::numbers::pi, 1e-15);
}

TEST(SmoothnessProperty, LatticeDifferenceSemigroup) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> sh(-5, 5);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = sample(seed);
    const std::vector<long> s{sh(rng), sh(rng)};
    for (int m : {2, 3}) {
      GridFunction it = f;
      for (int k = 0; k < m; ++k) it = difference(it, s, 1);
      EXPECT_LE(max_diff(difference(f, s, m), it), 1e-12 * std::max(1.0, max_abs(f)));
    }
  }
}

TEST(SmoothnessProperty, SpectralMatchesLattice) {
  const auto g = canonical();
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> sh(-9, 9);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = sample(seed, 30);
    const std::vector<long> s{sh(rng), sh(rng)};
    Vector h(2);
    h << s[0] * g.spacing(0), s[1] * g.spacing(1);
    for (int m : {1, 2, 3})
      EXPECT_LE(max_diff(difference(f, h, m), difference(f, s, m)), 1e-10 * max_abs(f));
  }
}

TEST(Smoothness, ExponentialSymbol) {
  const auto g = canonical();
  const auto e = GridFunction::exponential(g, {3, -2});
  Vector h(2);
  h << 0.013, 0.0004;
  const double phase = g.frequency(0, g.wrap(0, 3)) * h(0) + g.frequency(1, g.wrap(1, -2)) * h(1);
  for (int m : {1, 2, 4}) {
    const cplx factor = std::pow(std::polar(1.0, phase) - 1.0, m);
    EXPECT_LE(max_diff(difference(e, h, m), e.scaled(factor)), 1e-13);
  }
}

TEST(Smoothness, ConstantHasNoDifferences) {
  const auto c = GridFunction::constant(canonical(), 2.5);
  Vector h(2);
  h << 0.1, 0.001;
  EXPECT_LE(max_abs(difference(c, h, 2)), 1e-14);
  EXPECT_LE(max_abs(difference(c, std::vector<long>{3, -1}, 3)), 1e-14);
  DifferenceProfile prof;
  const auto d = difference_field(c, va12(), prof, 2);
  for (double v : d.values.values) EXPECT_LE(v, 1e-13);
}

TEST(Smoothness, Errors) {
  const auto f = sample(1);
  EXPECT_THROW(difference(f, std::vector<long>{1}, 1), ShapeMismatch);
  EXPECT_THROW(difference(f, std::vector<long>{1, 1}, 0), InvalidArgument);
  Vector h(3);
  h.setZero();
  EXPECT_THROW(difference(f, h, 1), ShapeMismatch);
}

TEST(SmoothnessProperty, SignedAverageBelowModulusAverage) {
  DifferenceProfile prof;
  prof.shape = BallShape::QuasiNorm;
  prof.M = 2;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto f = sample(seed);
    for (int n : {3, 4}) {
      const auto d = difference_field(f, va12(), prof, n);
      ASSERT_TRUE(d.resolved);
      const auto a = averaged_difference(f, va12(), 2, n).modulus();
      for (std::size_t i = 0; i < a.values.size(); ++i)
        EXPECT_LE(a.values[i], d.values.values[i] * (1 + 1e-12) + 1e-14);
    }
  }
}

TEST(Smoothness, DifferenceNormBaseCases) {
  const auto g = canonical();
  const auto spec = SpaceSpec::F(va12(), 1.0, {2, 2}, 2);
  DifferenceProfile prof;
  EXPECT_EQ(difference_norm(GridFunction::zeros(g), spec, prof).value, 0.0);
  const auto c = GridFunction::constant(g, 3.0);
  const double lp = mixed_lp(c, {2, 2}, {1, 1});
  EXPECT_NEAR(difference_norm(c, spec, prof).value, lp, 1e-12 * lp);
}

TEST(SmoothnessProperty, DifferenceNormHomogeneous) {
  const auto spec = SpaceSpec::F(va12(), 1.0, {2, 3}, 2);
  DifferenceProfile prof;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto f = sample(seed);
    const double a = difference_norm(f, spec, prof).value;
    const double b = difference_norm(f.scaled(cplx(0, -2.5)), spec, prof).value;
    EXPECT_NEAR(b, 2.5 * a, 1e-12 * b);
  }
}

TEST(Smoothness, DifferenceWindow) {
  DifferenceProfile prof;
  EXPECT_NO_THROW(check_difference_window(SpaceSpec::F(va12(), 1.0, {2, 2}, 2), prof));
  EXPECT_THROW(check_difference_window(SpaceSpec::F(va12(), 1.0, {1, 2}, 2), prof), ParameterWindow);
  EXPECT_THROW(check_difference_window(SpaceSpec::F(va12(), 1.0, {2, kInf}, 2), prof),
               ParameterWindow);
  EXPECT_THROW(check_difference_window(SpaceSpec::F(va12(), 0.0, {2, 2}, 2), prof), ParameterWindow);
  EXPECT_THROW(check_difference_window(SpaceSpec::F(va12(), 1.0, {2, 2}, 0.5), prof),
               ParameterWindow);
  DifferenceProfile m1;
  m1.M = 1;
  EXPECT_THROW(check_difference_window(SpaceSpec::F(va12(), 1.0, {2, 2}, 2), m1), ParameterWindow);
  DifferenceProfile wide;
  wide.phi = {2, 2};
  EXPECT_THROW(check_difference_window(SpaceSpec::F(va12(), 1.0, {2, 2}, 2), wide), ParameterWindow);
  EXPECT_NO_THROW(check_difference_window(SpaceSpec::F(va12(), 1.6, {2, 2}, 2), wide));
}

// 1-d isotropic torus with unit spacing: balls are index intervals.
Field brute_maximal(const Field& f, double r) {
  const auto n = static_cast<long>(f.grid.dim(0));
  std::vector<double> out(f.values.size());
  for (long x = 0; x < n; ++x) {
    double best = std::abs(f.values[static_cast<std::size_t>(x)]);
    for (double delta = n / 2.0; delta >= 1.0; delta /= 2.0) {
      double acc = 0.0;
      int cnt = 0;
      for (long s = -n / 2; s < n / 2; ++s)
        if (std::abs(static_cast<double>(s)) <= delta) {
          acc += std::pow(std::abs(f.values[static_cast<std::size_t>(((x + s) % n + n) % n)]), r);
          ++cnt;
        }
      best = std::max(best, std::pow(acc / cnt, 1.0 / r));
    }
    out[static_cast<std::size_t>(x)] = best;
  }
  return Field(f.grid, std::move(out));
}

TEST(Maximal, BruteForceOracle) {
  const auto g = make_grid({16}, {16.0});
  const DecomposedAnisotropy iso(Anisotropy::scalar(1.0, 1));
  std::vector<double> half(16, 0.0);
  for (int i = 0; i < 8; ++i) half[static_cast<std::size_t>(i)] = 1.0;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> rnd(16);
  for (auto& v : rnd) v = u(rng);
  for (const auto& vals : {half, rnd})
    for (double r : {1.0, 2.0}) {
      const Field f(g, vals);
      const auto got = maximal(f, iso, {r});
      const auto want = brute_maximal(f, r);
      for (std::size_t i = 0; i < 16; ++i) EXPECT_NEAR(got.values[i], want.values[i], 1e-13);
    }
}

TEST(MaximalProperty, DominatesAndPreservesConstants) {
  const auto g = canonical();
  const auto c = maximal(Field(g, 1.75), va12(), {1.0, 2.0});
  for (double v : c.values) EXPECT_NEAR(v, 1.75, 1e-13);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto f = sample(seed);
    const auto mod = f.modulus();
    const auto m1 = maximal(f, va12(), {1.0, 1.0});
    const auto m2 = maximal(f, va12(), {2.0, 2.0});
    for (std::size_t i = 0; i < mod.values.size(); ++i) {
      EXPECT_GE(m1.values[i], mod.values[i] * (1 - 1e-13));
      // Power means increase with r.
      EXPECT_GE(m2.values[i], m1.values[i] * (1 - 1e-12));
    }
    // Lattice property: |f| <= |f| + |h| pointwise gives M f <= M (|f| + |h|).
    const auto h = sample(seed + 100);
    std::vector<double> sum(mod.values.size());
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = mod.values[i] + h.modulus().values[i];
    const auto ms = maximal(Field(g, sum), va12(), {1.0, 1.0});
    for (std::size_t i = 0; i < sum.size(); ++i)
      EXPECT_LE(m1.values[i], ms.values[i] * (1 + 1e-12));
  }
  EXPECT_THROW(maximal(Field(g, 1.0), va12(), {1.0}), ShapeMismatch);
  EXPECT_THROW(maximal(Field(g, 1.0), va12(), {1.0, 0.0}), InvalidArgument);
}

TEST(Peetre, ConstantsAndDomination) {
  const auto g = canonical();
  const auto c = peetre_maximal(GridFunction::constant(g, cplx(0, -2.0)), va12(), {1, 1}, {1, 1});
  for (double v : c.values) EXPECT_NEAR(v, 2.0, 1e-14);
  const auto f = sample(3);
  const auto p = peetre_maximal(f, va12(), {1, 1}, {16, 16});
  const auto mod = f.modulus();
  for (std::size_t i = 0; i < mod.values.size(); ++i) EXPECT_GE(p.values[i], mod.values[i]);
  EXPECT_THROW(peetre_maximal(f, va12(), {1, 1}, {2, 2}), CoverageError);
  EXPECT_THROW(peetre_maximal(f, va12(), {1}, {16, 16}), ShapeMismatch);
}

// 32 x 32 lattice with spacing 1/4 on an 8 x 8 torus.
TorusGrid cube_grid() { return TorusGrid({32, 32}, {8.0, 8.0}); }

const Anisotropy& diag12() {
  static const Anisotropy a = Anisotropy::diagonal({1.0, 2.0});
  return a;
}

GridFunction tabulate(const TorusGrid& g, const std::function<double(double, double)>& fn) {
  std::vector<cplx> s(g.size());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unravel(i, idx);
    s[i] = fn(g.coordinate(0, idx[0]), g.coordinate(1, idx[1]));
  }
  return GridFunction::from_samples(g, 1, std::move(s));
}

TEST(Cubes, Tiling) {
  const auto g = cube_grid();
  for (int n : {0, 1}) {
    std::vector<int> hits(g.size(), 0);
    const long k0 = 8L << n, k1 = 8L << (2 * n);
    for (long a = 0; a < k0; ++a)
      for (long b = 0; b < k1; ++b)
        for (std::size_t i : cube_members(g, diag12(), DyadicCube{n, {a, b}}))
          ++hits[i];
    for (int h : hits) EXPECT_EQ(h, 1);
  }
  EXPECT_EQ(cube_members(g, diag12(), DyadicCube{0, {1, 1}}).size(), 16u);
  EXPECT_EQ(cube_members(g, diag12(), DyadicCube{0, {1, 1}, 2.0}).size(), 64u);
  EXPECT_THROW(cube_members(g, diag12(), DyadicCube{-3, {0, 0}}), InvalidArgument);
}

TEST(Oscillation, PolynomialsAreExact) {
  const auto g = cube_grid();
  const auto lin = tabulate(g, [](double x, double y) { return 3 + 2 * x - y; });
  const auto quad = tabulate(g, [](double x, double y) { return x * x - 3 * x * y + y; });
  for (double p : {1.0, 2.0, kInf}) {
    EXPECT_LE(oscillation(lin, diag12(), 2, DyadicCube{0, {1, 1}}, p).value, 1e-12);
    EXPECT_LE(oscillation(quad, diag12(), 3, DyadicCube{0, {2, 1}}, p).value, 1e-11);
  }
  EXPECT_GT(oscillation(quad, diag12(), 2, DyadicCube{0, {2, 1}}, 2.0).value, 1e-3);
  EXPECT_TRUE(oscillation(lin, diag12(), 1, DyadicCube{0, {1, 1}}, kInf).suboptimal);
  EXPECT_FALSE(oscillation(lin, diag12(), 1, DyadicCube{0, {1, 1}}, 2.0).suboptimal);
  EXPECT_THROW(oscillation(lin, diag12(), 1, DyadicCube{0, {1, 1}}, 3.0), InvalidArgument);
  EXPECT_THROW(oscillation(lin, diag12(), 0, DyadicCube{0, {1, 1}}, 2.0), InvalidArgument);
}

GridFunction random_samples(const TorusGrid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  std::vector<cplx> s(g.size());
  for (auto& v : s) v = n(rng);
  return GridFunction::from_samples(g, 1, std::move(s));
}

TEST(OscillationProperty, ConstantFitOracles) {
  const auto g = cube_grid();
  const DyadicCube q{0, {2, 3}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_samples(g, seed);
    const auto members = cube_members(g, diag12(), q);
    std::vector<double> v;
    for (std::size_t i : members) v.push_back(f.samples()[i].real());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0, dev_mean = 0.0;
    for (double x : v) var += (x - mean) * (x - mean), dev_mean += std::abs(x - mean);
    var /= static_cast<double>(v.size());
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[sorted.size() / 2];
    double dev_med = 0.0, sup_mean = 0.0;
    for (double x : v) dev_med += std::abs(x - med), sup_mean = std::max(sup_mean, std::abs(x - mean));
    const double cell = g.cell_volume();

    const auto r2 = oscillation(f, diag12(), 1, q, 2.0);
    EXPECT_EQ(r2.points, v.size());
    EXPECT_NEAR(r2.normalized, std::sqrt(var), 1e-12);
    const auto r1 = oscillation(f, diag12(), 1, q, 1.0);
    EXPECT_GE(r1.value, dev_med * cell * (1 - 1e-12));
    EXPECT_LE(r1.value, dev_mean * cell * (1 + 1e-12));
    EXPECT_NEAR(oscillation(f, diag12(), 1, q, kInf).value, sup_mean, 1e-12);

    double prev = kInf;
    for (int m = 1; m <= 3; ++m) {
      const double e = oscillation(f, diag12(), m, q, 2.0).value;
      EXPECT_LE(e, prev * (1 + 1e-12));
      prev = e;
    }
    // Nested cubes: the inner best fit beats the outer fit restricted to it.
    const double outer = oscillation(f, diag12(), 1, DyadicCube{0, {1, 1}}, 2.0).value;
    const double inner = oscillation(f, diag12(), 1, DyadicCube{1, {3, 5}}, 2.0).value;
    EXPECT_LE(inner, outer * (1 + 1e-12));
  }
}

}  // namespace
}  // namespace anisolab
