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

#include "anisolab/spaces.hpp"

namespace anisolab {
namespace {

const DecomposedAnisotropy& va12() {
  static const DecomposedAnisotropy va({Anisotropy::scalar(1.0, 1), Anisotropy::scalar(2.0, 1)});
  return va;
}

TorusGrid canonical(std::size_t n = 64) {
  return TorusGrid({n, n}, {std::numbers::pi, std::numbers::pi / 64.0});
}

double l2(const GridFunction& f) { return mixed_lp(f, std::vector<double>(f.grid().rank(), 2.0), std::vector<std::size_t>(f.grid().rank(), 1)); }

TEST(Spaces, FlatZoneValue) {
  // Isotropic 1-d torus of length 2 pi: xi = k, rho(8) = 8 is the flat zone of phi_3.
  const auto g = make_grid({64}, {2 * std::numbers::pi});
  const DecomposedAnisotropy iso(Anisotropy::scalar(1.0, 1));
  const FilterBank b(g, iso);
  const auto e = GridFunction::exponential(g, {8}, 1.0 / std::sqrt(2 * std::numbers::pi));
  EXPECT_NEAR(l2(e), 1.0, 1e-14);
  EXPECT_NEAR(tl_norm(e, SpaceSpec::F(iso, 1.0, {2}, 2), b).value, 8.0, 1e-13);
  EXPECT_NEAR(besov_norm(e, SpaceSpec::B(iso, 1.0, {2}, 2), b).value, 8.0, 1e-13);
  EXPECT_NEAR(tl_norm(e, SpaceSpec::F(iso, 0.0, {2}, 2), b).value, 1.0, 1e-14);
  EXPECT_EQ(tl_norm(GridFunction::zeros(g), SpaceSpec::F(iso, 1.0, {2}, 2), b).value, 0.0);
  EXPECT_EQ(besov_norm(GridFunction::zeros(g), SpaceSpec::B(iso, 1.0, {2}, 2), b).value, 0.0);
}

TEST(Spaces, FlatZoneAnisotropic) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  const auto e = GridFunction::exponential(g, {4, 0});
  const double v = tl_norm(e, SpaceSpec::F(va12(), 1.0, {2, 2}, 2), b).value;
  EXPECT_NEAR(v, 8.0 * l2(e), 1e-13 * v);
}

TEST(Spaces, Requirements) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  const auto f = random_bandlimited(g, 1, annulus_band(va12(), 33, 60));
  EXPECT_THROW(tl_norm(f, SpaceSpec::F(va12(), 1, {2, 2}, 2), b), CoverageError);
  const DecomposedAnisotropy other({Anisotropy::scalar(1.0, 1), Anisotropy::scalar(1.0, 1)});
  const auto h = random_bandlimited(g, 1, annulus_band(va12(), 2, 4));
  EXPECT_THROW(tl_norm(h, SpaceSpec::F(other, 1, {2, 2}, 2), b), InvalidArgument);
  EXPECT_THROW(tl_norm(h, SpaceSpec::B(va12(), 1, {2, 2}, 2), b), InvalidArgument);
}

TEST(SpacesProperty, BEqualsFAtPEqualsQ) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_bandlimited(g, seed, annulus_band(va12(), 0, 32), 2);
    for (double p : {1.0, 2.0, 3.0}) {
      const double a = tl_norm(f, SpaceSpec::F(va12(), 0.7, {p, p}, p), b).value;
      const double c = besov_norm(f, SpaceSpec::B(va12(), 0.7, {p, p}, p), b).value;
      EXPECT_NEAR(a, c, 1e-12 * a);
    }
  }
}

TEST(SpacesProperty, Homogeneity) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_bandlimited(g, seed, annulus_band(va12(), 2, 32));
    const auto spec = SpaceSpec::F(va12(), 1.2, {1.5, 3}, 1.5);
    const double a = tl_norm(f, spec, b).value;
    EXPECT_NEAR(tl_norm(f.scaled(cplx(-2.0, 1.5)), spec, b).value, 2.5 * a, 1e-13 * a);
  }
}

TEST(SpacesProperty, MonotoneInQ) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_bandlimited(g, seed, annulus_band(va12(), 0, 32));
    double prev = kInf;
    for (double q : {0.5, 1.0, 2.0, 4.0, kInf}) {
      const double v = tl_norm(f, SpaceSpec::F(va12(), 0.5, {2, 2}, q), b).value;
      EXPECT_LE(v, prev * (1 + 1e-14));
      prev = v;
    }
  }
}

TEST(SpacesProperty, BesovPiecesRecomputeValue) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  const auto f = random_bandlimited(g, 3, annulus_band(va12(), 0, 32));
  const auto v = besov_norm(f, SpaceSpec::B(va12(), 1, {2, 1.5}, 3), b);
  double s = 0;
  for (double x : v.pieces) s += x * x * x;
  EXPECT_NEAR(std::cbrt(s), v.value, 1e-12 * v.value);
  EXPECT_EQ(v.pieces.size(), b.n_max() + 1);
  EXPECT_EQ(v.bank_id, b.id());
}

TEST(Spaces, LiftExamples) {
  const auto g = canonical();
  const auto f = random_bandlimited(g, 4, annulus_band(va12(), 0, 32));
  EXPECT_EQ(lift(f, 0.0, va12()).samples(), f.samples());
  const auto e = GridFunction::exponential(g, {4, 0});
  const auto le = lift(e, 1.0, va12());
  EXPECT_NEAR(std::abs(le.spectrum()[g.flat({4, 0})] - 8.0), 0.0, 1e-13);
  EXPECT_EQ(lift_symbol(0.0), 0.5);
  EXPECT_EQ(lift_symbol(1.0), 1.0);
  EXPECT_EQ(lift_symbol(3.0), 3.0);
  for (double r = 0.0; r < 1.0; r += 0.01) {
    EXPECT_GE(lift_symbol(r), 0.5);
    EXPECT_LE(lift_symbol(r), 1.0);
  }
}

TEST(SpacesProperty, LiftRoundTrip) {
  const auto g = canonical();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_bandlimited(g, seed, annulus_band(va12(), 0, 32), 2);
    for (double sigma : {-1.5, 1.0, 2.5}) {
      const auto back = lift(lift(f, sigma, va12()), -sigma, va12());
      double err = 0.0, peak = 0.0;
      for (std::size_t i = 0; i < f.samples().size(); ++i) {
        err = std::max(err, std::abs(back.samples()[i] - f.samples()[i]));
        peak = std::max(peak, std::abs(f.samples()[i]));
      }
      EXPECT_LE(err, 1e-12 * peak);
    }
  }
}

// Separable f = g(x) h(y): L_q(y; F(x)) = ||h||_q * F-norm of g on a 1-d torus.
TEST(Spaces, LqOfInnerSeparable) {
  const auto g2 = canonical();
  const TorusGrid gx({64}, {std::numbers::pi});
  const TorusGrid gy({64}, {std::numbers::pi / 64.0});
  const DecomposedAnisotropy iso(Anisotropy::scalar(1.0, 1));
  const auto gfun = random_bandlimited(gx, 11, annulus_band(iso, 0, 32));
  const auto hfun = random_bandlimited(gy, 12, annulus_band(iso, 0, 2000));
  std::vector<cplx> s(g2.size());
  for (std::size_t i = 0; i < 64; ++i)
    for (std::size_t k = 0; k < 64; ++k) s[i * 64 + k] = gfun.samples()[i] * hfun.samples()[k];
  const auto f = GridFunction::from_samples(g2, 1, s);
  const FilterBank inner2(g2, iso, 1.0, 2.0, 0);
  const FilterBank inner1(gx, iso);
  for (double q : {1.5, 3.0}) {
    const auto spec = SpaceSpec::LqOfInner(iso, {1}, 0.5, {2.5}, {q}, 2.0);
    const double v = lq_of_inner_norm(f, spec, inner2).value;
    const double gnorm = tl_norm(gfun, SpaceSpec::F(iso, 0.5, {2.5}, 2.0), inner1).value;
    const double hnorm = mixed_lp(hfun, {q}, {1});
    EXPECT_NEAR(v, gnorm * hnorm, 1e-9 * v);
  }
}

TEST(Spaces, LqOfInnerFlatZoneTimesConstant) {
  // Inner flat-zone exponential (scale 2) times an outer constant.
  const TorusGrid g({64, 16}, {2 * std::numbers::pi, 1.0});
  const DecomposedAnisotropy iso(Anisotropy::scalar(1.0, 1));
  const auto e = GridFunction::exponential(g, {4, 0}, 1.0 / std::sqrt(2 * std::numbers::pi));
  const FilterBank inner(g, iso, 1.0, 2.0, 0);
  const double v = lq_of_inner_norm(e, SpaceSpec::LqOfInner(iso, {1}, 1.0, {2}, {3}, 2), inner).value;
  EXPECT_NEAR(v, 4.0, 1e-12);
  EXPECT_EQ(lq_of_inner_norm(GridFunction::zeros(g), SpaceSpec::LqOfInner(iso, {1}, 1.0, {2}, {3}, 2), inner).value, 0.0);
}

TEST(Spaces, ScriptFConstantInOuter) {
  const auto g = canonical();
  const DecomposedAnisotropy outer(Anisotropy::scalar(1.0, 1));
  const FilterBank b(g, outer, 1.0, 2.0, 1);
  // Depends on x only: only the outer S_0 survives.
  const auto f = random_bandlimited(g, 5, [](const std::vector<long>& k, const Vector&) {
    return k[1] == 0 && std::abs(k[0]) <= 10;
  });
  const auto spec = SpaceSpec::ScriptF(outer, {1}, 2.0, {1.5}, {3}, 2);
  const double v = script_f_norm(f, spec, b).value;
  EXPECT_NEAR(v, mixed_lp(f, {1.5, 3}, {1, 1}), 1e-12 * v);
  EXPECT_THROW(script_f_norm(f, spec, FilterBank(g, outer, 1.0, 2.0, 0)), ShapeMismatch);
}

TEST(SpacesProperty, ScriptFAllExponentsEqual) {
  // r = p = q and a bank in the outer variable only: equals F with that bank
  // read as a full-grid sequence.
  const auto g = canonical();
  const DecomposedAnisotropy outer(Anisotropy::scalar(1.0, 1));
  const FilterBank b(g, outer, 1.0, 2.0, 1);
  const auto f = random_bandlimited(g, 6, annulus_band(va12(), 0, 32));
  const auto spec = SpaceSpec::ScriptF(outer, {1}, 0.5, {2}, {2}, 2);
  std::vector<Field> pieces;
  for (const auto& p : b.decompose(f)) pieces.push_back(p.modulus());
  const double ref = seq_norm_F(pieces, 0.5, {2, 2}, 2, {1, 1});
  EXPECT_NEAR(script_f_norm(f, spec, b).value, ref, 1e-13 * ref);
}

TEST(SpacesProperty, ChannelsUseEuclideanModulus) {
  const auto g = canonical();
  const FilterBank b(g, va12());
  const auto f1 = random_bandlimited(g, 7, annulus_band(va12(), 8, 16));
  std::vector<cplx> s(2 * g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    s[i] = 3.0 * f1.spectrum()[i];
    s[g.size() + i] = 4.0 * f1.spectrum()[i];
  }
  const auto f2 = GridFunction::from_spectrum(g, 2, s);
  const auto spec = SpaceSpec::F(va12(), 1, {2, 3}, 1.5);
  EXPECT_NEAR(tl_norm(f2, spec, b).value, 5.0 * tl_norm(f1, spec, b).value, 1e-12 * tl_norm(f2, spec, b).value);
}

}  // namespace
}  // namespace anisolab
