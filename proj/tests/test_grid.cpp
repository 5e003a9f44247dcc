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
#include <filesystem>
#include <numbers>
#include <random>

#include "anisolab/grid.hpp"
#include "anisolab/grid_io.hpp"

namespace anisolab {
namespace {

const DecomposedAnisotropy& va12() {
  static const DecomposedAnisotropy va({Anisotropy::scalar(1.0, 1), Anisotropy::scalar(2.0, 1)});
  return va;
}

std::vector<cplx> random_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> s(n);
  for (auto& v : s) v = {g(rng), g(rng)};
  return s;
}

TEST(Grid, MakeGridExamples) {
  const auto g = make_grid({64, 64}, {1, 1});
  EXPECT_EQ(g.size(), 4096u);
  EXPECT_DOUBLE_EQ(g.cell_volume(), 1.0 / 4096.0);
  const auto h = make_grid({8}, {2});
  EXPECT_EQ(h.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    const long k = h.signed_index(0, i);
    EXPECT_GE(k, -4);
    EXPECT_LT(k, 4);
    EXPECT_NEAR(h.frequency(0, i), std::numbers::pi * static_cast<double>(k), 1e-14);
  }
  EXPECT_THROW(make_grid({6}), InvalidArgument);
  EXPECT_THROW(make_grid({8}, {-1.0}), InvalidArgument);
}

TEST(Grid, ConstantTransform) {
  const auto g = make_grid({16, 8});
  std::vector<cplx> ones(g.size(), 1.0);
  const auto f = GridFunction::from_samples(g, 1, ones);
  const auto& s = f.spectrum();
  EXPECT_NEAR(std::abs(s[0] - 1.0), 0.0, 1e-14);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(std::abs(s[i]), 1e-14);
}

TEST(Grid, ExponentialHasSingleCoefficient) {
  const auto g = make_grid({16, 8}, {1.0, 2.0});
  std::vector<cplx> v(g.size());
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unravel(i, idx);
    const double ph = 2 * std::numbers::pi * (3 * g.coordinate(0, idx[0]) / 1.0 -
                                              2 * g.coordinate(1, idx[1]) / 2.0);
    v[i] = std::polar(1.0, ph);
  }
  const auto f = GridFunction::from_samples(g, 1, v);
  const std::size_t at = g.flat({g.wrap(0, 3), g.wrap(1, -2)});
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(std::abs(f.spectrum()[i]), i == at ? 1.0 : 0.0, 1e-12);
  const auto e = GridFunction::exponential(g, {3, -2});
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(std::abs(e.samples()[i] - v[i]), 0.0, 1e-12);
}

TEST(GridProperty, RoundTrip) {
  const auto g = make_grid({32, 16, 4});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = random_samples(g.size() * 2, seed);
    const auto f = GridFunction::from_samples(g, 2, s);
    const auto back = GridFunction::from_spectrum(g, 2, f.spectrum());
    double err = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      err = std::max(err, std::abs(back.samples()[i] - s[i]));
      peak = std::max(peak, std::abs(s[i]));
    }
    EXPECT_LE(err, 1e-12 * peak);
  }
}

TEST(GridProperty, Parseval) {
  const auto g = make_grid({32, 64}, {std::numbers::pi, 2.0});
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto f = GridFunction::from_samples(g, 1, random_samples(g.size(), 1000 + seed));
    double lhs = 0.0, rhs = 0.0;
    for (const auto& v : f.samples()) lhs += std::norm(v) * g.cell_volume();
    for (const auto& v : f.spectrum()) rhs += std::norm(v) * g.volume();
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * lhs);
  }
}

TEST(Grid, FrequencyQuasiNormField) {
  const auto g1 = make_grid({16}, {1.0});
  const DecomposedAnisotropy iso(Anisotropy::scalar(1.0, 1));
  const auto r1 = frequency_quasi_norm_field(g1, iso);
  for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(r1[i], std::abs(g1.frequency(0, i)), 1e-12);
  const auto g = make_grid({16, 16}, {1.0, 1.0});
  const auto r = frequency_quasi_norm_field(g, va12());
  EXPECT_EQ(r[0], 0.0);
  const std::size_t at = g.flat({0, 3});
  EXPECT_NEAR(r[at], std::sqrt(g.frequency(1, 3)), 1e-12);
}

TEST(Grid, RandomBandlimitedExamples) {
  const auto g = make_grid({16, 16});
  const auto c = random_bandlimited(g, 3, [](const std::vector<long>& k, const Vector&) {
    return k[0] == 0 && k[1] == 0;
  });
  for (const auto& v : c.samples()) EXPECT_NEAR(std::abs(v - c.samples()[0]), 0.0, 1e-14);
  const auto a = random_bandlimited(g, 42, annulus_band(va12(), 2.0, 4.0));
  const auto b = random_bandlimited(g, 42, annulus_band(va12(), 2.0, 4.0));
  EXPECT_EQ(a.samples(), b.samples());
  const auto rho = frequency_quasi_norm_field(g, va12());
  for (std::size_t i = 0; i < g.size(); ++i)
    if (rho[i] < 2.0 || rho[i] > 4.0) EXPECT_EQ(a.spectrum()[i], cplx(0.0));
  EXPECT_THROW(random_bandlimited(g, 1, annulus_band(va12(), 1e6, 2e6)), InvalidArgument);
}

TEST(GridProperty, RealFamiliesAreReal) {
  const auto g = make_grid({32, 32}, {std::numbers::pi, 0.5});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto f = random_bandlimited(g, seed, annulus_band(va12(), 4.0, 8.0));
    double im = 0.0, re = 0.0;
    for (const auto& v : f.samples()) {
      im = std::max(im, std::abs(v.imag()));
      re = std::max(re, std::abs(v.real()));
    }
    EXPECT_LE(im, 1e-13 * re);
  }
}

TEST(GridProperty, BandIsGridIndependent) {
  const TorusGrid g({32, 32}, {std::numbers::pi, 0.25});
  const auto f = random_bandlimited(g, 9, annulus_band(va12(), 4.0, 8.0));
  const auto h = random_bandlimited(g.refined(2), 9, annulus_band(va12(), 4.0, 8.0));
  std::vector<std::size_t> idx;
  for (std::size_t i : f.spectral_support()) {
    g.unravel(i, idx);
    std::vector<std::size_t> j(2);
    for (std::size_t a = 0; a < 2; ++a) j[a] = h.grid().wrap(a, g.signed_index(a, idx[a]));
    EXPECT_EQ(f.spectrum()[i], h.spectrum()[h.grid().flat(j)]);
  }
  EXPECT_EQ(f.spectral_support().size(), h.spectral_support().size());
}

TEST(Grid, DilateExamples) {
  const auto g = make_grid({32, 32});
  const DecomposedAnisotropy iso(Anisotropy::scalar(1.0, 2));
  const auto e = GridFunction::exponential(g, {3, -2});
  EXPECT_EQ(dilate_sample(e, iso, 0).samples(), e.samples());
  const auto d = dilate_sample(e, iso, 1);
  EXPECT_EQ(d.spectral_support(), std::vector<std::size_t>{g.flat({g.wrap(0, 6), g.wrap(1, -4)})});
  const auto d12 = dilate_sample(e, va12(), 1);
  EXPECT_EQ(d12.spectral_support(), std::vector<std::size_t>{g.flat({g.wrap(0, 6), g.wrap(1, -8)})});
  EXPECT_THROW(dilate_sample(e, va12(), 2), CoverageError);
}

TEST(GridProperty, DilateComposes) {
  const auto g = make_grid({64, 128});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = random_bandlimited(g, seed, annulus_band(va12(), 2.0, 4.0), 2);
    const auto twice = dilate_sample(dilate_sample(f, va12(), 1), va12(), 1);
    const auto once = dilate_sample(f, va12(), 2);
    EXPECT_EQ(twice.spectrum(), once.spectrum());
  }
}

TEST(GridProperty, DilateMatchesPointSamples) {
  // f(A_2 x) sampled directly equals the re-indexed spectrum.
  const auto g = make_grid({16, 64});
  const auto e = GridFunction::exponential(g, {1, 3});
  const auto d = dilate_sample(e, va12(), 1);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unravel(i, idx);
    const double ph = 2 * std::numbers::pi * (1 * 2 * g.coordinate(0, idx[0]) + 3 * 4 * g.coordinate(1, idx[1]));
    EXPECT_NEAR(std::abs(d.samples()[i] - std::polar(1.0, ph)), 0.0, 1e-12);
  }
}

TEST(GridProperty, OffBandMultiplierGivesExactZero) {
  const auto g = make_grid({32, 32}, {std::numbers::pi, 0.5});
  const auto f = random_bandlimited(g, 5, annulus_band(va12(), 4.0, 8.0));
  const auto rho = frequency_quasi_norm_field(g, va12());
  std::vector<double> m(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) m[i] = (rho[i] < 4.0 || rho[i] > 8.0) ? 1.7 : 0.0;
  EXPECT_TRUE(f.multiply_spectrum(m).is_zero());
}

TEST(GridIo, RoundTrip128) {
  const auto g = make_grid({16, 8}, {std::numbers::pi, 0.5});
  const auto f = GridFunction::from_samples(g, 3, random_samples(g.size() * 3, 77));
  const auto bytes = encode_grid_function(f, Scalar::Complex128);
  const auto h = decode_grid_function(bytes);
  EXPECT_EQ(h.grid(), g);
  EXPECT_EQ(h.channels(), 3u);
  EXPECT_EQ(h.samples(), f.samples());
}

TEST(GridIo, RoundTrip64AndFile) {
  const auto g = make_grid({8, 8});
  const auto f = GridFunction::from_samples(g, 1, random_samples(g.size(), 78));
  const auto path = std::filesystem::temp_directory_path() / "anisolab_test_gf.bin";
  write_grid_function(path, f);
  const auto h = read_grid_function(path);
  std::filesystem::remove(path);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(std::abs(h.samples()[i] - f.samples()[i]), 0.0, 1e-6 * std::abs(f.samples()[i]) + 1e-7);
}

TEST(GridIo, RejectsCorruptInput) {
  EXPECT_THROW(decode_grid_function("not a grid function"), FormatError);
  const auto f = GridFunction::constant(make_grid({4}), 1.0);
  auto bytes = encode_grid_function(f);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_grid_function(bytes), FormatError);
}

TEST(GridIo, CsvColumns) {
  const auto f = GridFunction::constant(make_grid({2, 2}), cplx(1.0, -2.0), 2);
  const auto csv = grid_function_csv(f);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "i0,i1,re0,im0,re1,im1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

}  // namespace
}  // namespace anisolab
