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

#ifndef ANISOLAB_GRID_HPP_
#define ANISOLAB_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "anisolab/anisotropy.hpp"
#include "anisolab/error.hpp"
#include "anisolab/fft.hpp"

namespace anisolab {

// Uniform periodic lattice with N_a points per axis on [0, L_a).
class TorusGrid {
 public:
  TorusGrid() = default;
  explicit TorusGrid(std::vector<std::size_t> dims, std::vector<double> period = {})
      : dims_(std::move(dims)), period_(std::move(period)) {
    if (dims_.empty()) throw InvalidArgument("grid: at least one axis required");
    if (period_.empty()) period_.assign(dims_.size(), 1.0);
    if (period_.size() != dims_.size()) throw ShapeMismatch("grid: period count != axis count");
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      const auto n = dims_[a];
      if (n < 2 || (n & (n - 1)) != 0)
        throw InvalidArgument("grid: axis length must be a power of two >= 2");
      if (!(period_[a] > 0.0) || !std::isfinite(period_[a]))
        throw InvalidArgument("grid: period must be positive");
    }
    strides_.assign(dims_.size(), 1);
    for (std::size_t a = dims_.size() - 1; a > 0; --a) strides_[a - 1] = strides_[a] * dims_[a];
    size_ = strides_[0] * dims_[0];
  }

  std::size_t rank() const { return dims_.size(); }
  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t dim(std::size_t a) const { return dims_.at(a); }
  const std::vector<double>& period() const { return period_; }
  double period(std::size_t a) const { return period_.at(a); }
  std::size_t size() const { return size_; }
  std::size_t stride(std::size_t a) const { return strides_.at(a); }
  double spacing(std::size_t a) const { return period_[a] / static_cast<double>(dims_[a]); }

  double cell_volume() const {
    double v = 1.0;
    for (std::size_t a = 0; a < rank(); ++a) v *= spacing(a);
    return v;
  }
  double volume() const {
    double v = 1.0;
    for (double l : period_) v *= l;
    return v;
  }

  // Signed index in [-N/2, N/2); used for frequencies and centered positions.
  long signed_index(std::size_t a, std::size_t i) const {
    const auto n = static_cast<long>(dims_[a]);
    const auto s = static_cast<long>(i);
    return s < n / 2 ? s : s - n;
  }
  double frequency(std::size_t a, std::size_t i) const {
    return 2.0 * std::numbers::pi * static_cast<double>(signed_index(a, i)) / period_[a];
  }
  double nyquist_frequency(std::size_t a) const {
    return std::numbers::pi * static_cast<double>(dims_[a]) / period_[a];
  }
  bool is_nyquist(std::size_t a, std::size_t i) const { return 2 * i == dims_[a]; }
  double coordinate(std::size_t a, std::size_t i) const {
    return static_cast<double>(i) * spacing(a);
  }
  double centered_coordinate(std::size_t a, std::size_t i) const {
    return static_cast<double>(signed_index(a, i)) * spacing(a);
  }

  // Storage index of a signed lattice index (wrapped modulo N).
  std::size_t wrap(std::size_t a, long k) const {
    const auto n = static_cast<long>(dims_[a]);
    long r = k % n;
    if (r < 0) r += n;
    return static_cast<std::size_t>(r);
  }

  void unravel(std::size_t flat, std::vector<std::size_t>& idx) const {
    idx.resize(rank());
    for (std::size_t a = 0; a < rank(); ++a) {
      idx[a] = flat / strides_[a];
      flat %= strides_[a];
    }
  }
  std::size_t flat(const std::vector<std::size_t>& idx) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < rank(); ++a) f += idx[a] * strides_[a];
    return f;
  }

  TorusGrid refined(std::size_t factor = 2) const {
    std::vector<std::size_t> d = dims_;
    for (auto& n : d) n *= factor;
    return TorusGrid(d, period_);
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    for (std::size_t a = 0; a < rank(); ++a) os << (a ? "x" : "") << dims_[a];
    os << " period(";
    for (std::size_t a = 0; a < rank(); ++a) os << (a ? "," : "") << period_[a];
    os << ")";
    return os.str();
  }

  bool operator==(const TorusGrid& o) const { return dims_ == o.dims_ && period_ == o.period_; }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> period_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

inline TorusGrid make_grid(std::vector<std::size_t> dims, std::vector<double> period = {}) {
  return TorusGrid(std::move(dims), std::move(period));
}

// Real-valued lattice field (moduli, weights, multipliers, quasi-norm maps).
struct Field {
  TorusGrid grid;
  std::vector<double> values;

  Field() = default;
  Field(TorusGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.size()) throw ShapeMismatch("field: value count != grid size");
  }
  Field(TorusGrid g, double fill) : grid(std::move(g)), values(grid.size(), fill) {}
  double operator[](std::size_t i) const { return values[i]; }
  double max() const { return *std::max_element(values.begin(), values.end()); }
};

// Sampled complex function with `channels` components. Storage is
// channel-major: channel c occupies [c * size, (c + 1) * size).
class GridFunction {
 public:
  GridFunction() = default;

  static GridFunction from_samples(TorusGrid grid, std::size_t channels,
                                   std::vector<cplx> samples) {
    check_shape(grid, channels, samples.size());
    GridFunction f;
    f.grid_ = std::move(grid);
    f.channels_ = channels;
    f.samples_ = std::make_shared<const std::vector<cplx>>(std::move(samples));
    f.cache_ = std::make_shared<SpectrumCache>();
    return f;
  }

  // The given coefficients are kept verbatim as the spectrum, so spectral
  // zeros stay exact zeros.
  static GridFunction from_spectrum(TorusGrid grid, std::size_t channels,
                                    std::vector<cplx> spectrum) {
    check_shape(grid, channels, spectrum.size());
    std::vector<cplx> s = spectrum;
    for (std::size_t c = 0; c < channels; ++c) fft_inverse(grid.dims(), s.data() + c * grid.size());
    GridFunction f;
    f.grid_ = std::move(grid);
    f.channels_ = channels;
    f.samples_ = std::make_shared<const std::vector<cplx>>(std::move(s));
    f.cache_ = std::make_shared<SpectrumCache>();
    f.exact_spectrum_ = true;
    std::call_once(f.cache_->once, [&] { f.cache_->spectrum = std::move(spectrum); });
    return f;
  }

  static GridFunction zeros(const TorusGrid& grid, std::size_t channels = 1) {
    return from_spectrum(grid, channels, std::vector<cplx>(grid.size() * channels));
  }
  static GridFunction constant(const TorusGrid& grid, cplx value, std::size_t channels = 1) {
    std::vector<cplx> s(grid.size() * channels);
    for (std::size_t c = 0; c < channels; ++c) s[c * grid.size()] = value;
    return from_spectrum(grid, channels, std::move(s));
  }
  // amplitude * exp(i xi_k . x) with xi_k = 2 pi k / L.
  static GridFunction exponential(const TorusGrid& grid, const std::vector<long>& k,
                                  cplx amplitude = 1.0) {
    if (k.size() != grid.rank()) throw ShapeMismatch("exponential: index rank");
    std::vector<std::size_t> idx(grid.rank());
    for (std::size_t a = 0; a < grid.rank(); ++a) {
      const auto n = static_cast<long>(grid.dim(a));
      if (k[a] < -n / 2 || k[a] >= n / 2) throw CoverageError("exponential: frequency off lattice");
      idx[a] = grid.wrap(a, k[a]);
    }
    std::vector<cplx> s(grid.size());
    s[grid.flat(idx)] = amplitude;
    return from_spectrum(grid, 1, std::move(s));
  }

  const TorusGrid& grid() const { return grid_; }
  std::size_t channels() const { return channels_; }
  std::size_t size() const { return grid_.size(); }
  const std::vector<cplx>& samples() const { return *samples_; }
  std::span<const cplx> channel(std::size_t c) const {
    return std::span<const cplx>(samples_->data() + c * grid_.size(), grid_.size());
  }
  bool exact_spectrum() const { return exact_spectrum_; }

  // Forward transform, computed once and shared by copies.
  const std::vector<cplx>& spectrum() const {
    std::call_once(cache_->once, [&] {
      std::vector<cplx> s = *samples_;
      for (std::size_t c = 0; c < channels_; ++c)
        fft_forward(grid_.dims(), s.data() + c * grid_.size());
      cache_->spectrum = std::move(s);
    });
    return cache_->spectrum;
  }

  // Euclidean modulus over channels.
  Field modulus() const {
    std::vector<double> m(grid_.size(), 0.0);
    const auto& s = *samples_;
    if (channels_ == 1) {
      for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(s[i]);
    } else {
      for (std::size_t c = 0; c < channels_; ++c)
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += std::norm(s[c * grid_.size() + i]);
      for (auto& v : m) v = std::sqrt(v);
    }
    return Field(grid_, std::move(m));
  }

  // Spectral multiplication by a real multiplier defined on the lattice.
  GridFunction multiply_spectrum(std::span<const double> m) const {
    if (m.size() != grid_.size()) throw ShapeMismatch("multiplier size != grid size");
    std::vector<cplx> s = spectrum();
    for (std::size_t c = 0; c < channels_; ++c)
      for (std::size_t i = 0; i < grid_.size(); ++i) s[c * grid_.size() + i] *= m[i];
    return from_spectrum(grid_, channels_, std::move(s));
  }
  GridFunction multiply_spectrum(std::span<const cplx> m) const {
    if (m.size() != grid_.size()) throw ShapeMismatch("multiplier size != grid size");
    std::vector<cplx> s = spectrum();
    for (std::size_t c = 0; c < channels_; ++c)
      for (std::size_t i = 0; i < grid_.size(); ++i) s[c * grid_.size() + i] *= m[i];
    return from_spectrum(grid_, channels_, std::move(s));
  }

  GridFunction scaled(cplx factor) const {
    std::vector<cplx> s = spectrum();
    for (auto& v : s) v *= factor;
    return from_spectrum(grid_, channels_, std::move(s));
  }

  GridFunction plus(const GridFunction& o, cplx factor = 1.0) const {
    check_compatible(o);
    std::vector<cplx> s = spectrum();
    const auto& t = o.spectrum();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += factor * t[i];
    return from_spectrum(grid_, channels_, std::move(s));
  }

  // Lattice frequencies carrying a coefficient with modulus above
  // rel_threshold * max modulus (any channel). Exact spectra use exact zeros.
  std::vector<std::size_t> spectral_support(double rel_threshold = 1e-12) const {
    const auto& s = spectrum();
    double peak = 0.0;
    for (const auto& v : s) peak = std::max(peak, std::abs(v));
    std::vector<std::size_t> out;
    if (peak == 0.0) return out;
    const double cut = exact_spectrum_ ? 0.0 : rel_threshold * peak;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      bool on = false;
      for (std::size_t c = 0; c < channels_ && !on; ++c)
        on = std::abs(s[c * grid_.size() + i]) > cut;
      if (on) out.push_back(i);
    }
    return out;
  }

  bool is_zero() const {
    return std::all_of(samples_->begin(), samples_->end(), [](cplx v) { return v == 0.0; });
  }

  void check_compatible(const GridFunction& o) const {
    if (!(grid_ == o.grid_) || channels_ != o.channels_)
      throw ShapeMismatch("grid functions live on different grids");
  }

 private:
  struct SpectrumCache {
    std::once_flag once;
    std::vector<cplx> spectrum;
  };

  static void check_shape(const TorusGrid& grid, std::size_t channels, std::size_t n) {
    if (channels == 0) throw InvalidArgument("grid function: channels must be positive");
    if (n != grid.size() * channels) throw ShapeMismatch("grid function: sample count mismatch");
  }

  TorusGrid grid_;
  std::size_t channels_ = 1;
  std::shared_ptr<const std::vector<cplx>> samples_;
  std::shared_ptr<SpectrumCache> cache_;
  bool exact_spectrum_ = false;
};

// Physical frequency vector of a flat lattice index, restricted to axes
// [first, first + count).
inline void frequency_vector(const TorusGrid& grid, std::size_t flat, std::size_t first,
                             std::size_t count, Vector& xi) {
  xi.resize(static_cast<Eigen::Index>(count));
  for (std::size_t a = 0; a < grid.rank(); ++a) {
    const std::size_t i = flat / grid.stride(a);
    flat %= grid.stride(a);
    if (a >= first && a < first + count)
      xi(static_cast<Eigen::Index>(a - first)) = grid.frequency(a, i);
  }
}

// rho_vecA over the lattice axes [first, first + VA.dim()).
inline Field frequency_quasi_norm_field(const TorusGrid& grid, const DecomposedAnisotropy& va,
                                        std::size_t first = 0) {
  if (first + va.dim() > grid.rank())
    throw ShapeMismatch("quasi-norm field: anisotropy dimension exceeds grid rank");
  std::vector<double> out(grid.size());
  // One-dimensional diagonal blocks reduce to per-axis tables.
  bool per_axis = true;
  for (const auto& b : va.block_list()) per_axis = per_axis && b.dim() == 1;
  if (per_axis) {
    std::vector<std::vector<double>> table(va.dim());
    for (std::size_t j = 0; j < va.blocks(); ++j) {
      const std::size_t a = first + j;
      table[j].resize(grid.dim(a));
      for (std::size_t i = 0; i < grid.dim(a); ++i)
        table[j][i] = va.block(j).quasi_norm_1d(grid.frequency(a, i));
    }
    for (std::size_t f = 0; f < grid.size(); ++f) {
      double r = 0.0;
      for (std::size_t j = 0; j < va.blocks(); ++j) {
        const std::size_t a = first + j;
        r = std::max(r, table[j][(f / grid.stride(a)) % grid.dim(a)]);
      }
      out[f] = r;
    }
    return Field(grid, std::move(out));
  }
  Vector xi;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    frequency_vector(grid, f, first, va.dim(), xi);
    out[f] = va.vector_quasi_norm(xi);
  }
  return Field(grid, std::move(out));
}

// Predicate over lattice frequencies: signed indices k and physical xi.
using BandPredicate = std::function<bool(const std::vector<long>& k, const Vector& xi)>;

inline BandPredicate annulus_band(const DecomposedAnisotropy& va, double lo, double hi) {
  return [va, lo, hi](const std::vector<long>&, const Vector& xi) {
    const double r = va.vector_quasi_norm(xi);
    return r >= lo && r <= hi;
  };
}

namespace detail {

inline cplx gaussian_coefficient(std::uint64_t seed, const std::vector<long>& k,
                                 std::size_t channel) {
  std::vector<std::uint32_t> key;
  key.push_back(static_cast<std::uint32_t>(seed));
  key.push_back(static_cast<std::uint32_t>(seed >> 32));
  key.push_back(static_cast<std::uint32_t>(channel));
  for (long v : k) {
    const auto u = static_cast<std::uint64_t>(v);
    key.push_back(static_cast<std::uint32_t>(u));
    key.push_back(static_cast<std::uint32_t>(u >> 32));
  }
  std::seed_seq sq(key.begin(), key.end());
  std::mt19937_64 rng(sq);
  std::normal_distribution<double> normal;
  const double re = normal(rng);
  const double im = normal(rng);
  return {re, im};
}

}  // namespace detail

// Random band-limited function. Coefficients depend only on (seed, signed
// frequency index, channel), so the same function results on every grid that
// contains the band. Nyquist indices are never populated. Coefficients are
// scaled by 1/sqrt(band size).
inline GridFunction random_bandlimited(const TorusGrid& grid, std::uint64_t seed,
                                       const BandPredicate& band, std::size_t channels = 1,
                                       bool real = true) {
  if (channels == 0) throw InvalidArgument("random_bandlimited: channels must be positive");
  std::vector<std::size_t> selected;
  std::vector<std::size_t> idx;
  std::vector<long> k(grid.rank()), mk(grid.rank());
  Vector xi(static_cast<Eigen::Index>(grid.rank()));
  for (std::size_t f = 0; f < grid.size(); ++f) {
    grid.unravel(f, idx);
    bool nyq = false;
    for (std::size_t a = 0; a < grid.rank(); ++a) {
      nyq = nyq || grid.is_nyquist(a, idx[a]);
      k[a] = grid.signed_index(a, idx[a]);
      xi(static_cast<Eigen::Index>(a)) = grid.frequency(a, idx[a]);
    }
    if (nyq) continue;
    if (!band(k, xi)) continue;
    if (real) {
      for (std::size_t a = 0; a < grid.rank(); ++a) mk[a] = -k[a];
      if (!band(mk, -xi)) throw InvalidArgument("random_bandlimited: band is not symmetric");
    }
    selected.push_back(f);
  }
  if (selected.empty()) throw InvalidArgument("random_bandlimited: empty band");
  const double scale = 1.0 / std::sqrt(static_cast<double>(selected.size()));
  std::vector<cplx> s(grid.size() * channels);
  for (std::size_t f : selected) {
    grid.unravel(f, idx);
    for (std::size_t a = 0; a < grid.rank(); ++a) k[a] = grid.signed_index(a, idx[a]);
    for (std::size_t c = 0; c < channels; ++c) {
      cplx z;
      if (!real) {
        z = detail::gaussian_coefficient(seed, k, c);
      } else {
        for (std::size_t a = 0; a < grid.rank(); ++a) mk[a] = -k[a];
        if (k == mk) {
          z = detail::gaussian_coefficient(seed, k, c).real();
        } else if (std::lexicographical_compare(mk.begin(), mk.end(), k.begin(), k.end())) {
          z = detail::gaussian_coefficient(seed, k, c);
        } else {
          z = std::conj(detail::gaussian_coefficient(seed, mk, c));
        }
      }
      s[c * grid.size() + f] = z * scale;
    }
  }
  return GridFunction::from_spectrum(grid, channels, std::move(s));
}

// Samples of x -> f(A_t x) with t = 2^m, by re-indexing the spectrum. Needs a
// diagonal anisotropy whose dilation maps the support into the lattice.
inline GridFunction dilate_sample(const GridFunction& f, const DecomposedAnisotropy& va, int m) {
  const auto& grid = f.grid();
  if (va.dim() != grid.rank()) throw ShapeMismatch("dilate_sample: anisotropy dimension");
  const auto diag = va.diagonal();
  if (!diag) throw InvalidArgument("dilate_sample: anisotropy must be diagonal");
  if (m == 0) return f;
  std::vector<double> factor(grid.rank());
  for (std::size_t a = 0; a < grid.rank(); ++a) factor[a] = std::exp2((*diag)[a] * m);
  const auto& src = f.spectrum();
  std::vector<cplx> dst(src.size());
  std::vector<std::size_t> idx, out(grid.rank());
  for (std::size_t flat : f.spectral_support()) {
    grid.unravel(flat, idx);
    for (std::size_t a = 0; a < grid.rank(); ++a) {
      const double kk = static_cast<double>(grid.signed_index(a, idx[a])) * factor[a];
      const double r = std::round(kk);
      if (std::abs(kk - r) > 1e-9 * std::max(1.0, std::abs(kk)))
        throw InvalidArgument("dilate_sample: dilated frequency is off the lattice");
      const auto n = static_cast<double>(grid.dim(a));
      if (r <= -n / 2 || r >= n / 2) throw CoverageError("dilate_sample: band overflow");
      out[a] = grid.wrap(a, static_cast<long>(r));
    }
    const std::size_t to = grid.flat(out);
    for (std::size_t c = 0; c < f.channels(); ++c)
      dst[c * grid.size() + to] += src[c * grid.size() + flat];
  }
  return GridFunction::from_spectrum(grid, f.channels(), std::move(dst));
}

}  // namespace anisolab

#endif  // ANISOLAB_GRID_HPP_
