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

#ifndef ANISOLAB_FILTERBANK_HPP_
#define ANISOLAB_FILTERBANK_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "anisolab/anisotropy.hpp"
#include "anisolab/error.hpp"
#include "anisolab/grid.hpp"

namespace anisolab {

// C^1 smoothstep falling from 1 at u <= 0 to 0 at u >= 1.
inline double smooth_cutoff(double u) {
  if (u <= 0.0) return 1.0;
  if (u >= 1.0) return 0.0;
  return 1.0 - u * u * (3.0 - 2.0 * u);
}

// min over the bank axes of rho_vecA at the Nyquist frequency of that axis.
inline double nyquist_radius(const TorusGrid& grid, const DecomposedAnisotropy& va,
                             std::size_t first = 0) {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < va.dim(); ++a) {
    Vector xi = Vector::Zero(static_cast<Eigen::Index>(va.dim()));
    xi(static_cast<Eigen::Index>(a)) = grid.nyquist_frequency(first + a);
    r = std::min(r, va.vector_quasi_norm(xi));
  }
  return r;
}

// Littlewood-Paley multipliers phi_0..phi_{n_max} on the lattice, acting on
// the axes [first_axis, first_axis + VA.dim()).
class FilterBank {
 public:
  FilterBank(const TorusGrid& grid, const DecomposedAnisotropy& va, double gamma = 1.0,
             double delta = 2.0, std::size_t first_axis = 0)
      : grid_(grid), va_(va), gamma_(gamma), delta_(delta), first_(first_axis) {
    if (!(gamma > 0.0) || !(delta > gamma))
      throw InvalidArgument("filter bank: need 0 < gamma < delta");
    if (first_axis + va.dim() > grid.rank())
      throw ShapeMismatch("filter bank: anisotropy does not fit the grid axes");
    nyquist_ = nyquist_radius(grid, va, first_axis);
    if (delta >= nyquist_) throw InvalidArgument("filter bank: delta above the Nyquist radius");
    int n = 0;
    while (delta * std::exp2(n + 1) <= nyquist_) ++n;
    n_max_ = static_cast<std::size_t>(n);
    rho_ = frequency_quasi_norm_field(grid, va, first_axis).values;
    // Phi_0(A_{2^-n} xi) = theta((2^-n rho(xi) - gamma) / (delta - gamma)).
    std::vector<std::vector<double>> low(n_max_ + 1, std::vector<double>(grid.size()));
    for (std::size_t k = 0; k <= n_max_; ++k) {
      const double sc = std::exp2(-static_cast<double>(k));
      for (std::size_t i = 0; i < grid.size(); ++i)
        low[k][i] = smooth_cutoff((sc * rho_[i] - gamma) / (delta - gamma));
    }
    multipliers_.resize(n_max_ + 1);
    multipliers_[0] = low[0];
    for (std::size_t k = 1; k <= n_max_; ++k) {
      multipliers_[k].resize(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i)
        multipliers_[k][i] = low[k][i] - low[k - 1][i];
    }
  }

  const TorusGrid& grid() const { return grid_; }
  const DecomposedAnisotropy& anisotropy() const { return va_; }
  double gamma() const { return gamma_; }
  double delta() const { return delta_; }
  std::size_t n_max() const { return n_max_; }
  std::size_t first_axis() const { return first_; }
  std::size_t axis_count() const { return va_.dim(); }
  double nyquist() const { return nyquist_; }
  // Telescoping zone: sum of all multipliers is 1 where rho <= gamma 2^n_max.
  double covered_radius() const { return gamma_ * std::exp2(static_cast<double>(n_max_)); }
  const std::vector<double>& rho() const { return rho_; }

  const std::vector<double>& multiplier(std::size_t n) const {
    if (n > n_max_) throw InvalidArgument("filter bank: scale out of range");
    return multipliers_[n];
  }

  std::string id() const {
    std::ostringstream os;
    os.precision(17);
    os << "lp(gamma=" << gamma_ << ",delta=" << delta_ << ",A=" << va_.describe() << ",axes="
       << first_ << ".." << first_ + va_.dim() - 1 << ",grid=" << grid_.describe()
       << ",n_max=" << n_max_ << ")";
    return os.str();
  }

  // Largest rho over the spectral support of f (0 for the zero function).
  double support_radius(const GridFunction& f) const {
    check_grid(f);
    double m = 0.0;
    for (std::size_t i : f.spectral_support()) m = std::max(m, rho_[i]);
    return m;
  }

  bool covers(const GridFunction& f) const {
    return support_radius(f) <= covered_radius() * (1.0 + 1e-12);
  }

  void require_coverage(const GridFunction& f) const {
    if (!covers(f))
      throw CoverageError("spectrum reaches rho = " + std::to_string(support_radius(f)) +
                          " beyond the covered radius " + std::to_string(covered_radius()));
  }

  GridFunction apply(std::size_t n, const GridFunction& f) const {
    check_grid(f);
    return f.multiply_spectrum(multiplier(n));
  }

  // S_0 f, ..., S_{n_max} f after the coverage check.
  std::vector<GridFunction> decompose(const GridFunction& f) const {
    require_coverage(f);
    std::vector<GridFunction> out;
    out.reserve(n_max_ + 1);
    for (std::size_t n = 0; n <= n_max_; ++n) out.push_back(apply(n, f));
    return out;
  }

  // Range of sum_n phi_n^2 over lattice points of the covered band.
  std::pair<double, double> square_sum_bounds() const {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (rho_[i] > covered_radius()) continue;
      double s = 0.0;
      for (const auto& m : multipliers_) s += m[i] * m[i];
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    return {lo, hi};
  }

 private:
  void check_grid(const GridFunction& f) const {
    if (!(f.grid() == grid_)) throw ShapeMismatch("filter bank: function on a different grid");
  }

  TorusGrid grid_;
  DecomposedAnisotropy va_;
  double gamma_, delta_;
  std::size_t first_;
  double nyquist_ = 0.0;
  std::size_t n_max_ = 0;
  std::vector<double> rho_;
  std::vector<std::vector<double>> multipliers_;
};

inline FilterBank build_bank(const TorusGrid& grid, const DecomposedAnisotropy& va,
                             double gamma = 1.0, double delta = 2.0, std::size_t first_axis = 0) {
  return FilterBank(grid, va, gamma, delta, first_axis);
}

inline GridFunction reconstruct(const FilterBank& bank, const std::vector<GridFunction>& pieces) {
  if (pieces.size() != bank.n_max() + 1) throw ShapeMismatch("reconstruct: need n_max + 1 pieces");
  GridFunction sum = pieces.front();
  for (std::size_t n = 1; n < pieces.size(); ++n) sum = sum.plus(pieces[n]);
  return sum;
}

}  // namespace anisolab

#endif  // ANISOLAB_FILTERBANK_HPP_
