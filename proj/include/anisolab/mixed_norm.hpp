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

#ifndef ANISOLAB_MIXED_NORM_HPP_
#define ANISOLAB_MIXED_NORM_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anisolab/anisotropy.hpp"
#include "anisolab/error.hpp"
#include "anisolab/grid.hpp"

namespace anisolab {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Pairwise (cascade) summation; the result does not depend on thread count.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.subspan(0, h)) + pairwise_sum(v.subspan(h));
}

// Block sizes d_1..d_l of consecutive axes.
using Decomposition = std::vector<std::size_t>;

inline void check_decomposition(const TorusGrid& grid, const Decomposition& d) {
  if (d.empty()) throw ShapeMismatch("decomposition: no blocks");
  std::size_t total = 0;
  for (auto b : d) {
    if (b == 0) throw ShapeMismatch("decomposition: empty block");
    total += b;
  }
  if (total != grid.rank()) throw ShapeMismatch("decomposition does not match grid rank");
}

namespace detail {

struct BlockLayout {
  std::vector<std::size_t> first_axis;
  std::vector<std::size_t> points;  // lattice points per block
  std::vector<double> cell;         // cell volume per block
};

inline BlockLayout block_layout(const TorusGrid& grid, const Decomposition& d) {
  check_decomposition(grid, d);
  BlockLayout l;
  std::size_t a = 0;
  for (auto b : d) {
    l.first_axis.push_back(a);
    std::size_t n = 1;
    double c = 1.0;
    for (std::size_t k = 0; k < b; ++k, ++a) {
      n *= grid.dim(a);
      c *= grid.spacing(a);
    }
    l.points.push_back(n);
    l.cell.push_back(c);
  }
  return l;
}

}  // namespace detail

// Power weight w(x) = prod_j rho_{A_j}(x_j)^{gamma_j} on the centered
// fundamental domain. At x_j = 0 the block factor is taken at the midpoint
// of the origin cell. Stored as one factor table per block.
class WeightField {
 public:
  WeightField(const TorusGrid& grid, const DecomposedAnisotropy& va, std::vector<double> gamma)
      : grid_(grid), va_(va), gamma_(std::move(gamma)) {
    if (va.dim() != grid.rank()) throw ShapeMismatch("weight: anisotropy dimension != grid rank");
    if (gamma_.size() != va.blocks()) throw ShapeMismatch("weight: one exponent per block");
    const auto layout = detail::block_layout(grid, va.decomposition());
    factors_.resize(va.blocks());
    for (std::size_t j = 0; j < va.blocks(); ++j) {
      const std::size_t d = va.decomposition()[j];
      const std::size_t a0 = layout.first_axis[j];
      factors_[j].resize(layout.points[j]);
      Vector x(static_cast<Eigen::Index>(d));
      for (std::size_t i = 0; i < layout.points[j]; ++i) {
        std::size_t rem = i;
        bool origin = true;
        for (std::size_t k = d; k-- > 0;) {
          const std::size_t n = grid.dim(a0 + k);
          x(static_cast<Eigen::Index>(k)) = grid.centered_coordinate(a0 + k, rem % n);
          origin = origin && rem % n == 0;
          rem /= n;
        }
        if (origin)
          for (std::size_t k = 0; k < d; ++k)
            x(static_cast<Eigen::Index>(k)) = 0.5 * grid.spacing(a0 + k);
        factors_[j][i] = std::pow(va.block(j).quasi_norm(x), gamma_[j]);
      }
    }
  }

  const TorusGrid& grid() const { return grid_; }
  const DecomposedAnisotropy& anisotropy() const { return va_; }
  const std::vector<double>& exponents() const { return gamma_; }
  const std::vector<double>& block_factor(std::size_t j) const { return factors_.at(j); }

  // gamma_j in (-tr A_j, tr A_j (p_j / r_j - 1)), checked block by block.
  std::vector<bool> admissible(const std::vector<double>& p, const std::vector<double>& r) const {
    if (p.size() != gamma_.size() || r.size() != gamma_.size())
      throw ShapeMismatch("weight admissibility: exponent count");
    std::vector<bool> ok(gamma_.size());
    for (std::size_t j = 0; j < gamma_.size(); ++j) {
      const double tr = va_.block(j).trace();
      const double hi = std::isinf(p[j]) ? kInf : tr * (p[j] / r[j] - 1.0);
      ok[j] = gamma_[j] > -tr && gamma_[j] < hi;
    }
    return ok;
  }

  void require_admissible(const std::vector<double>& p, const std::vector<double>& r) const {
    const auto ok = admissible(p, r);
    for (std::size_t j = 0; j < ok.size(); ++j)
      if (!ok[j])
        throw ParameterWindow("weight exponent of block " + std::to_string(j) +
                              " outside the admissible power range");
  }

  Field values() const {
    const auto layout = detail::block_layout(grid_, va_.decomposition());
    std::vector<double> v(grid_.size(), 1.0);
    // Block 0 is the slowest-varying group of axes in row-major order.
    std::vector<std::size_t> inner(va_.blocks(), 1);
    for (std::size_t j = va_.blocks() - 1; j > 0; --j) inner[j - 1] = inner[j] * layout.points[j];
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < va_.blocks(); ++j)
        v[i] *= factors_[j][(i / inner[j]) % layout.points[j]];
    return Field(grid_, std::move(v));
  }

 private:
  TorusGrid grid_;
  DecomposedAnisotropy va_;
  std::vector<double> gamma_;
  std::vector<std::vector<double>> factors_;
};

// Iterated norm ||...||f w^{1/p_1}||_{L_{p_1}}...||_{L_{p_l}}, block 0 (the
// innermost) integrated first. Cell-midpoint Riemann sums.
inline double mixed_lp(const Field& f, const std::vector<double>& p, const Decomposition& d,
                       const WeightField* w = nullptr) {
  const auto layout = detail::block_layout(f.grid, d);
  if (p.size() != d.size()) throw ShapeMismatch("mixed_lp: one exponent per block");
  for (double pj : p)
    if (!(pj > 0.0)) throw InvalidArgument("mixed_lp: exponents must be positive");
  if (w) {
    if (!(w->grid() == f.grid) || w->anisotropy().decomposition() != d)
      throw ShapeMismatch("mixed_lp: weight does not match grid or decomposition");
    w->require_admissible(p, std::vector<double>(p.size(), 1.0));
  }
  std::vector<double> cur(f.values.begin(), f.values.end());
  for (auto& v : cur) v = std::abs(v);
  std::vector<double> buf;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const std::size_t n = layout.points[j];
    const std::size_t rest = cur.size() / n;
    std::vector<double> next(rest);
    buf.resize(n);
    const double pj = p[j];
    const std::vector<double>* wf = w ? &w->block_factor(j) : nullptr;
    for (std::size_t r = 0; r < rest; ++r) {
      if (std::isinf(pj)) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, cur[i * rest + r]);
        next[r] = m;
        continue;
      }
      for (std::size_t i = 0; i < n; ++i) {
        const double v = cur[i * rest + r];
        double t = pj == 1.0 ? v : pj == 2.0 ? v * v : std::pow(v, pj);
        if (wf) t *= (*wf)[i];
        buf[i] = t;
      }
      const double s = pairwise_sum(buf) * layout.cell[j];
      next[r] = pj == 1.0 ? s : pj == 2.0 ? std::sqrt(s) : std::pow(s, 1.0 / pj);
    }
    cur.swap(next);
  }
  return cur.front();
}

inline double mixed_lp(const GridFunction& f, const std::vector<double>& p,
                       const Decomposition& d, const WeightField* w = nullptr) {
  return mixed_lp(f.modulus(), p, d, w);
}

namespace detail {

inline void check_sequence(std::span<const Field> fs) {
  if (fs.empty()) throw InvalidArgument("sequence norm: empty sequence");
  for (const auto& f : fs)
    if (!(f.grid == fs.front().grid)) throw ShapeMismatch("sequence norm: members on different grids");
}

inline double lq(std::span<const double> v, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  std::vector<double> t(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = std::pow(std::abs(v[i]), q);
  return std::pow(pairwise_sum(t), 1.0 / q);
}

}  // namespace detail

// Pointwise l_q^s over the sequence, as a field.
inline Field pointwise_lq(std::span<const Field> fs, double s, double q) {
  detail::check_sequence(fs);
  if (!(q > 0.0)) throw InvalidArgument("sequence norm: q must be positive");
  const auto& g = fs.front().grid;
  std::vector<double> out(g.size());
  std::vector<double> col(fs.size());
  std::vector<double> w(fs.size());
  for (std::size_t n = 0; n < fs.size(); ++n) w[n] = std::exp2(static_cast<double>(n) * s);
  for (std::size_t i = 0; i < g.size(); ++i) {
    for (std::size_t n = 0; n < fs.size(); ++n) col[n] = w[n] * fs[n].values[i];
    out[i] = detail::lq(col, q);
  }
  return Field(g, std::move(out));
}

// ||(f_n)||_{L_p[l_q^s]}: pointwise l_q, then the mixed norm.
inline double seq_norm_F(std::span<const Field> fs, double s, const std::vector<double>& p,
                         double q, const Decomposition& d, const WeightField* w = nullptr) {
  return mixed_lp(pointwise_lq(fs, s, q), p, d, w);
}

// Per-member weighted mixed norms 2^{ns} ||f_n||_{L_p}.
inline std::vector<double> scaled_member_norms(std::span<const Field> fs, double s,
                                               const std::vector<double>& p,
                                               const Decomposition& d,
                                               const WeightField* w = nullptr) {
  detail::check_sequence(fs);
  std::vector<double> out(fs.size());
  for (std::size_t n = 0; n < fs.size(); ++n)
    out[n] = std::exp2(static_cast<double>(n) * s) * mixed_lp(fs[n], p, d, w);
  return out;
}

// ||(f_n)||_{l_q^s[L_p]}.
inline double seq_norm_B(std::span<const Field> fs, double s, const std::vector<double>& p,
                         double q, const Decomposition& d, const WeightField* w = nullptr) {
  if (!(q > 0.0)) throw InvalidArgument("sequence norm: q must be positive");
  return detail::lq(scaled_member_norms(fs, s, p, d, w), q);
}

// Pointwise l_r^s, then L_p over the first `inner_blocks` blocks, then L_q
// over the remaining (outer) blocks.
inline double seq_norm_scriptF(std::span<const Field> fs, double s,
                               const std::vector<double>& outer_q, double r,
                               const std::vector<double>& inner_p, const Decomposition& d,
                               const WeightField* w = nullptr) {
  if (inner_p.empty() || outer_q.empty() || inner_p.size() + outer_q.size() != d.size())
    throw ShapeMismatch("scriptF: inner/outer split does not match decomposition");
  std::vector<double> p = inner_p;
  p.insert(p.end(), outer_q.begin(), outer_q.end());
  return seq_norm_F(fs, s, p, r, d, w);
}

enum class SpaceKind { F, B, ScriptF, LqOfInner };

inline std::string to_string(SpaceKind k) {
  switch (k) {
    case SpaceKind::F:
      return "F";
    case SpaceKind::B:
      return "B";
    case SpaceKind::ScriptF:
      return "scriptF";
    case SpaceKind::LqOfInner:
      return "Lq_of_inner";
  }
  return "?";
}

inline SpaceKind space_kind_from_string(const std::string& s) {
  if (s == "F") return SpaceKind::F;
  if (s == "B") return SpaceKind::B;
  if (s == "scriptF") return SpaceKind::ScriptF;
  if (s == "Lq_of_inner") return SpaceKind::LqOfInner;
  throw InvalidArgument("unknown space kind: " + s);
}

// One quasi-norm of the catalogue.
//
// F, B: `anisotropy` covers the whole grid, `p` has one exponent per block
// and `q` is the microscopic exponent.
//
// ScriptF, LqOfInner: the grid splits into `inner_blocks` inner blocks and
// the remaining outer blocks (`decomposition`). `p` lists the inner L_p
// exponents then the outer L_q exponents, and `r` is the microscopic
// exponent. `anisotropy` is the one the bank uses: outer axes for ScriptF,
// inner axes for LqOfInner.
struct SpaceSpec {
  SpaceKind kind;
  DecomposedAnisotropy anisotropy;
  Decomposition decomposition;
  double s = 0.0;
  std::vector<double> p;
  double q = 2.0;
  double r = 2.0;
  std::size_t inner_blocks = 0;
  std::optional<std::vector<double>> weights;
  std::vector<double> weight_r;

  SpaceSpec(SpaceKind k, DecomposedAnisotropy va, double s_, std::vector<double> p_, double q_)
      : kind(k), anisotropy(std::move(va)), s(s_), p(std::move(p_)), q(q_), r(q_) {
    decomposition = anisotropy.decomposition();
  }

  static SpaceSpec F(const DecomposedAnisotropy& va, double s, std::vector<double> p, double q) {
    return SpaceSpec(SpaceKind::F, va, s, std::move(p), q);
  }
  static SpaceSpec B(const DecomposedAnisotropy& va, double s, std::vector<double> p, double q) {
    return SpaceSpec(SpaceKind::B, va, s, std::move(p), q);
  }
  // Outer-block bank anisotropy; inner decomposition given explicitly.
  static SpaceSpec ScriptF(const DecomposedAnisotropy& outer, const Decomposition& inner,
                           double sigma, std::vector<double> inner_p,
                           std::vector<double> outer_q, double r) {
    std::vector<double> p = std::move(inner_p);
    p.insert(p.end(), outer_q.begin(), outer_q.end());
    SpaceSpec sp(SpaceKind::ScriptF, outer, sigma, std::move(p), r);
    sp.decomposition = inner;
    sp.decomposition.insert(sp.decomposition.end(), outer.decomposition().begin(),
                            outer.decomposition().end());
    sp.inner_blocks = inner.size();
    sp.r = r;
    return sp;
  }
  static SpaceSpec LqOfInner(const DecomposedAnisotropy& inner, const Decomposition& outer,
                             double sigma, std::vector<double> inner_p,
                             std::vector<double> outer_q, double r) {
    std::vector<double> p = std::move(inner_p);
    p.insert(p.end(), outer_q.begin(), outer_q.end());
    SpaceSpec sp(SpaceKind::LqOfInner, inner, sigma, std::move(p), r);
    sp.decomposition = inner.decomposition();
    sp.decomposition.insert(sp.decomposition.end(), outer.begin(), outer.end());
    sp.inner_blocks = inner.blocks();
    sp.r = r;
    return sp;
  }

  SpaceSpec with_weights(std::vector<double> gamma, std::vector<double> rj = {}) const {
    SpaceSpec c = *this;
    c.weights = std::move(gamma);
    c.weight_r = rj.empty() ? std::vector<double>(c.weights->size(), 1.0) : std::move(rj);
    return c;
  }

  // Microscopic exponent used by the aggregation.
  double micro() const { return kind == SpaceKind::F || kind == SpaceKind::B ? q : r; }

  void validate() const {
    if (p.size() != decomposition.size())
      throw ShapeMismatch("space: one integrability exponent per block");
    for (double v : p)
      if (!(v > 0.0)) throw InvalidArgument("space: exponents must be positive");
    if (!(micro() > 0.0)) throw InvalidArgument("space: microscopic exponent must be positive");
    if (!std::isfinite(s)) throw InvalidArgument("space: smoothness must be finite");
    if (kind == SpaceKind::ScriptF || kind == SpaceKind::LqOfInner) {
      if (inner_blocks == 0 || inner_blocks >= decomposition.size())
        throw ShapeMismatch("space: inner/outer split must leave both sides nonempty");
      if (weights) throw InvalidArgument("space: weights are supported for F and B only");
    }
    if (weights && weights->size() != decomposition.size())
      throw ShapeMismatch("space: one weight exponent per block");
  }
};

}  // namespace anisolab

#endif  // ANISOLAB_MIXED_NORM_HPP_
