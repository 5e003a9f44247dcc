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

#ifndef ANISOLAB_SMOOTHNESS_HPP_
#define ANISOLAB_SMOOTHNESS_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "anisolab/anisotropy.hpp"
#include "anisolab/error.hpp"
#include "anisolab/fft.hpp"
#include "anisolab/grid.hpp"
#include "anisolab/mixed_norm.hpp"
#include "anisolab/spaces.hpp"

namespace anisolab {

// Which h-ball a difference average runs over.
//   Product:   |h_j| <= 2^{-n a_j} per block, a_j = tr(A_j) / d_j.
//   QuasiNorm: rho_{A_j}(h_j) <= 2^{-n} per block.
enum class BallShape { Product, QuasiNorm };

// How the h-average is discretized.
//   Lattice: every lattice vector in the ball, exact index shifts.
//   Scaled:  a fixed midpoint rule on the unit ball mapped onto the ball at
//            each scale; shifts are applied spectrally, exact for
//            band-limited samples.
enum class HQuadrature { Lattice, Scaled };

struct DifferenceProfile {
  int M = 2;
  BallShape shape = BallShape::Product;
  std::vector<double> phi;  // per block; empty means all ones
  HQuadrature quadrature = HQuadrature::Scaled;
  int nodes_per_axis = 8;
  int extra_scales = 4;
};

inline double unit_ball_volume(std::size_t d) {
  const double h = 0.5 * static_cast<double>(d);
  return std::pow(std::numbers::pi, h) / std::tgamma(h + 1.0);
}

inline std::vector<double> binomial_row(int m) {
  std::vector<double> c(static_cast<std::size_t>(m) + 1, 1.0);
  for (int j = 1; j < m; ++j)
    for (int i = j; i > 0; --i) c[static_cast<std::size_t>(i)] += c[static_cast<std::size_t>(i) - 1];
  return c;
}

// sum_j (-1)^j C(M, j) f(x + (M - j) h) with h a lattice vector.
inline GridFunction difference(const GridFunction& f, const std::vector<long>& shift, int m) {
  const auto& g = f.grid();
  if (shift.size() != g.rank()) throw ShapeMismatch("difference: shift rank");
  if (m < 1) throw InvalidArgument("difference: order must be >= 1");
  const auto c = binomial_row(m);
  std::vector<cplx> out(f.samples().size());
  std::vector<std::size_t> idx, moved(g.rank());
  for (int j = 0; j <= m; ++j) {
    const double coef = (j % 2 ? -1.0 : 1.0) * c[static_cast<std::size_t>(j)];
    const long k = m - j;
    for (std::size_t x = 0; x < g.size(); ++x) {
      g.unravel(x, idx);
      for (std::size_t a = 0; a < g.rank(); ++a)
        moved[a] = g.wrap(a, static_cast<long>(idx[a]) + k * shift[a]);
      const std::size_t y = g.flat(moved);
      for (std::size_t ch = 0; ch < f.channels(); ++ch)
        out[ch * g.size() + x] += coef * f.samples()[ch * g.size() + y];
    }
  }
  return GridFunction::from_samples(g, f.channels(), std::move(out));
}

// Spectral symbol of Delta^M_h: (e^{i xi.h} - 1)^M, for any real h.
inline std::vector<cplx> difference_symbol(const TorusGrid& g, const Vector& h, int m) {
  std::vector<std::vector<cplx>> phase(g.rank());
  for (std::size_t a = 0; a < g.rank(); ++a) {
    phase[a].resize(g.dim(a));
    for (std::size_t i = 0; i < g.dim(a); ++i)
      phase[a][i] = std::polar(1.0, g.frequency(a, i) * h(static_cast<Eigen::Index>(a)));
  }
  std::vector<cplx> sym(g.size());
  for (std::size_t x = 0; x < g.size(); ++x) {
    cplx e = 1.0;
    for (std::size_t a = 0; a < g.rank(); ++a) e *= phase[a][(x / g.stride(a)) % g.dim(a)];
    const cplx b = e - 1.0;
    cplx p = b;
    for (int k = 1; k < m; ++k) p *= b;
    sym[x] = p;
  }
  return sym;
}

inline GridFunction difference(const GridFunction& f, const Vector& h, int m) {
  if (static_cast<std::size_t>(h.size()) != f.grid().rank())
    throw ShapeMismatch("difference: h dimension");
  if (m < 1) throw InvalidArgument("difference: order must be >= 1");
  return f.multiply_spectrum(difference_symbol(f.grid(), h, m));
}

namespace detail {

// Quadrature nodes for one block of the h-ball. For lattice nodes, offsets
// are merged modulo the period and counted with multiplicity.
struct BlockNodes {
  std::vector<Vector> h;              // physical block vectors
  std::vector<std::vector<long>> shift;  // lattice offsets (lattice mode)
  std::vector<double> weight;
  std::size_t raw_count = 0;
  bool resolved = true;
};

inline double block_rate(const Anisotropy& a) { return a.trace() / static_cast<double>(a.dim()); }

inline BlockNodes scaled_nodes(const Anisotropy& a, BallShape shape, int n, int k) {
  const std::size_t d = a.dim();
  BlockNodes out;
  std::vector<int> it(d, 0);
  const Matrix map = shape == BallShape::Product
                         ? Matrix(Matrix::Identity(static_cast<Eigen::Index>(d),
                                                   static_cast<Eigen::Index>(d)) *
                                  std::exp2(-n * block_rate(a)))
                         : a.power(std::exp2(-n));
  for (;;) {
    Vector u(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
      u(static_cast<Eigen::Index>(i)) = -1.0 + (2.0 * it[i] + 1.0) / k;
    if (u.norm() <= 1.0) {
      out.h.push_back(map * u);
      out.weight.push_back(1.0);
    }
    std::size_t i = 0;
    while (i < d && ++it[i] == k) it[i++] = 0;
    if (i == d) break;
  }
  out.raw_count = out.h.size();
  return out;
}

inline BlockNodes lattice_nodes(const TorusGrid& g, std::size_t first, const Anisotropy& a,
                                BallShape shape, int n) {
  const std::size_t d = a.dim();
  const double radius = shape == BallShape::Product ? std::exp2(-n * block_rate(a)) : std::exp2(-n);
  const double reach = shape == BallShape::Product
                           ? radius
                           : a.power(std::exp2(-n)).jacobiSvd().singularValues()(0);
  std::vector<long> lim(d);
  for (std::size_t i = 0; i < d; ++i)
    lim[i] = static_cast<long>(std::floor(reach / g.spacing(first + i)));
  std::map<std::vector<long>, std::size_t> merged;
  BlockNodes out;
  std::vector<long> it(d);
  for (std::size_t i = 0; i < d; ++i) it[i] = -lim[i];
  Vector h(static_cast<Eigen::Index>(d));
  for (;;) {
    for (std::size_t i = 0; i < d; ++i)
      h(static_cast<Eigen::Index>(i)) = static_cast<double>(it[i]) * g.spacing(first + i);
    const bool inside =
        shape == BallShape::Product ? h.norm() <= radius : a.quasi_norm(h) <= radius;
    if (inside) {
      ++out.raw_count;
      std::vector<long> res(d);
      for (std::size_t i = 0; i < d; ++i)
        res[i] = g.signed_index(first + i, g.wrap(first + i, it[i]));
      auto [pos, fresh] = merged.emplace(res, out.shift.size());
      if (fresh) {
        Vector hr(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i)
          hr(static_cast<Eigen::Index>(i)) = static_cast<double>(res[i]) * g.spacing(first + i);
        out.h.push_back(hr);
        out.shift.push_back(res);
        out.weight.push_back(1.0);
      } else {
        out.weight[pos->second] += 1.0;
      }
    }
    std::size_t i = 0;
    while (i < d && ++it[i] > lim[i]) it[i] = -lim[i], ++i;
    if (i == d) break;
  }
  out.resolved = static_cast<double>(out.raw_count) >= std::pow(3.0, static_cast<double>(d));
  return out;
}

inline std::vector<BlockNodes> ball_nodes(const TorusGrid& g, const DecomposedAnisotropy& va,
                                          BallShape shape, HQuadrature quad, int n, int k) {
  std::vector<BlockNodes> nodes;
  for (std::size_t j = 0; j < va.blocks(); ++j)
    nodes.push_back(quad == HQuadrature::Scaled ? scaled_nodes(va.block(j), shape, n, k)
                                                : lattice_nodes(g, va.offset(j), va.block(j),
                                                                shape, n));
  return nodes;
}

// |Delta^M_h f| for h assembled from one node per block.
class DifferenceEvaluator {
 public:
  DifferenceEvaluator(const GridFunction& f, const DecomposedAnisotropy& va, int m,
                      HQuadrature quad)
      : f_(f), va_(va), m_(m), quad_(quad) {}

  void eval(const std::vector<const BlockNodes*>& blocks, const std::vector<std::size_t>& pick,
            std::vector<double>& out) {
    const auto& g = f_.grid();
    out.assign(g.size(), 0.0);
    if (quad_ == HQuadrature::Lattice) {
      std::vector<long> shift;
      for (std::size_t j = 0; j < blocks.size(); ++j) {
        const auto& s = blocks[j]->shift[pick[j]];
        shift.insert(shift.end(), s.begin(), s.end());
      }
      const auto d = difference(f_, shift, m_);
      accumulate_modulus(d.samples(), out);
      return;
    }
    Vector h(static_cast<Eigen::Index>(g.rank()));
    for (std::size_t j = 0; j < blocks.size(); ++j)
      h.segment(static_cast<Eigen::Index>(va_.offset(j)),
                static_cast<Eigen::Index>(va_.block(j).dim())) = blocks[j]->h[pick[j]];
    const auto sym = difference_symbol(g, h, m_);
    const auto& spec = f_.spectrum();
    buf_.resize(spec.size());
    for (std::size_t c = 0; c < f_.channels(); ++c)
      for (std::size_t i = 0; i < g.size(); ++i)
        buf_[c * g.size() + i] = spec[c * g.size() + i] * sym[i];
    for (std::size_t c = 0; c < f_.channels(); ++c) fft_inverse(g.dims(), buf_.data() + c * g.size());
    accumulate_modulus(buf_, out);
  }

 private:
  void accumulate_modulus(const std::vector<cplx>& s, std::vector<double>& out) const {
    const std::size_t n = f_.grid().size();
    if (f_.channels() == 1) {
      for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(s[i]);
      return;
    }
    for (std::size_t c = 0; c < f_.channels(); ++c)
      for (std::size_t i = 0; i < n; ++i) out[i] += std::norm(s[c * n + i]);
    for (auto& v : out) v = std::sqrt(v);
  }

  const GridFunction& f_;
  const DecomposedAnisotropy& va_;
  int m_;
  HQuadrature quad_;
  std::vector<cplx> buf_;
};

// Mixed L_phi mean over h, innermost block first:
//   G_0 = mean_{h_0} |D|^{phi_0},  G_j = mean_{h_j} G_{j-1}^{phi_j / phi_{j-1}},
// and the result is G_{l-1}^{1 / phi_{l-1}}.
inline std::vector<double> mixed_h_mean(const std::vector<BlockNodes>& nodes,
                                        const std::vector<double>& phi,
                                        DifferenceEvaluator& ev, std::size_t npoints) {
  const std::size_t l = nodes.size();
  std::vector<const BlockNodes*> ptr;
  for (const auto& b : nodes) ptr.push_back(&b);
  std::vector<std::size_t> pick(l, 0);
  std::vector<double> scratch;
  std::function<std::vector<double>(std::size_t)> level = [&](std::size_t j) {
    std::vector<double> acc(npoints, 0.0);
    double wsum = 0.0;
    for (std::size_t i = 0; i < nodes[j].h.size(); ++i) {
      pick[j] = i;
      const double w = nodes[j].weight[i];
      wsum += w;
      if (j == 0) {
        ev.eval(ptr, pick, scratch);
        const double e = phi[0];
        for (std::size_t x = 0; x < npoints; ++x)
          acc[x] += w * (e == 1.0 ? scratch[x] : std::pow(scratch[x], e));
      } else {
        const auto inner = level(j - 1);
        const double e = phi[j] / phi[j - 1];
        for (std::size_t x = 0; x < npoints; ++x)
          acc[x] += w * (e == 1.0 ? inner[x] : std::pow(inner[x], e));
      }
    }
    for (auto& v : acc) v /= wsum;
    return acc;
  };
  auto top = level(l - 1);
  const double e = 1.0 / phi[l - 1];
  if (e != 1.0)
    for (auto& v : top) v = std::pow(v, e);
  return top;
}

inline std::vector<double> resolve_phi(const DifferenceProfile& p, std::size_t blocks) {
  std::vector<double> phi = p.phi.empty() ? std::vector<double>(blocks, 1.0) : p.phi;
  if (phi.size() != blocks) throw ShapeMismatch("difference profile: one phi per block");
  for (double v : phi)
    if (!(v >= 1.0) || std::isinf(v)) throw InvalidArgument("difference profile: phi in [1, inf)");
  return phi;
}

}  // namespace detail

struct DifferenceField {
  Field values;
  bool resolved = true;
  std::size_t nodes = 0;
};

// d_n(f)(x): normalized mixed L_phi average of |Delta^M_h f(x)| over the
// h-ball at scale n. The normalization 2^{n sum tr_j / phi_j} times the ball
// measure leaves the factor prod_j omega_{d_j}^{1/phi_j} in front of the
// mean.
inline DifferenceField difference_field(const GridFunction& f, const DecomposedAnisotropy& va,
                                        const DifferenceProfile& profile, int n) {
  if (va.dim() != f.grid().rank()) throw ShapeMismatch("difference_field: anisotropy dimension");
  if (profile.M < 1) throw InvalidArgument("difference_field: order must be >= 1");
  if (profile.nodes_per_axis < 1) throw InvalidArgument("difference_field: nodes per axis");
  const auto phi = detail::resolve_phi(profile, va.blocks());
  const auto nodes = detail::ball_nodes(f.grid(), va, profile.shape, profile.quadrature, n,
                                        profile.nodes_per_axis);
  DifferenceField out;
  out.nodes = 1;
  for (const auto& b : nodes) {
    out.resolved = out.resolved && b.resolved;
    out.nodes *= b.raw_count;
  }
  detail::DifferenceEvaluator ev(f, va, profile.M, profile.quadrature);
  auto mean = detail::mixed_h_mean(nodes, phi, ev, f.grid().size());
  double norm = 1.0;
  for (std::size_t j = 0; j < va.blocks(); ++j)
    norm *= std::pow(unit_ball_volume(va.block(j).dim()), 1.0 / phi[j]);
  for (auto& v : mean) v *= norm;
  out.values = Field(f.grid(), std::move(mean));
  return out;
}

// 2^{n tr} times the integral of Delta^M_z f over the quasi-norm ball
// B(0, 2^{-n}): prod_j omega_{d_j} times the signed mean over the nodes.
inline GridFunction averaged_difference(const GridFunction& f, const DecomposedAnisotropy& va,
                                        int m, int n,
                                        HQuadrature quad = HQuadrature::Scaled,
                                        int nodes_per_axis = 8) {
  if (va.dim() != f.grid().rank())
    throw ShapeMismatch("averaged_difference: anisotropy dimension");
  const auto& g = f.grid();
  const auto nodes = detail::ball_nodes(g, va, BallShape::QuasiNorm, quad, n, nodes_per_axis);
  for (const auto& b : nodes)
    if (!b.resolved) throw InvalidArgument("averaged_difference: ball not resolved by the lattice");
  std::vector<cplx> mult(g.size(), 0.0);
  double wsum = 0.0;
  std::vector<std::size_t> pick(nodes.size(), 0);
  Vector h(static_cast<Eigen::Index>(g.rank()));
  for (;;) {
    double w = 1.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      w *= nodes[j].weight[pick[j]];
      h.segment(static_cast<Eigen::Index>(va.offset(j)),
                static_cast<Eigen::Index>(va.block(j).dim())) = nodes[j].h[pick[j]];
    }
    const auto sym = difference_symbol(g, h, m);
    for (std::size_t i = 0; i < g.size(); ++i) mult[i] += w * sym[i];
    wsum += w;
    std::size_t j = 0;
    while (j < nodes.size() && ++pick[j] == nodes[j].h.size()) pick[j++] = 0;
    if (j == nodes.size()) break;
  }
  double omega = 1.0;
  for (std::size_t j = 0; j < va.blocks(); ++j) omega *= unit_ball_volume(va.block(j).dim());
  for (auto& v : mult) v *= omega / wsum;
  return f.multiply_spectrum(mult);
}

// Parameter window of the difference characterization:
// p_j in (1, inf), q in [1, inf], s > 0, phi_j in [1, inf),
// s > sum_j tr(A_j)(1 - 1/phi_j) and M min_j tr(A_j) > s.
inline void check_difference_window(const SpaceSpec& spec, const DifferenceProfile& profile) {
  const auto& va = spec.anisotropy;
  const auto phi = detail::resolve_phi(profile, va.blocks());
  for (double p : spec.p)
    if (!(p > 1.0) || std::isinf(p)) throw ParameterWindow("difference norm: need p_j in (1, inf)");
  if (!(spec.q >= 1.0)) throw ParameterWindow("difference norm: need q >= 1");
  if (!(spec.s > 0.0)) throw ParameterWindow("difference norm: need s > 0");
  double lower = 0.0, tmin = kInf;
  for (std::size_t j = 0; j < va.blocks(); ++j) {
    lower += va.block(j).trace() * (1.0 - 1.0 / phi[j]);
    tmin = std::min(tmin, va.block(j).trace());
  }
  if (!(spec.s > lower)) throw ParameterWindow("difference norm: s below the phi threshold");
  if (!(profile.M * tmin > spec.s)) throw ParameterWindow("difference norm: order M too small");
}

// ||f||_{L_p} + ||(2^{ns} d_n(f))_{n>=1}||_{L_p[l_q]} over n = 1..n_top with
// n_top = ceil(log2 max(1, rho_max(f))) + extra_scales, rho_max taken over
// the spectral support, so the scale range follows the function, not the
// grid.
inline NormValue difference_norm(const GridFunction& f, const SpaceSpec& spec,
                                 const DifferenceProfile& profile) {
  if (spec.kind != SpaceKind::F) throw InvalidArgument("difference_norm: spec kind must be F");
  spec.validate();
  check_difference_window(spec, profile);
  const auto& va = spec.anisotropy;
  if (va.dim() != f.grid().rank()) throw ShapeMismatch("difference_norm: anisotropy dimension");
  std::optional<WeightField> w;
  if (spec.weights) {
    w.emplace(f.grid(), va, *spec.weights);
    w->require_admissible(spec.p, spec.weight_r);
  }
  const WeightField* wp = w ? &*w : nullptr;
  const Field mod = f.modulus();
  const double base = mixed_lp(mod, spec.p, spec.decomposition, wp);

  double rho_max = 0.0;
  {
    const auto rho = frequency_quasi_norm_field(f.grid(), va).values;
    for (std::size_t i : f.spectral_support()) rho_max = std::max(rho_max, rho[i]);
  }
  const int n_top =
      static_cast<int>(std::ceil(std::log2(std::max(1.0, rho_max)))) + profile.extra_scales;

  NormValue out{spec, 0.0, {base}, "difference", {}};
  std::vector<Field> terms;
  std::vector<double> factors;
  for (int n = 1; n <= n_top; ++n) {
    auto d = difference_field(f, va, profile, n);
    if (!d.resolved) {
      out.excluded_scales.push_back(n);
      continue;
    }
    const double fac = std::exp2(n * spec.s);
    out.pieces.push_back(fac * mixed_lp(d.values, spec.p, spec.decomposition, wp));
    for (auto& v : d.values.values) v *= fac;
    terms.push_back(std::move(d.values));
  }
  double tail = 0.0;
  if (!terms.empty()) tail = mixed_lp(pointwise_lq(terms, 0.0, spec.q), spec.p, spec.decomposition, wp);
  out.value = base + tail;
  return out;
}

// Iterated maximal operator. Block j replaces g by
//   sup_delta ( mean over lattice y in B^{A_j}(0, delta) of |g(x + y)|^{r_j} )^{1/r_j}
// with delta in {delta_top 2^{-k}} (delta_top the smallest power of two whose
// ball covers the block lattice) plus the one-point ball {0}. Blocks are
// applied in order 0, 1, ...
namespace detail {

struct BlockOffsets {
  std::size_t first_axis = 0;
  std::size_t dims = 0;
  std::vector<std::vector<long>> shift;  // sorted by rho
  std::vector<double> rho;
};

inline BlockOffsets block_offsets(const TorusGrid& g, std::size_t first, const Anisotropy& a) {
  const std::size_t d = a.dim();
  BlockOffsets o;
  o.first_axis = first;
  o.dims = d;
  std::size_t count = 1;
  for (std::size_t i = 0; i < d; ++i) count *= g.dim(first + i);
  std::vector<std::pair<double, std::vector<long>>> all;
  all.reserve(count);
  Vector y(static_cast<Eigen::Index>(d));
  for (std::size_t b = 0; b < count; ++b) {
    std::vector<long> s(d);
    std::size_t rem = b;
    for (std::size_t i = d; i-- > 0;) {
      const std::size_t n = g.dim(first + i);
      s[i] = g.signed_index(first + i, rem % n);
      y(static_cast<Eigen::Index>(i)) = static_cast<double>(s[i]) * g.spacing(first + i);
      rem /= n;
    }
    all.emplace_back(a.quasi_norm(y), std::move(s));
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& l, const auto& r) { return l.first < r.first; });
  for (auto& [r, s] : all) {
    o.rho.push_back(r);
    o.shift.push_back(std::move(s));
  }
  return o;
}

// Storage index of x shifted by s on the block axes.
inline std::size_t shifted(const TorusGrid& g, std::size_t x, const BlockOffsets& o,
                           const std::vector<long>& s) {
  std::size_t y = x;
  for (std::size_t i = 0; i < o.dims; ++i) {
    const std::size_t a = o.first_axis + i;
    const std::size_t cur = (x / g.stride(a)) % g.dim(a);
    const std::size_t nxt = g.wrap(a, static_cast<long>(cur) + s[i]);
    y = y - cur * g.stride(a) + nxt * g.stride(a);
  }
  return y;
}

}  // namespace detail

inline Field maximal(const Field& f, const DecomposedAnisotropy& va, const std::vector<double>& r) {
  const auto& g = f.grid;
  if (va.dim() != g.rank()) throw ShapeMismatch("maximal: anisotropy dimension");
  if (r.size() != va.blocks()) throw ShapeMismatch("maximal: one r per block");
  for (double v : r)
    if (!(v > 0.0)) throw InvalidArgument("maximal: r must be positive");
  std::vector<double> cur(f.values);
  for (auto& v : cur) v = std::abs(v);
  for (std::size_t j = 0; j < va.blocks(); ++j) {
    const auto off = detail::block_offsets(g, va.offset(j), va.block(j));
    double top = 1.0;
    const double rmax = off.rho.back();
    while (top < rmax) top *= 2.0;
    while (top / 2.0 >= rmax) top /= 2.0;
    // Ends of each dyadic ball in the sorted offset list, largest first.
    std::vector<std::size_t> ends;
    const double rmin_pos = off.rho.size() > 1 ? off.rho[1] : 0.0;
    for (double delta = top; delta >= rmin_pos && rmin_pos > 0.0; delta /= 2.0)
      ends.push_back(static_cast<std::size_t>(
          std::upper_bound(off.rho.begin(), off.rho.end(), delta) - off.rho.begin()));
    ends.push_back(1);  // {0}
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    const double rj = r[j];
    std::vector<double> next(g.size());
    std::vector<double> powv(g.size());
    for (std::size_t x = 0; x < g.size(); ++x)
      powv[x] = rj == 1.0 ? cur[x] : std::pow(cur[x], rj);
    for (std::size_t x = 0; x < g.size(); ++x) {
      double acc = 0.0, best = 0.0;
      std::size_t k = 0;
      for (std::size_t e : ends) {
        for (; k < e; ++k) acc += powv[detail::shifted(g, x, off, off.shift[k])];
        const double mean = acc / static_cast<double>(e);
        best = std::max(best, mean);
      }
      next[x] = rj == 1.0 ? best : std::pow(best, 1.0 / rj);
    }
    cur.swap(next);
  }
  return Field(g, std::move(cur));
}

inline Field maximal(const GridFunction& f, const DecomposedAnisotropy& va,
                     const std::vector<double>& r) {
  return maximal(f.modulus(), va, r);
}

// f*(x) = sup_z |f(x + z)| / prod_j (1 + R_j rho_j(z_j))^{tr(A_j) / r_j}
// over all lattice z. The weight factorizes over blocks, so the supremum is
// taken block by block.
inline Field peetre_maximal(const GridFunction& f, const DecomposedAnisotropy& va,
                            const std::vector<double>& r, const std::vector<double>& radius) {
  const auto& g = f.grid();
  if (va.dim() != g.rank()) throw ShapeMismatch("peetre_maximal: anisotropy dimension");
  if (r.size() != va.blocks() || radius.size() != va.blocks())
    throw ShapeMismatch("peetre_maximal: one r and one R per block");
  for (std::size_t j = 0; j < va.blocks(); ++j)
    if (!(r[j] > 0.0) || !(radius[j] > 0.0))
      throw InvalidArgument("peetre_maximal: r and R must be positive");
  // Band precondition: every block frequency inside B^{A_j}(0, R_j).
  {
    Vector xi;
    for (std::size_t i : f.spectral_support()) {
      frequency_vector(g, i, 0, g.rank(), xi);
      const auto rho = va.block_quasi_norms(xi);
      for (std::size_t j = 0; j < va.blocks(); ++j)
        if (rho[j] > radius[j] * (1.0 + 1e-12))
          throw CoverageError("peetre_maximal: spectrum outside the band B(0, R)");
    }
  }
  std::vector<double> cur = f.modulus().values;
  for (std::size_t j = 0; j < va.blocks(); ++j) {
    const auto off = detail::block_offsets(g, va.offset(j), va.block(j));
    const double expo = va.block(j).trace() / r[j];
    std::vector<double> weight(off.rho.size());
    for (std::size_t k = 0; k < off.rho.size(); ++k)
      weight[k] = std::pow(1.0 + radius[j] * off.rho[k], -expo);
    std::vector<double> next(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) {
      double best = 0.0;
      for (std::size_t k = 0; k < off.rho.size(); ++k)
        best = std::max(best, cur[detail::shifted(g, x, off, off.shift[k])] * weight[k]);
      next[x] = best;
    }
    cur.swap(next);
  }
  return Field(g, std::move(cur));
}

// Q = A_{2^{-n}}([0,1)^d(b) + k) with [0,1)^d(b) = [(1-b)/2, (1+b)/2)^d.
struct DyadicCube {
  int n = 0;
  std::vector<long> k;
  double b = 1.0;
};

namespace detail {

// Lattice points of the cube as unwrapped signed indices.
inline std::vector<std::vector<long>> cube_points(const TorusGrid& g, const Anisotropy& a,
                                                  const DyadicCube& q) {
  const std::size_t d = g.rank();
  if (a.dim() != d || q.k.size() != d) throw ShapeMismatch("cube: dimension mismatch");
  if (!(q.b > 0.0)) throw InvalidArgument("cube: widening must be positive");
  const Matrix down = a.power(std::exp2(-q.n));
  const Matrix up = a.power(std::exp2(q.n));
  const double lo = (1.0 - q.b) / 2.0, hi = (1.0 + q.b) / 2.0;
  // Bounding box from the corners.
  Vector bmin = Vector::Constant(static_cast<Eigen::Index>(d), kInf);
  Vector bmax = Vector::Constant(static_cast<Eigen::Index>(d), -kInf);
  for (std::size_t c = 0; c < (std::size_t{1} << d); ++c) {
    Vector u(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i)
      u(static_cast<Eigen::Index>(i)) = static_cast<double>(q.k[i]) + ((c >> i) & 1 ? hi : lo);
    const Vector x = down * u;
    bmin = bmin.cwiseMin(x);
    bmax = bmax.cwiseMax(x);
  }
  std::vector<long> lo_i(d), hi_i(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double h = g.spacing(i);
    if (bmax(static_cast<Eigen::Index>(i)) - bmin(static_cast<Eigen::Index>(i)) >= g.period(i))
      throw InvalidArgument("cube: wider than the torus period");
    lo_i[i] = static_cast<long>(std::floor(bmin(static_cast<Eigen::Index>(i)) / h)) - 1;
    hi_i[i] = static_cast<long>(std::ceil(bmax(static_cast<Eigen::Index>(i)) / h)) + 1;
  }
  std::vector<std::vector<long>> pts;
  std::vector<long> it = lo_i;
  Vector x(static_cast<Eigen::Index>(d));
  for (;;) {
    for (std::size_t i = 0; i < d; ++i)
      x(static_cast<Eigen::Index>(i)) = static_cast<double>(it[i]) * g.spacing(i);
    const Vector u = up * x;
    bool in = true;
    for (std::size_t i = 0; i < d && in; ++i) {
      const double v = u(static_cast<Eigen::Index>(i)) - static_cast<double>(q.k[i]);
      in = v >= lo && v < hi;
    }
    if (in) pts.push_back(it);
    std::size_t i = 0;
    while (i < d && ++it[i] > hi_i[i]) it[i] = lo_i[i], ++i;
    if (i == d) break;
  }
  return pts;
}

inline std::vector<std::vector<int>> monomials(std::size_t d, int max_degree) {
  std::vector<std::vector<int>> out;
  std::vector<int> e(d, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
    if (i == d) {
      out.push_back(e);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      e[i] = k;
      rec(i + 1, left - k);
    }
    e[i] = 0;
  };
  rec(0, max_degree);
  return out;
}

}  // namespace detail

// Indices (in storage order) of the lattice points in a cube, wrapped onto
// the torus.
inline std::vector<std::size_t> cube_members(const TorusGrid& g, const Anisotropy& a,
                                             const DyadicCube& q) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> idx(g.rank());
  for (const auto& p : detail::cube_points(g, a, q)) {
    for (std::size_t i = 0; i < g.rank(); ++i) idx[i] = g.wrap(i, p[i]);
    out.push_back(g.flat(idx));
  }
  return out;
}

struct OscillationResult {
  double value = 0.0;       // E_M(f, Q) in L_p(Q)
  double normalized = 0.0;  // value / ||1_Q||_{L_p}
  bool suboptimal = false;  // p = inf: least-squares fit, L_inf residual
  std::size_t points = 0;
  int iterations = 0;
};

// Best approximation of f on the cube by polynomials of total degree < M.
// p = 2 exact least squares, p = 1 iteratively reweighted least squares,
// p = inf least squares with the L_inf residual reported.
inline OscillationResult oscillation(const GridFunction& f, const Anisotropy& a, int m,
                                     const DyadicCube& cube, double p) {
  if (m < 1) throw InvalidArgument("oscillation: order must be >= 1");
  if (!(p == 1.0 || p == 2.0 || std::isinf(p)))
    throw InvalidArgument("oscillation: p must be 1, 2 or inf");
  const auto& g = f.grid();
  const auto pts = detail::cube_points(g, a, cube);
  const auto mono = detail::monomials(g.rank(), m - 1);
  if (pts.size() < mono.size())
    throw InvalidArgument("oscillation: cube has fewer lattice points than polynomial coefficients");
  const auto np = static_cast<Eigen::Index>(pts.size());
  const auto nb = static_cast<Eigen::Index>(mono.size());
  const std::size_t d = g.rank();
  // Center and scale each coordinate to [-1, 1] over the point set.
  std::vector<double> cmin(d, kInf), cmax(d, -kInf);
  for (const auto& q : pts)
    for (std::size_t i = 0; i < d; ++i) {
      const double x = static_cast<double>(q[i]) * g.spacing(i);
      cmin[i] = std::min(cmin[i], x);
      cmax[i] = std::max(cmax[i], x);
    }
  Matrix P(np, nb);
  const auto ncols = static_cast<Eigen::Index>(2 * f.channels());
  Matrix Y(np, ncols);
  std::vector<std::size_t> idx(d);
  for (Eigen::Index r = 0; r < np; ++r) {
    const auto& q = pts[static_cast<std::size_t>(r)];
    std::vector<double> u(d);
    for (std::size_t i = 0; i < d; ++i) {
      const double x = static_cast<double>(q[i]) * g.spacing(i);
      const double half = 0.5 * (cmax[i] - cmin[i]);
      u[i] = half > 0.0 ? (x - 0.5 * (cmax[i] + cmin[i])) / half : 0.0;
      idx[i] = g.wrap(i, q[i]);
    }
    for (Eigen::Index c = 0; c < nb; ++c) {
      double v = 1.0;
      for (std::size_t i = 0; i < d; ++i) v *= std::pow(u[i], mono[static_cast<std::size_t>(c)][i]);
      P(r, c) = v;
    }
    const std::size_t flat = g.flat(idx);
    for (std::size_t ch = 0; ch < f.channels(); ++ch) {
      const cplx v = f.samples()[ch * g.size() + flat];
      Y(r, static_cast<Eigen::Index>(2 * ch)) = v.real();
      Y(r, static_cast<Eigen::Index>(2 * ch + 1)) = v.imag();
    }
  }
  const auto residual_moduli = [&](const Matrix& coef) {
    const Matrix res = Y - P * coef;
    std::vector<double> out(static_cast<std::size_t>(np));
    for (Eigen::Index r = 0; r < np; ++r) out[static_cast<std::size_t>(r)] = res.row(r).norm();
    return out;
  };
  OscillationResult result;
  result.points = pts.size();
  const double cell = g.cell_volume();
  Matrix coef = P.colPivHouseholderQr().solve(Y);
  if (p == 1.0) {
    const double eps = 1e-12 * std::max(1.0, Y.cwiseAbs().maxCoeff());
    double prev = kInf;
    for (int it = 0; it < 50; ++it) {
      const auto rm = residual_moduli(coef);
      double cur = 0.0;
      for (double v : rm) cur += v;
      result.iterations = it + 1;
      if (std::abs(prev - cur) <= 1e-8 * std::max(cur, 1e-300)) break;
      prev = cur;
      Eigen::VectorXd sw(np);
      for (Eigen::Index r = 0; r < np; ++r)
        sw(r) = 1.0 / std::sqrt(std::max(rm[static_cast<std::size_t>(r)], eps));
      coef = (sw.asDiagonal() * P).colPivHouseholderQr().solve(sw.asDiagonal() * Y);
    }
  }
  const auto rm = residual_moduli(coef);
  if (std::isinf(p)) {
    result.value = *std::max_element(rm.begin(), rm.end());
    result.suboptimal = true;
    result.normalized = result.value;
  } else {
    std::vector<double> t(rm.size());
    for (std::size_t i = 0; i < rm.size(); ++i) t[i] = std::pow(rm[i], p);
    result.value = std::pow(pairwise_sum(t) * cell, 1.0 / p);
    result.normalized =
        result.value / std::pow(static_cast<double>(pts.size()) * cell, 1.0 / p);
  }
  return result;
}

}  // namespace anisolab

#endif  // ANISOLAB_SMOOTHNESS_HPP_
