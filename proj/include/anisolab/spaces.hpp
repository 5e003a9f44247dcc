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

#ifndef ANISOLAB_SPACES_HPP_
#define ANISOLAB_SPACES_HPP_

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anisolab/error.hpp"
#include "anisolab/filterbank.hpp"
#include "anisolab/grid.hpp"
#include "anisolab/mixed_norm.hpp"

namespace anisolab {

struct NormValue {
  SpaceSpec spec;
  double value = 0.0;
  // 2^{ns} ||S_n f||_{L_p} per scale. For B the value is the l_q norm of
  // these; for F they are diagnostic only.
  std::vector<double> pieces;
  std::string bank_id;
  // Scales dropped by a resolution guard (difference norms in lattice mode).
  std::vector<int> excluded_scales;
};

namespace detail {

inline std::vector<Field> piece_moduli(const FilterBank& bank, const GridFunction& f) {
  std::vector<Field> out;
  for (const auto& piece : bank.decompose(f)) out.push_back(piece.modulus());
  return out;
}

inline void require_full_bank(const FilterBank& bank, const GridFunction& f) {
  if (!(bank.grid() == f.grid())) throw ShapeMismatch("norm: bank and function grids differ");
  if (bank.first_axis() != 0 || bank.axis_count() != f.grid().rank())
    throw ShapeMismatch("norm: bank must act on all axes");
}

inline std::optional<WeightField> make_weight(const SpaceSpec& spec, const TorusGrid& grid) {
  if (!spec.weights) return std::nullopt;
  WeightField w(grid, spec.anisotropy, *spec.weights);
  w.require_admissible(spec.p, spec.weight_r);
  return w;
}

inline std::size_t axes_in(const Decomposition& d, std::size_t first, std::size_t count) {
  std::size_t n = 0;
  for (std::size_t j = first; j < first + count; ++j) n += d[j];
  return n;
}

}  // namespace detail

inline NormValue tl_norm(const GridFunction& f, const SpaceSpec& spec, const FilterBank& bank) {
  if (spec.kind != SpaceKind::F) throw InvalidArgument("tl_norm: spec kind must be F");
  spec.validate();
  if (!(bank.anisotropy() == spec.anisotropy))
    throw InvalidArgument("tl_norm: bank anisotropy differs from the space anisotropy");
  detail::require_full_bank(bank, f);
  const auto w = detail::make_weight(spec, f.grid());
  const WeightField* wp = w ? &*w : nullptr;
  const auto pieces = detail::piece_moduli(bank, f);
  NormValue v{spec, seq_norm_F(pieces, spec.s, spec.p, spec.q, spec.decomposition, wp),
              scaled_member_norms(pieces, spec.s, spec.p, spec.decomposition, wp), bank.id(), {}};
  return v;
}

inline NormValue besov_norm(const GridFunction& f, const SpaceSpec& spec,
                            const FilterBank& bank) {
  if (spec.kind != SpaceKind::B) throw InvalidArgument("besov_norm: spec kind must be B");
  spec.validate();
  if (!(bank.anisotropy() == spec.anisotropy))
    throw InvalidArgument("besov_norm: bank anisotropy differs from the space anisotropy");
  detail::require_full_bank(bank, f);
  const auto w = detail::make_weight(spec, f.grid());
  const WeightField* wp = w ? &*w : nullptr;
  const auto pieces = detail::piece_moduli(bank, f);
  auto scaled = scaled_member_norms(pieces, spec.s, spec.p, spec.decomposition, wp);
  const double value = detail::lq(scaled, spec.q);
  return NormValue{spec, value, std::move(scaled), bank.id(), {}};
}

// Pointwise l_r over outer-filtered pieces, L_p over the inner blocks, L_q
// over the outer blocks. The bank acts on the outer axes only.
inline NormValue script_f_norm(const GridFunction& f, const SpaceSpec& spec,
                               const FilterBank& outer_bank) {
  if (spec.kind != SpaceKind::ScriptF) throw InvalidArgument("script_f_norm: spec kind");
  spec.validate();
  const std::size_t inner_axes = detail::axes_in(spec.decomposition, 0, spec.inner_blocks);
  if (!(outer_bank.grid() == f.grid()) || outer_bank.first_axis() != inner_axes ||
      inner_axes + outer_bank.axis_count() != f.grid().rank() ||
      !(outer_bank.anisotropy() == spec.anisotropy))
    throw ShapeMismatch("script_f_norm: bank must act on exactly the outer axes");
  const auto pieces = detail::piece_moduli(outer_bank, f);
  const double value = seq_norm_F(pieces, spec.s, spec.p, spec.r, spec.decomposition);
  return NormValue{spec, value, scaled_member_norms(pieces, spec.s, spec.p, spec.decomposition),
                   outer_bank.id(), {}};
}

// L_q over the outer blocks of the inner F^{sigma}_{p,r} norm of each slice.
inline NormValue lq_of_inner_norm(const GridFunction& f, const SpaceSpec& spec,
                                  const FilterBank& inner_bank) {
  if (spec.kind != SpaceKind::LqOfInner) throw InvalidArgument("lq_of_inner_norm: spec kind");
  spec.validate();
  const std::size_t inner_axes = detail::axes_in(spec.decomposition, 0, spec.inner_blocks);
  if (!(inner_bank.grid() == f.grid()) || inner_bank.first_axis() != 0 ||
      inner_bank.axis_count() != inner_axes || !(inner_bank.anisotropy() == spec.anisotropy))
    throw ShapeMismatch("lq_of_inner_norm: bank must act on exactly the inner axes");
  const auto pieces = detail::piece_moduli(inner_bank, f);
  const double value = seq_norm_F(pieces, spec.s, spec.p, spec.r, spec.decomposition);
  return NormValue{spec, value, scaled_member_norms(pieces, spec.s, spec.p, spec.decomposition),
                   inner_bank.id(), {}};
}

inline NormValue norm(const GridFunction& f, const SpaceSpec& spec, const FilterBank& bank) {
  switch (spec.kind) {
    case SpaceKind::F:
      return tl_norm(f, spec, bank);
    case SpaceKind::B:
      return besov_norm(f, spec, bank);
    case SpaceKind::ScriptF:
      return script_f_norm(f, spec, bank);
    case SpaceKind::LqOfInner:
      return lq_of_inner_norm(f, spec, bank);
  }
  throw InvalidArgument("norm: unknown space kind");
}

// Symbol of the lift: rho for rho >= 1, (1 + rho^2) / 2 below, which is
// positive, C^1 at rho = 1 and takes values in [1/2, 1].
inline double lift_symbol(double rho) { return rho >= 1.0 ? rho : 0.5 * (1.0 + rho * rho); }

inline GridFunction lift(const GridFunction& f, double sigma, const DecomposedAnisotropy& va) {
  if (va.dim() != f.grid().rank()) throw ShapeMismatch("lift: anisotropy dimension");
  if (sigma == 0.0) return f;
  auto m = frequency_quasi_norm_field(f.grid(), va).values;
  for (auto& v : m) v = std::pow(lift_symbol(v), sigma);
  return f.multiply_spectrum(m);
}

}  // namespace anisolab

#endif  // ANISOLAB_SPACES_HPP_
