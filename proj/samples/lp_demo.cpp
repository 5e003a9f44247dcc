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

// Decomposes a band-limited function on a (1, 2)-anisotropic torus, prints
// the per-scale energies and compares the F norm with the difference norm.

#include <cstdio>
#include <numbers>

#include "anisolab/filterbank.hpp"
#include "anisolab/smoothness.hpp"
#include "anisolab/spaces.hpp"

int main() {
  using namespace anisolab;
  const TorusGrid grid({64, 64}, {std::numbers::pi, std::numbers::pi / 64.0});
  const DecomposedAnisotropy va({Anisotropy::scalar(1.0, 1), Anisotropy::scalar(2.0, 1)});
  const FilterBank bank(grid, va);
  const auto f = random_bandlimited(grid, 7, annulus_band(va, 8.0, 16.0));

  std::printf("grid %s, n_max %zu, covered radius %g\n", grid.describe().c_str(), bank.n_max(),
              bank.covered_radius());
  const auto pieces = bank.decompose(f);
  for (std::size_t n = 0; n < pieces.size(); ++n)
    std::printf("  scale %zu: ||S_n f||_2 = %.6f\n", n,
                mixed_lp(pieces[n].modulus(), {2.0, 2.0}, va.decomposition()));

  const auto spec = SpaceSpec::F(va, 1.0, {2.0, 2.0}, 2.0);
  const double lp = tl_norm(f, spec, bank).value;
  const double diff = difference_norm(f, spec, DifferenceProfile{}).value;
  std::printf("F norm %.6f, difference norm %.6f, ratio %.4f\n", lp, diff, diff / lp);
  return 0;
}
