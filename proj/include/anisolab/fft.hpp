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

#ifndef ANISOLAB_FFT_HPP_
#define ANISOLAB_FFT_HPP_

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "anisolab/error.hpp"

namespace anisolab {

using cplx = std::complex<double>;

namespace detail {

// FFTW plans keyed by shape and direction. Planning is serialized; executing
// a plan on new arrays through fftw_execute_dft is thread-safe.
class FftPlanCache {
 public:
  static FftPlanCache& instance() {
    static FftPlanCache cache;
    return cache;
  }

  fftw_plan plan(const std::vector<std::size_t>& dims, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(dims, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t total = 1;
    std::vector<int> n;
    for (auto d : dims) {
      total *= d;
      n.push_back(static_cast<int>(d));
    }
    auto* buf = fftw_alloc_complex(total);
    fftw_plan p = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    if (!p) throw Error("fft: planning failed");
    plans_.emplace(std::move(key), p);
    return p;
  }

  ~FftPlanCache() {
    for (auto& kv : plans_) fftw_destroy_plan(kv.second);
  }

 private:
  FftPlanCache() = default;
  std::mutex mutex_;
  std::map<std::pair<std::vector<std::size_t>, int>, fftw_plan> plans_;
};

}  // namespace detail

// In-place forward transform, divided by the point count so that the
// constant 1 maps to coefficient 1 at frequency 0.
inline void fft_forward(const std::vector<std::size_t>& dims, cplx* data) {
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  auto p = detail::FftPlanCache::instance().plan(dims, FFTW_FORWARD);
  auto* z = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, z, z);
  const double scale = 1.0 / static_cast<double>(total);
  for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
}

// In-place inverse transform, unnormalized (synthesis of the coefficients).
inline void fft_inverse(const std::vector<std::size_t>& dims, cplx* data) {
  auto p = detail::FftPlanCache::instance().plan(dims, FFTW_BACKWARD);
  auto* z = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p, z, z);
}

}  // namespace anisolab

#endif  // ANISOLAB_FFT_HPP_
