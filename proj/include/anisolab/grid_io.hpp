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

#ifndef ANISOLAB_GRID_IO_HPP_
#define ANISOLAB_GRID_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "anisolab/error.hpp"
#include "anisolab/grid.hpp"

// Container layout:
//   8 bytes   magic "ANISOGF1"
//   8 bytes   header length H, unsigned little-endian
//   H bytes   JSON header {dims, period, channels, layout, scalar}
//   payload   lattice points in row-major order, channels innermost, each
//             value a (re, im) pair of little-endian IEEE floats whose width
//             is given by scalar: "complex64" (2 x float32) or "complex128".

namespace anisolab {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

enum class Scalar { Complex64, Complex128 };

// Writes to a sibling temporary file and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("rename failed: " + path.string() + ": " + ec.message());
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline std::string encode_grid_function(const GridFunction& f, Scalar scalar = Scalar::Complex64) {
  const auto& g = f.grid();
  nlohmann::json h;
  h["dims"] = g.dims();
  h["period"] = g.period();
  h["channels"] = f.channels();
  h["layout"] = "row-major";
  h["channel_order"] = "innermost";
  h["scalar"] = scalar == Scalar::Complex64 ? "complex64" : "complex128";
  const std::string header = h.dump();
  std::string out = "ANISOGF1";
  const auto len = static_cast<std::uint64_t>(header.size());
  out.append(reinterpret_cast<const char*>(&len), 8);
  out += header;
  const auto& s = f.samples();
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t c = 0; c < f.channels(); ++c) {
      const cplx v = s[c * g.size() + i];
      if (scalar == Scalar::Complex64) {
        const float pair[2] = {static_cast<float>(v.real()), static_cast<float>(v.imag())};
        out.append(reinterpret_cast<const char*>(pair), sizeof pair);
      } else {
        const double pair[2] = {v.real(), v.imag()};
        out.append(reinterpret_cast<const char*>(pair), sizeof pair);
      }
    }
  return out;
}

inline GridFunction decode_grid_function(const std::string& bytes) {
  if (bytes.size() < 16 || bytes.compare(0, 8, "ANISOGF1") != 0)
    throw FormatError("grid function file: bad magic");
  std::uint64_t len = 0;
  std::memcpy(&len, bytes.data() + 8, 8);
  if (len > bytes.size() - 16) throw FormatError("grid function file: truncated header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.substr(16, len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("grid function file: bad header: ") + e.what());
  }
  try {
    if (h.at("layout") != "row-major") throw FormatError("grid function file: unsupported layout");
    const TorusGrid g(h.at("dims").get<std::vector<std::size_t>>(),
                      h.at("period").get<std::vector<double>>());
    const auto channels = h.at("channels").get<std::size_t>();
    const std::string scalar = h.at("scalar").get<std::string>();
    std::size_t width;
    if (scalar == "complex64")
      width = 8;
    else if (scalar == "complex128")
      width = 16;
    else
      throw FormatError("grid function file: unknown scalar " + scalar);
    const std::size_t expect = g.size() * channels * width;
    if (bytes.size() - 16 - len != expect) throw FormatError("grid function file: payload size");
    std::vector<cplx> s(g.size() * channels);
    const char* p = bytes.data() + 16 + len;
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t c = 0; c < channels; ++c) {
        if (width == 8) {
          float pair[2];
          std::memcpy(pair, p, 8);
          s[c * g.size() + i] = cplx(pair[0], pair[1]);
        } else {
          double pair[2];
          std::memcpy(pair, p, 16);
          s[c * g.size() + i] = cplx(pair[0], pair[1]);
        }
        p += width;
      }
    return GridFunction::from_samples(g, channels, std::move(s));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("grid function file: bad header field: ") + e.what());
  }
}

inline void write_grid_function(const std::filesystem::path& path, const GridFunction& f,
                                Scalar scalar = Scalar::Complex64) {
  atomic_write(path, encode_grid_function(f, scalar));
}

inline GridFunction read_grid_function(const std::filesystem::path& path) {
  return decode_grid_function(read_file(path));
}

// One row per lattice point: i0..i{d-1}, then re_c, im_c per channel.
inline std::string grid_function_csv(const GridFunction& f) {
  const auto& g = f.grid();
  std::ostringstream os;
  os << std::setprecision(17);
  for (std::size_t a = 0; a < g.rank(); ++a) os << (a ? "," : "") << "i" << a;
  for (std::size_t c = 0; c < f.channels(); ++c) os << ",re" << c << ",im" << c;
  os << "\n";
  std::vector<std::size_t> idx;
  const auto& s = f.samples();
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.unravel(i, idx);
    for (std::size_t a = 0; a < g.rank(); ++a) os << (a ? "," : "") << idx[a];
    for (std::size_t c = 0; c < f.channels(); ++c) {
      const cplx v = s[c * g.size() + i];
      os << "," << v.real() << "," << v.imag();
    }
    os << "\n";
  }
  return os.str();
}

inline GridFunction field_as_function(const Field& f) {
  std::vector<cplx> s(f.values.begin(), f.values.end());
  return GridFunction::from_samples(f.grid, 1, std::move(s));
}

}  // namespace anisolab

#endif  // ANISOLAB_GRID_IO_HPP_
