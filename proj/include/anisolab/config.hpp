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

#ifndef ANISOLAB_CONFIG_HPP_
#define ANISOLAB_CONFIG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "anisolab/error.hpp"
#include "anisolab/filterbank.hpp"
#include "anisolab/lab.hpp"
#include "anisolab/mixed_norm.hpp"
#include "anisolab/smoothness.hpp"

namespace anisolab {

// Raised for any invalid configuration entry; `field` is the JSON path.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& field, const std::string& msg)
      : InvalidArgument("config: " + field + ": " + msg), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Where the function for `norm` comes from.
struct FunctionSource {
  std::string kind = "family";  // family | file | constant | zero | flat_cosine
  std::size_t member = 0;
  std::string path;
  double value = 1.0;
};

struct RunConfig {
  CampaignConfig campaign;
  SpaceKind kind = SpaceKind::F;
  std::vector<std::vector<double>> points;
  FunctionSource function;
  std::string out_dir = "anisolab_out";
  std::string format = "json";
  std::uint64_t seed = 1;
};

// Accepts numbers and strings of the form "pi", "2*pi", "pi/64", "3*pi/8",
// "0.5".
inline double parse_period(const nlohmann::json& j, const std::string& field) {
  if (j.is_number()) return j.get<double>();
  if (!j.is_string()) throw ConfigError(field, "expected a number or a pi expression");
  std::string s = j.get<std::string>();
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  try {
    const auto pos = s.find("pi");
    if (pos == std::string::npos) {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    }
    double factor = 1.0, divisor = 1.0;
    const std::string head = s.substr(0, pos);
    const std::string tail = s.substr(pos + 2);
    if (!head.empty()) {
      if (head.back() != '*') throw std::invalid_argument(s);
      std::size_t used = 0;
      factor = std::stod(head.substr(0, head.size() - 1), &used);
      if (used != head.size() - 1) throw std::invalid_argument(s);
    }
    if (!tail.empty()) {
      if (tail.front() != '/') throw std::invalid_argument(s);
      std::size_t used = 0;
      divisor = std::stod(tail.substr(1), &used);
      if (used != tail.size() - 1) throw std::invalid_argument(s);
    }
    return factor * std::numbers::pi / divisor;
  } catch (const std::logic_error&) {
    throw ConfigError(field, "cannot parse '" + s + "'");
  }
}

namespace detail {

inline void allow_keys(const nlohmann::json& j, const std::string& where,
                       std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where.empty() ? "<root>" : where, "expected an object");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ConfigError(where.empty() ? k : where + "." + k, "unknown key");
}

template <class T>
T get_as(const nlohmann::json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(field, "wrong type");
  }
}

// Accepts a number (infinite when the string "inf") for exponents.
inline double exponent(const nlohmann::json& j, const std::string& field) {
  if (j.is_string() && j.get<std::string>() == "inf") return kInf;
  if (!j.is_number()) throw ConfigError(field, "expected a number or \"inf\"");
  return j.get<double>();
}

inline std::vector<double> exponents(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(exponent(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

inline Matrix block_matrix(const nlohmann::json& b, const std::string& field) {
  allow_keys(b, field, {"diagonal", "matrix", "scalar", "dim"});
  if (b.contains("diagonal")) {
    const auto v = get_as<std::vector<double>>(b["diagonal"], field + ".diagonal");
    if (v.empty()) throw ConfigError(field + ".diagonal", "empty");
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = v[i];
    return m;
  }
  if (b.contains("scalar")) {
    const double a = get_as<double>(b["scalar"], field + ".scalar");
    const auto d = b.contains("dim") ? get_as<std::size_t>(b["dim"], field + ".dim") : 1;
    if (d == 0) throw ConfigError(field + ".dim", "must be positive");
    return a * Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  }
  if (b.contains("matrix")) {
    const auto rows = get_as<std::vector<std::vector<double>>>(b["matrix"], field + ".matrix");
    const auto n = rows.size();
    if (n == 0) throw ConfigError(field + ".matrix", "empty");
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw ConfigError(field + ".matrix", "must be square");
      for (std::size_t k = 0; k < n; ++k) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    }
    return m;
  }
  throw ConfigError(field, "need one of diagonal, scalar, matrix");
}

}  // namespace detail

// Parses and validates. Every module precondition that can be checked
// without computing norms is checked here.
inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::allow_keys;
  using detail::get_as;
  allow_keys(j, "", {"seed", "threads", "grid", "refine", "anisotropy", "space", "bank", "family",
                     "thresholds", "difference", "scaling", "lifting", "duality", "peetre",
                     "output", "points", "function"});
  RunConfig rc;
  auto& c = rc.campaign;
  if (j.contains("seed")) rc.seed = get_as<std::uint64_t>(j["seed"], "seed");
  c.family.seed = rc.seed;
  if (j.contains("threads")) c.threads = get_as<std::size_t>(j["threads"], "threads");
  if (j.contains("refine")) c.refine = get_as<bool>(j["refine"], "refine");

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    allow_keys(g, "grid", {"dims", "period"});
    if (!g.contains("dims")) throw ConfigError("grid.dims", "missing");
    const auto dims = get_as<std::vector<std::size_t>>(g["dims"], "grid.dims");
    std::vector<double> period;
    if (g.contains("period")) {
      if (!g["period"].is_array()) throw ConfigError("grid.period", "expected an array");
      for (std::size_t i = 0; i < g["period"].size(); ++i)
        period.push_back(parse_period(g["period"][i], "grid.period[" + std::to_string(i) + "]"));
    }
    try {
      c.grid = TorusGrid(dims, period);
    } catch (const Error& e) {
      throw ConfigError("grid", e.what());
    }
  }

  if (j.contains("anisotropy")) {
    const auto& a = j["anisotropy"];
    allow_keys(a, "anisotropy", {"blocks"});
    if (!a.contains("blocks") || !a["blocks"].is_array() || a["blocks"].empty())
      throw ConfigError("anisotropy.blocks", "need a non-empty array");
    c.blocks.clear();
    for (std::size_t i = 0; i < a["blocks"].size(); ++i)
      c.blocks.push_back(
          detail::block_matrix(a["blocks"][i], "anisotropy.blocks[" + std::to_string(i) + "]"));
  }
  const DecomposedAnisotropy va = [&] {
    try {
      return c.anisotropy();
    } catch (const Error& e) {
      throw ConfigError("anisotropy", e.what());
    }
  }();
  if (va.dim() != c.grid.rank())
    throw ConfigError("anisotropy", "total dimension " + std::to_string(va.dim()) +
                                        " differs from the grid rank " +
                                        std::to_string(c.grid.rank()));
  c.p.assign(va.blocks(), 2.0);

  if (j.contains("space")) {
    const auto& s = j["space"];
    allow_keys(s, "space", {"kind", "s", "p", "q", "r", "weights"});
    if (s.contains("kind")) {
      try {
        rc.kind = space_kind_from_string(get_as<std::string>(s["kind"], "space.kind"));
      } catch (const Error& e) {
        throw ConfigError("space.kind", e.what());
      }
    }
    if (s.contains("s")) c.s = get_as<double>(s["s"], "space.s");
    if (s.contains("p")) c.p = detail::exponents(s["p"], "space.p");
    if (s.contains("q")) c.q = detail::exponent(s["q"], "space.q");
    if (s.contains("r")) c.r = detail::exponent(s["r"], "space.r");
    if (s.contains("weights")) c.weights = get_as<std::vector<double>>(s["weights"], "space.weights");
  }
  if (c.p.size() != va.blocks())
    throw ConfigError("space.p", "need one exponent per block (" + std::to_string(va.blocks()) + ")");
  if (rc.kind == SpaceKind::ScriptF || rc.kind == SpaceKind::LqOfInner)
    throw ConfigError("space.kind", "only F and B are available as direct norms");
  try {
    SpaceSpec spec = rc.kind == SpaceKind::F ? SpaceSpec::F(va, c.s, c.p, c.q)
                                             : SpaceSpec::B(va, c.s, c.p, c.q);
    spec.validate();
    if (c.weights) {
      if (c.weights->size() != va.blocks())
        throw ConfigError("space.weights", "need one exponent per block");
      WeightField(c.grid, va, *c.weights).require_admissible(c.p, std::vector<double>(va.blocks(), 1.0));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("space", e.what());
  }

  if (j.contains("bank")) {
    const auto& b = j["bank"];
    allow_keys(b, "bank", {"gamma", "delta", "alt_gamma", "alt_delta"});
    if (b.contains("gamma")) c.gamma = get_as<double>(b["gamma"], "bank.gamma");
    if (b.contains("delta")) c.delta = get_as<double>(b["delta"], "bank.delta");
    if (b.contains("alt_gamma")) c.alt_gamma = get_as<double>(b["alt_gamma"], "bank.alt_gamma");
    if (b.contains("alt_delta")) c.alt_delta = get_as<double>(b["alt_delta"], "bank.alt_delta");
  }
  try {
    FilterBank(c.grid, va, c.gamma, c.delta);
  } catch (const Error& e) {
    throw ConfigError("bank", e.what());
  }
  try {
    FilterBank(c.grid, va, c.alt_gamma, c.alt_delta);
  } catch (const Error& e) {
    throw ConfigError("bank.alt", e.what());
  }

  if (j.contains("family")) {
    const auto& f = j["family"];
    allow_keys(f, "family", {"seed", "count", "band", "channels", "dilations", "structured"});
    if (f.contains("seed")) c.family.seed = get_as<std::uint64_t>(f["seed"], "family.seed");
    if (f.contains("count")) c.family.count = get_as<std::size_t>(f["count"], "family.count");
    if (f.contains("band")) {
      const auto b = get_as<std::vector<double>>(f["band"], "family.band");
      if (b.size() != 2 || !(b[0] >= 0.0) || !(b[1] > b[0]))
        throw ConfigError("family.band", "need [lo, hi] with 0 <= lo < hi");
      c.family.band_lo = b[0];
      c.family.band_hi = b[1];
    }
    if (f.contains("channels"))
      c.family.channels = get_as<std::size_t>(f["channels"], "family.channels");
    if (f.contains("dilations"))
      c.family.dilations = get_as<std::vector<int>>(f["dilations"], "family.dilations");
    if (f.contains("structured"))
      c.family.structured = get_as<bool>(f["structured"], "family.structured");
  }
  if (c.family.channels == 0) throw ConfigError("family.channels", "must be positive");
  if (c.family.dilations.empty()) throw ConfigError("family.dilations", "empty");
  {
    const FilterBank bank(c.grid, va, c.gamma, c.delta);
    int top = *std::max_element(c.family.dilations.begin(), c.family.dilations.end());
    if (c.family.band_hi * std::exp2(top) > bank.covered_radius() * (1.0 + 1e-12))
      throw ConfigError("family.dilations", "largest dilate of the band exceeds the covered radius " +
                                                std::to_string(bank.covered_radius()));
  }

  if (j.contains("thresholds")) {
    const auto& t = j["thresholds"];
    allow_keys(t, "thresholds", {"spread", "drift", "refinement", "exactness"});
    if (t.contains("spread")) c.thresholds.spread = get_as<double>(t["spread"], "thresholds.spread");
    if (t.contains("drift")) c.thresholds.drift = get_as<double>(t["drift"], "thresholds.drift");
    if (t.contains("refinement"))
      c.thresholds.refinement = get_as<double>(t["refinement"], "thresholds.refinement");
    if (t.contains("exactness"))
      c.thresholds.exactness = get_as<double>(t["exactness"], "thresholds.exactness");
    if (!(c.thresholds.spread >= 1.0)) throw ConfigError("thresholds.spread", "must be >= 1");
  }

  if (j.contains("difference")) {
    const auto& d = j["difference"];
    allow_keys(d, "difference", {"M", "shape", "phi", "quadrature", "nodes_per_axis", "extra_scales"});
    auto& p = c.difference;
    if (d.contains("M")) p.M = get_as<int>(d["M"], "difference.M");
    if (d.contains("phi")) p.phi = get_as<std::vector<double>>(d["phi"], "difference.phi");
    if (d.contains("nodes_per_axis"))
      p.nodes_per_axis = get_as<int>(d["nodes_per_axis"], "difference.nodes_per_axis");
    if (d.contains("extra_scales"))
      p.extra_scales = get_as<int>(d["extra_scales"], "difference.extra_scales");
    if (d.contains("shape")) {
      const auto s = get_as<std::string>(d["shape"], "difference.shape");
      if (s == "product")
        p.shape = BallShape::Product;
      else if (s == "quasi_norm")
        p.shape = BallShape::QuasiNorm;
      else
        throw ConfigError("difference.shape", "expected product or quasi_norm");
    }
    if (d.contains("quadrature")) {
      const auto s = get_as<std::string>(d["quadrature"], "difference.quadrature");
      if (s == "scaled")
        p.quadrature = HQuadrature::Scaled;
      else if (s == "lattice")
        p.quadrature = HQuadrature::Lattice;
      else
        throw ConfigError("difference.quadrature", "expected scaled or lattice");
    }
    if (p.nodes_per_axis < 1) throw ConfigError("difference.nodes_per_axis", "must be positive");
    if (p.extra_scales < 0) throw ConfigError("difference.extra_scales", "must be >= 0");
  }

  if (j.contains("scaling")) {
    allow_keys(j["scaling"], "scaling", {"lambdas"});
    if (j["scaling"].contains("lambdas"))
      c.lambdas = get_as<std::vector<double>>(j["scaling"]["lambdas"], "scaling.lambdas");
    for (double l : c.lambdas)
      if (!(l > 0.0)) throw ConfigError("scaling.lambdas", "must be positive");
  }
  if (j.contains("lifting")) {
    allow_keys(j["lifting"], "lifting", {"sigmas"});
    if (j["lifting"].contains("sigmas"))
      c.sigmas = get_as<std::vector<double>>(j["lifting"]["sigmas"], "lifting.sigmas");
  }
  if (j.contains("duality")) {
    allow_keys(j["duality"], "duality", {"pairs"});
    if (j["duality"].contains("pairs"))
      c.pairs = get_as<std::size_t>(j["duality"]["pairs"], "duality.pairs");
  }
  if (j.contains("peetre")) {
    allow_keys(j["peetre"], "peetre", {"r"});
    if (j["peetre"].contains("r")) c.peetre_r = get_as<std::vector<double>>(j["peetre"]["r"], "peetre.r");
    if (!c.peetre_r.empty() && c.peetre_r.size() != va.blocks())
      throw ConfigError("peetre.r", "need one exponent per block");
    for (double r : c.peetre_r)
      if (!(r > 0.0)) throw ConfigError("peetre.r", "must be positive");
  }

  if (j.contains("output")) {
    const auto& o = j["output"];
    allow_keys(o, "output", {"dir", "format"});
    if (o.contains("dir")) rc.out_dir = get_as<std::string>(o["dir"], "output.dir");
    if (o.contains("format")) rc.format = get_as<std::string>(o["format"], "output.format");
  }
  if (rc.format != "json" && rc.format != "csv")
    throw ConfigError("output.format", "expected json or csv");

  if (j.contains("points")) {
    rc.points = get_as<std::vector<std::vector<double>>>(j["points"], "points");
    for (std::size_t i = 0; i < rc.points.size(); ++i)
      if (rc.points[i].size() != va.dim())
        throw ConfigError("points[" + std::to_string(i) + "]", "dimension mismatch");
  }
  if (j.contains("function")) {
    const auto& f = j["function"];
    allow_keys(f, "function", {"kind", "member", "path", "value"});
    if (f.contains("kind")) rc.function.kind = get_as<std::string>(f["kind"], "function.kind");
    if (f.contains("member")) rc.function.member = get_as<std::size_t>(f["member"], "function.member");
    if (f.contains("path")) rc.function.path = get_as<std::string>(f["path"], "function.path");
    if (f.contains("value")) rc.function.value = get_as<double>(f["value"], "function.value");
    const std::set<std::string> kinds{"family", "file", "constant", "zero", "flat_cosine"};
    if (!kinds.count(rc.function.kind)) throw ConfigError("function.kind", "unknown source");
    if (rc.function.kind == "file" && rc.function.path.empty())
      throw ConfigError("function.path", "required for file sources");
  }
  return rc;
}

inline RunConfig parse_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("<file>", e.what());
  }
  return parse_config(j);
}

// Theorem-specific windows checked before a campaign starts.
inline void validate_for_theorem(const RunConfig& rc, const std::string& theorem) {
  const auto& c = rc.campaign;
  const auto va = c.anisotropy();
  const auto& names = theorem_names();
  if (std::find(names.begin(), names.end(), theorem) == names.end())
    throw ConfigError("theorem", "unknown theorem '" + theorem + "'");
  if (theorem != "fubini" && c.family.count < 20)
    throw ConfigError("family.count", "at least 20 members needed for a statistical verdict");
  try {
    if (theorem == "difference") {
      const auto spec = SpaceSpec::F(va, c.s, c.p, c.q);
      check_difference_window(c.weights ? spec.with_weights(*c.weights) : spec, c.difference);
    } else if (theorem == "intersection") {
      detail::intersection_setup(c);
    } else if (theorem == "duality") {
      for (double p : c.p)
        if (!(p > 1.0) || std::isinf(p)) throw ParameterWindow("duality: need p_j in (1, inf)");
      if (!(c.q > 1.0) || std::isinf(c.q)) throw ParameterWindow("duality: need q in (1, inf)");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("space", e.what());
  }
}

}  // namespace anisolab

#endif  // ANISOLAB_CONFIG_HPP_
