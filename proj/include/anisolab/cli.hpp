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

#ifndef ANISOLAB_CLI_HPP_
#define ANISOLAB_CLI_HPP_

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "anisolab/config.hpp"
#include "anisolab/error.hpp"
#include "anisolab/grid_io.hpp"
#include "anisolab/lab.hpp"
#include "anisolab/report_io.hpp"
#include "anisolab/spaces.hpp"

namespace anisolab::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kConfigError = 2 };

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string grid;
  std::string format;
  std::string theorem;
  std::vector<std::string> inputs;
};

// "64x64" or "64x128x32".
inline std::vector<std::size_t> parse_grid_override(const std::string& s) {
  std::vector<std::size_t> dims;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find_first_of("xX", start);
    const auto tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
      throw ConfigError("--grid", "expected NxM, got '" + s + "'");
    dims.push_back(std::stoul(tok));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return dims;
}

// Loads the config file and applies flag and environment overrides before
// validation, so overrides are validated like file entries.
inline RunConfig load_config(const Options& o) {
  nlohmann::json j = nlohmann::json::object();
  if (!o.config.empty()) {
    std::string text;
    try {
      text = read_file(o.config);
    } catch (const Error& e) {
      throw ConfigError("--config", e.what());
    }
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("<file>", e.what());
    }
  }
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  if (!o.grid.empty()) {
    const auto dims = parse_grid_override(o.grid);
    j["grid"]["dims"] = dims;
  }
  if (o.seed) {
    j["seed"] = *o.seed;
    if (j.contains("family") && j["family"].is_object()) j["family"].erase("seed");
  }
  if (const char* env = std::getenv("ANISOLAB_THREADS"); env && *env) {
    try {
      j["threads"] = std::stoul(env);
    } catch (const std::logic_error&) {
      throw ConfigError("ANISOLAB_THREADS", "not a number");
    }
  }
  if (o.threads) j["threads"] = *o.threads;
  auto rc = parse_config(j);
  if (const char* env = std::getenv("ANISOLAB_OUT_DIR"); env && *env) rc.out_dir = env;
  if (!o.out.empty()) rc.out_dir = o.out;
  if (!o.format.empty()) {
    if (o.format != "json" && o.format != "csv") throw ConfigError("--format", "expected json or csv");
    rc.format = o.format;
  }
  if (rc.campaign.threads == 0) rc.campaign.threads = default_threads();
  return rc;
}

inline std::filesystem::path out_path(const RunConfig& rc, const std::string& name) {
  return std::filesystem::path(rc.out_dir) / name;
}

inline int cmd_rho(const RunConfig& rc, std::ostream& out) {
  const auto va = rc.campaign.anisotropy();
  if (rc.points.empty()) throw ConfigError("points", "no points to evaluate");
  std::string csv = "point";
  for (std::size_t a = 0; a < va.dim(); ++a) csv += ",x" + std::to_string(a);
  for (std::size_t b = 0; b < va.blocks(); ++b) csv += ",rho_" + std::to_string(b);
  csv += ",rho\n";
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < rc.points.size(); ++i) {
    Vector x = Eigen::Map<const Vector>(rc.points[i].data(), static_cast<Eigen::Index>(va.dim()));
    const auto blocks = va.block_quasi_norms(x);
    const double rho = va.vector_quasi_norm(x);
    csv += std::to_string(i);
    for (double v : rc.points[i]) csv += "," + format_double(v);
    for (double v : blocks) csv += "," + format_double(v);
    csv += "," + format_double(rho) + "\n";
    rows.push_back({{"point", rc.points[i]}, {"block_rho", blocks}, {"rho", rho}});
  }
  const std::string text = rc.format == "csv" ? csv
                                              : nlohmann::json{{"anisotropy", va.describe()},
                                                               {"rows", rows}}
                                                        .dump(2) +
                                                    "\n";
  const auto path = out_path(rc, "rho." + rc.format);
  atomic_write(path, text);
  out << csv;
  return kPass;
}

inline GridFunction load_function(const RunConfig& rc) {
  const auto& c = rc.campaign;
  const auto va = c.anisotropy();
  const auto& src = rc.function;
  if (src.kind == "zero") return GridFunction::zeros(c.grid, c.family.channels);
  if (src.kind == "constant") return GridFunction::constant(c.grid, src.value, c.family.channels);
  if (src.kind == "file") {
    auto f = read_grid_function(src.path);
    if (!(f.grid() == c.grid))
      throw ConfigError("function.path", "grid " + f.grid().describe() + " differs from the config grid " +
                                             c.grid.describe());
    return f;
  }
  const auto members = family_members(c.family, va.blocks());
  if (src.kind == "flat_cosine") {
    for (const auto& m : members)
      if (m.kind == MemberKind::FlatCosine) return build_member(m, c.family, c.grid, va);
    FamilySpec fam = c.family;
    fam.structured = true;
    return build_member(Member{0, MemberKind::FlatCosine, 0}, fam, c.grid, va);
  }
  if (src.member >= members.size())
    throw ConfigError("function.member", "index beyond the family size " + std::to_string(members.size()));
  return build_member(members[src.member], c.family, c.grid, va);
}

inline int cmd_norm(const RunConfig& rc, std::ostream& out) {
  const auto& c = rc.campaign;
  const auto va = c.anisotropy();
  const auto f = load_function(rc);
  const FilterBank bank(c.grid, va, c.gamma, c.delta);
  SpaceSpec spec = rc.kind == SpaceKind::F ? SpaceSpec::F(va, c.s, c.p, c.q)
                                           : SpaceSpec::B(va, c.s, c.p, c.q);
  if (c.weights) spec = spec.with_weights(*c.weights);
  const auto v = norm(f, spec, bank);
  nlohmann::json p = nlohmann::json::array();
  for (double x : v.pieces) p.push_back(detail::num(x));
  nlohmann::json exps = nlohmann::json::array();
  for (double x : spec.p) exps.push_back(detail::num(x));
  const nlohmann::json j{{"kind", to_string(spec.kind)},
                         {"s", spec.s},
                         {"p", exps},
                         {"q", detail::num(spec.q)},
                         {"function", rc.function.kind},
                         {"grid", c.grid.describe()},
                         {"value", detail::num(v.value)},
                         {"pieces", p},
                         {"bank_id", v.bank_id}};
  std::string text;
  if (rc.format == "csv") {
    text = "kind,value,bank_id\n" + to_string(spec.kind) + "," + format_double(v.value) + ",\"" +
           v.bank_id + "\"\n";
  } else {
    text = j.dump(2) + "\n";
  }
  atomic_write(out_path(rc, "norm." + rc.format), text);
  out << to_string(spec.kind) << " norm = " << format_double(v.value) << "\n";
  return kPass;
}

inline int cmd_verify(const RunConfig& rc, const std::string& theorem, std::ostream& out) {
  validate_for_theorem(rc, theorem);
  const auto rep = run_theorem(theorem, rc.campaign);
  const auto path = out_path(rc, theorem + "." + rc.format);
  atomic_write(path, rc.format == "csv" ? report_csv_text(rep) : report_json_text(rep));
  out << theorem << ": " << (rep.pass ? "PASS" : "FAIL") << " records=" << rep.records.size()
      << " spread=" << format_double(rep.spread) << " drift=" << format_double(rep.drift_slope);
  if (rep.refinement_delta) out << " refinement_delta=" << format_double(*rep.refinement_delta);
  if (rep.max_rel_discrepancy) out << " max_rel_discrepancy=" << format_double(*rep.max_rel_discrepancy);
  out << " -> " << path.string() << "\n";
  for (const auto& c : rep.checks)
    if (!c.pass)
      out << "  failed check " << c.name << ": " << format_double(c.value) << " > "
          << format_double(c.limit) << "\n";
  return rep.pass ? kPass : kFail;
}

inline int cmd_report(const Options& o, std::ostream& out) {
  if (o.inputs.empty()) throw ConfigError("report", "no input reports");
  std::vector<EquivalenceReport> reps;
  for (const auto& in : o.inputs) {
    try {
      reps.push_back(parse_report(read_file(in)));
    } catch (const Error& e) {
      throw ConfigError(in, e.what());
    }
  }
  std::string dir = o.out;
  if (dir.empty())
    if (const char* env = std::getenv("ANISOLAB_OUT_DIR"); env && *env) dir = env;
  if (dir.empty()) dir = "anisolab_out";
  const std::filesystem::path d(dir);
  const auto summary = summary_csv_text(reps);
  atomic_write(d / "summary.csv", summary);
  atomic_write(d / "plot_data.csv", plot_csv_text(reps));
  out << summary;
  return kPass;
}

// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"anisolab: anisotropic mixed-norm function space laboratory"};
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--seed", seed, "family seed override");
    sub->add_option("--threads", threads, "worker threads (0: hardware)");
    sub->add_option("--grid", o.grid, "grid override, e.g. 64x64");
    sub->add_option("--format", o.format, "json or csv");
  };
  auto* rho = app.add_subcommand("rho", "evaluate quasi-norms at the configured points");
  add_common(rho);
  auto* nrm = app.add_subcommand("norm", "evaluate an F or B norm");
  add_common(nrm);
  auto* ver = app.add_subcommand("verify", "run a verification campaign");
  add_common(ver);
  ver->add_option("theorem", o.theorem, "intersection|difference|scaling|lifting|fubini|duality|peetre|bank")
      ->required();
  auto* rep = app.add_subcommand("report", "merge campaign reports");
  rep->add_option("--out", o.out, "output directory");
  rep->add_option("inputs", o.inputs, "JSON report files");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
  for (auto* sub : {rho, nrm, ver}) {
    if (sub->count("--seed")) o.seed = seed;
    if (sub->count("--threads")) o.threads = threads;
  }
  try {
    if (rep->parsed()) return cmd_report(o, out);
    const auto rc = load_config(o);
    if (rho->parsed()) return cmd_rho(rc, out);
    if (nrm->parsed()) return cmd_norm(rc, out);
    return cmd_verify(rc, o.theorem, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace anisolab::cli

#endif  // ANISOLAB_CLI_HPP_
