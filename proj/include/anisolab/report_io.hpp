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

#ifndef ANISOLAB_REPORT_IO_HPP_
#define ANISOLAB_REPORT_IO_HPP_

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "anisolab/error.hpp"
#include "anisolab/grid_io.hpp"
#include "anisolab/lab.hpp"

namespace anisolab {

// Shortest text that round-trips a double; non-finite values as inf/-inf/nan.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

namespace detail {

// JSON has no infinities; they travel as strings.
inline nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

inline double from_num(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::nan("");
  }
  throw FormatError("report: expected a number");
}

inline nlohmann::json group_json(const GroupStats& g) {
  return {{"group", g.group},
          {"count", g.count},
          {"ratio_min", num(g.ratio_min)},
          {"ratio_max", num(g.ratio_max)},
          {"spread", num(g.spread)},
          {"drift_slope", num(g.drift_slope)},
          {"max_rel_discrepancy", num(g.max_rel_discrepancy)}};
}

inline GroupStats group_from_json(const nlohmann::json& j) {
  GroupStats g;
  g.group = j.at("group").get<std::string>();
  g.count = j.at("count").get<std::size_t>();
  g.ratio_min = from_num(j.at("ratio_min"));
  g.ratio_max = from_num(j.at("ratio_max"));
  g.spread = from_num(j.at("spread"));
  g.drift_slope = from_num(j.at("drift_slope"));
  g.max_rel_discrepancy = from_num(j.at("max_rel_discrepancy"));
  return g;
}

}  // namespace detail

inline nlohmann::json report_to_json(const EquivalenceReport& r) {
  using nlohmann::json;
  json j;
  j["theorem_id"] = r.theorem_id;
  j["mode"] = to_string(r.mode);
  j["verdict"] = r.pass ? "pass" : "fail";
  j["grid"] = r.grid;
  j["refined_grid"] = r.refined_grid;
  j["thresholds"] = {{"spread", r.thresholds.spread},
                     {"drift", r.thresholds.drift},
                     {"refinement", r.thresholds.refinement},
                     {"exactness", r.thresholds.exactness}};
  j["ratio_min"] = detail::num(r.ratio_min);
  j["ratio_max"] = detail::num(r.ratio_max);
  j["spread"] = detail::num(r.spread);
  j["drift_slope"] = detail::num(r.drift_slope);
  j["refinement_delta"] = r.refinement_delta ? detail::num(*r.refinement_delta) : json(nullptr);
  j["max_rel_discrepancy"] =
      r.max_rel_discrepancy ? detail::num(*r.max_rel_discrepancy) : json(nullptr);
  j["groups"] = json::array();
  for (const auto& g : r.groups) j["groups"].push_back(detail::group_json(g));
  j["refined_groups"] = json::array();
  for (const auto& g : r.refined_groups) j["refined_groups"].push_back(detail::group_json(g));
  j["checks"] = json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back({{"name", c.name},
                           {"value", detail::num(c.value)},
                           {"limit", detail::num(c.limit)},
                           {"pass", c.pass}});
  j["diagnostics"] = json::object();
  for (const auto& [k, v] : r.diagnostics) j["diagnostics"][k] = detail::num(v);
  j["records"] = json::array();
  for (const auto& rec : r.records)
    j["records"].push_back({{"member_id", rec.member},
                            {"m", rec.m},
                            {"t", rec.t()},
                            {"lhs", detail::num(rec.lhs)},
                            {"rhs", detail::num(rec.rhs)},
                            {"ratio", detail::num(rec.ratio)},
                            {"group", rec.group}});
  return j;
}

inline EquivalenceReport report_from_json(const nlohmann::json& j) {
  try {
    EquivalenceReport r;
    r.theorem_id = j.at("theorem_id").get<std::string>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "equivalence")
      r.mode = VerdictMode::Equivalence;
    else if (mode == "upper_bound")
      r.mode = VerdictMode::UpperBound;
    else if (mode == "exactness")
      r.mode = VerdictMode::Exactness;
    else
      throw FormatError("report: unknown mode '" + mode + "'");
    r.pass = j.at("verdict").get<std::string>() == "pass";
    r.grid = j.value("grid", "");
    r.refined_grid = j.value("refined_grid", "");
    const auto& t = j.at("thresholds");
    r.thresholds = Thresholds{t.at("spread").get<double>(), t.at("drift").get<double>(),
                              t.at("refinement").get<double>(), t.at("exactness").get<double>()};
    r.ratio_min = detail::from_num(j.at("ratio_min"));
    r.ratio_max = detail::from_num(j.at("ratio_max"));
    r.spread = detail::from_num(j.at("spread"));
    r.drift_slope = detail::from_num(j.at("drift_slope"));
    if (!j.at("refinement_delta").is_null())
      r.refinement_delta = detail::from_num(j.at("refinement_delta"));
    if (!j.at("max_rel_discrepancy").is_null())
      r.max_rel_discrepancy = detail::from_num(j.at("max_rel_discrepancy"));
    for (const auto& g : j.at("groups")) r.groups.push_back(detail::group_from_json(g));
    for (const auto& g : j.at("refined_groups")) r.refined_groups.push_back(detail::group_from_json(g));
    for (const auto& c : j.at("checks"))
      r.checks.push_back(Check{c.at("name").get<std::string>(), detail::from_num(c.at("value")),
                               detail::from_num(c.at("limit")), c.at("pass").get<bool>()});
    for (const auto& [k, v] : j.at("diagnostics").items()) r.diagnostics[k] = detail::from_num(v);
    for (const auto& rec : j.at("records")) {
      Record x;
      x.member = rec.at("member_id").get<std::size_t>();
      x.m = rec.at("m").get<int>();
      x.lhs = detail::from_num(rec.at("lhs"));
      x.rhs = detail::from_num(rec.at("rhs"));
      x.ratio = detail::from_num(rec.at("ratio"));
      x.group = rec.at("group").get<std::string>();
      r.records.push_back(std::move(x));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
}

inline std::string report_json_text(const EquivalenceReport& r) {
  return report_to_json(r).dump(2) + "\n";
}

inline EquivalenceReport parse_report(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what());
  }
  return report_from_json(j);
}

// One row per record. Column order: member_id, t, lhs, rhs, ratio, group.
inline std::string report_csv_text(const EquivalenceReport& r) {
  std::string out = "member_id,t,lhs,rhs,ratio,group\n";
  for (const auto& rec : r.records)
    out += std::to_string(rec.member) + "," + format_double(rec.t()) + "," +
           format_double(rec.lhs) + "," + format_double(rec.rhs) + "," +
           format_double(rec.ratio) + "," + rec.group + "\n";
  return out;
}

inline const char* kSummaryHeader =
    "theorem_id,mode,verdict,records,ratio_min,ratio_max,spread,drift_slope,refinement_delta,"
    "max_rel_discrepancy\n";

// Merged summary, one row per report in input order.
inline std::string summary_csv_text(const std::vector<EquivalenceReport>& reports) {
  if (reports.empty()) throw InvalidArgument("report: no input reports");
  std::string out = kSummaryHeader;
  for (const auto& r : reports)
    out += r.theorem_id + "," + to_string(r.mode) + "," + (r.pass ? "pass" : "fail") + "," +
           std::to_string(r.records.size()) + "," + format_double(r.ratio_min) + "," +
           format_double(r.ratio_max) + "," + format_double(r.spread) + "," +
           format_double(r.drift_slope) + "," +
           (r.refinement_delta ? format_double(*r.refinement_delta) : "") + "," +
           (r.max_rel_discrepancy ? format_double(*r.max_rel_discrepancy) : "") + "\n";
  return out;
}

// Series for external plotting: log2 t against log2 ratio.
inline std::string plot_csv_text(const std::vector<EquivalenceReport>& reports) {
  if (reports.empty()) throw InvalidArgument("report: no input reports");
  std::string out = "theorem_id,group,member_id,log2_t,log2_ratio\n";
  for (const auto& r : reports)
    for (const auto& rec : r.records)
      out += r.theorem_id + "," + rec.group + "," + std::to_string(rec.member) + "," +
             std::to_string(rec.m) + "," + format_double(std::log2(rec.ratio)) + "\n";
  return out;
}

}  // namespace anisolab

#endif  // ANISOLAB_REPORT_IO_HPP_
