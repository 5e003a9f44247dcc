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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "anisolab/report_io.hpp"

namespace anisolab {
namespace {

std::vector<Record> records(const std::vector<double>& ratios, const std::vector<int>& ms = {}) {
  std::vector<Record> out;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    Record r;
    r.group = "g";
    r.member = i;
    r.m = ms.empty() ? 0 : ms[i];
    r.lhs = ratios[i];
    r.rhs = 1.0;
    out.push_back(r);
  }
  return out;
}

TEST(Lab, AllEqualRatios) {
  auto rep = equivalence_report(records(std::vector<double>(20, 3.0)), Thresholds{});
  EXPECT_DOUBLE_EQ(rep.spread, 1.0);
  EXPECT_DOUBLE_EQ(rep.drift_slope, 0.0);
  EXPECT_DOUBLE_EQ(rep.ratio_min, 3.0);
  finalize(rep);
  EXPECT_TRUE(rep.pass);
}

TEST(Lab, SpreadOfTwoValues) {
  std::vector<double> r(20, 1.0);
  for (std::size_t i = 10; i < 20; ++i) r[i] = 2.0;
  const auto rep = equivalence_report(records(r), Thresholds{});
  EXPECT_DOUBLE_EQ(rep.spread, 2.0);
  EXPECT_DOUBLE_EQ(rep.ratio_max, 2.0);
}

TEST(Lab, GeometricGrowthDrifts) {
  std::vector<double> r;
  std::vector<int> ms;
  for (int i = 0; i < 24; ++i) {
    ms.push_back(i % 4);
    r.push_back(std::exp2(i % 4));
  }
  auto rep = equivalence_report(records(r, ms), Thresholds{});
  EXPECT_NEAR(rep.drift_slope, 1.0, 1e-12);
  finalize(rep);
  EXPECT_FALSE(rep.pass);
}

TEST(Lab, SampleRequirements) {
  EXPECT_THROW(equivalence_report(records(std::vector<double>(19, 1.0)), Thresholds{}),
               InvalidArgument);
  auto rs = records(std::vector<double>(21, 1.0));
  rs[0].lhs = 0.0;
  rs[0].rhs = 0.0;
  EXPECT_EQ(equivalence_report(rs, Thresholds{}).records.size(), 20u);
  rs[1].rhs = 0.0;
  EXPECT_THROW(equivalence_report(rs, Thresholds{}), InvalidArgument);
}

TEST(Lab, UpperBoundAndExactnessChecks) {
  auto ub = equivalence_report(records(std::vector<double>(20, 5.0)), Thresholds{},
                               VerdictMode::UpperBound);
  ub.refinement_delta = 0.5;
  finalize(ub);
  EXPECT_FALSE(ub.pass);
  std::vector<double> near(20, 1.0);
  near[3] = 1.0 + 1e-6;
  auto ex = equivalence_report(records(near), Thresholds{}, VerdictMode::Exactness);
  finalize(ex);
  ASSERT_TRUE(ex.max_rel_discrepancy);
  EXPECT_NEAR(*ex.max_rel_discrepancy, 1e-6, 1e-9);
  EXPECT_FALSE(ex.pass);
}

TEST(Lab, FamilyDeterminism) {
  const CampaignConfig cfg;
  const auto va = cfg.anisotropy();
  const auto a = family_members(cfg.family, va.blocks());
  const auto b = family_members(cfg.family, va.blocks());
  ASSERT_EQ(a.size(), cfg.family.count + 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].seed, b[i].seed);
    const auto fa = build_member(a[i], cfg.family, cfg.grid, va);
    const auto fb = build_member(b[i], cfg.family, cfg.grid, va);
    EXPECT_EQ(fa.samples(), fb.samples());
  }
  EXPECT_NE(member_seed(1, 0), member_seed(1, 1));
  EXPECT_NE(member_seed(1, 0), member_seed(2, 0));
}

CampaignConfig small() {
  CampaignConfig cfg;
  cfg.grid = TorusGrid({32, 32}, {std::numbers::pi, std::numbers::pi / 32.0});
  cfg.family.count = 6;
  return cfg;
}

TEST(Lab, SmallFubiniCampaign) {
  const auto rep = verify_fubini(small());
  EXPECT_TRUE(rep.pass);
  EXPECT_EQ(rep.mode, VerdictMode::Exactness);
  ASSERT_TRUE(rep.max_rel_discrepancy);
  EXPECT_LE(*rep.max_rel_discrepancy, 1e-10);
  EXPECT_EQ(rep.groups.size(), 2u);
}

TEST(Lab, ReportsAreReproducible) {
  const auto a = report_json_text(verify_fubini(small()));
  const auto b = report_json_text(verify_fubini(small()));
  EXPECT_EQ(a, b);
  auto threaded = small();
  threaded.threads = 3;
  EXPECT_EQ(report_json_text(verify_fubini(threaded)), a);
  EXPECT_EQ(report_json_text(parse_report(a)), a);
}

TEST(Lab, ReportFormats) {
  auto rep = equivalence_report(records(std::vector<double>(20, 2.0)), Thresholds{});
  rep.refinement_delta = kInf;
  finalize(rep);
  const auto back = parse_report(report_json_text(rep));
  EXPECT_TRUE(std::isinf(*back.refinement_delta));
  EXPECT_EQ(back.records.size(), 20u);
  const auto csv = report_csv_text(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "member_id,t,lhs,rhs,ratio,group");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 21);
  const auto sum = summary_csv_text({rep, rep});
  EXPECT_EQ(std::count(sum.begin(), sum.end(), '\n'), 3);
  EXPECT_THROW(summary_csv_text({}), InvalidArgument);
  EXPECT_THROW(parse_report("{}"), FormatError);
  EXPECT_THROW(parse_report("not json"), FormatError);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-kInf), "-inf");
}

}  // namespace
}  // namespace anisolab
