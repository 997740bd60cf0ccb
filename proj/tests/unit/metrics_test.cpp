// Copyright 2026 The SlideQC Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <set>

#include "slideqc/errors.h"
#include "slideqc/metrics.h"
#include "test_util.h"

namespace slideqc {
namespace {

using testing::Gen;

TEST(ClassificationMetrics, Examples) {
  auto m = ComputeClassificationMetrics({9, 0, 1, 0});
  EXPECT_EQ(*m.accuracy, 1.0);
  m = ComputeClassificationMetrics({8, 2, 88, 2});
  EXPECT_EQ(*m.precision, 0.8);
  EXPECT_EQ(*m.sensitivity, 0.8);
  EXPECT_NEAR(*m.f1, 0.8, 1e-15);
  EXPECT_NEAR(*m.specificity, 88.0 / 90.0, 1e-15);
  EXPECT_NEAR(*m.accuracy, 0.96, 1e-15);
  m = ComputeClassificationMetrics({0, 3, 4, 0});
  EXPECT_FALSE(m.sensitivity.has_value());
  EXPECT_EQ(*m.f1, 0.0);
  EXPECT_EQ(*m.precision, 0.0);
  EXPECT_FALSE(ComputeClassificationMetrics({}).accuracy.has_value());
  const nlohmann::json j = MetricsToJson(m);
  EXPECT_TRUE(j.at("sensitivity").is_null());
  EXPECT_EQ(j.at("specificity"), 4.0 / 7.0);
}

TEST(ClassificationMetrics, BruteForceFromPairs) {
  Gen g(1);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = g.Int(1, 60);
    std::unique_ptr<bool[]> pred(new bool[n]), truth(new bool[n]);
    int tp = 0, fp = 0, tn = 0, fn = 0, agree = 0;
    for (int i = 0; i < n; ++i) {
      pred[i] = g.Bool();
      truth[i] = g.Bool();
      tp += pred[i] && truth[i];
      fp += pred[i] && !truth[i];
      tn += !pred[i] && !truth[i];
      fn += !pred[i] && truth[i];
      agree += pred[i] == truth[i];
    }
    const ConfusionCounts c = CountConfusion({pred.get(), static_cast<std::size_t>(n)},
                                             {truth.get(), static_cast<std::size_t>(n)});
    EXPECT_EQ(c, (ConfusionCounts{static_cast<std::uint64_t>(tp), static_cast<std::uint64_t>(fp),
                                  static_cast<std::uint64_t>(tn), static_cast<std::uint64_t>(fn)}));
    const auto m = ComputeClassificationMetrics(c);
    EXPECT_NEAR(*m.accuracy, static_cast<double>(agree) / n, 1e-12);
    if (tp + fn > 0) EXPECT_NEAR(*m.sensitivity, static_cast<double>(tp) / (tp + fn), 1e-12);
    if (tn + fp > 0) EXPECT_NEAR(*m.specificity, static_cast<double>(tn) / (tn + fp), 1e-12);
    if (tp + fp > 0) EXPECT_NEAR(*m.precision, static_cast<double>(tp) / (tp + fp), 1e-12);
    if (tp > 0) EXPECT_NEAR(*m.f1, 2.0 * tp / (2.0 * tp + fp + fn), 1e-12);
  }
  bool a[2] = {true, false};
  bool b[1] = {true};
  EXPECT_THROW(CountConfusion(a, b), ValidationError);
}

BinaryMask Ones(int rows, int cols, int first, int count) {
  BinaryMask m(rows, cols);
  for (int i = first; i < first + count; ++i) m.data[static_cast<std::size_t>(i)] = 1;
  return m;
}

TEST(Dice, Examples) {
  const BinaryMask a = Ones(20, 20, 0, 100);
  EXPECT_EQ(Dice(a, a), 1.0);
  EXPECT_EQ(Dice(a, Ones(20, 20, 100, 100)), 0.0);
  EXPECT_EQ(Dice(a, Ones(20, 20, 50, 100)), 0.5);
  EXPECT_EQ(Dice(BinaryMask(3, 3), BinaryMask(3, 3)), 1.0);
  EXPECT_EQ(Dice(a, BinaryMask(20, 20)), 0.0);
  EXPECT_THROW(Dice(a, BinaryMask(20, 21)), ValidationError);
}

TEST(Dice, Properties) {
  Gen g(2);
  for (int trial = 0; trial < 300; ++trial) {
    BinaryMask a(g.Int(1, 10), g.Int(1, 10));
    BinaryMask b(a.rows, a.cols);
    for (auto& v : a.data) v = g.Bool();
    for (auto& v : b.data) v = g.Bool();
    EXPECT_EQ(Dice(a, b), Dice(b, a));
    EXPECT_GE(Dice(a, b), 0.0);
    EXPECT_LE(Dice(a, b), 1.0);
    if (a.Count() > 0) EXPECT_EQ(Dice(a, a), 1.0);
  }
}

// Direct formula with floating-point marginals.
double KappaOracle(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> ma, mb;
  double po = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma[a[i]] += 1 / n;
    mb[b[i]] += 1 / n;
    po += (a[i] == b[i]) / n;
  }
  double pe = 0;
  for (const auto& [k, v] : ma) pe += v * (mb.contains(k) ? mb[k] : 0.0);
  if (std::abs(1 - pe) < 1e-12) return po >= 1 - 1e-12 ? 1.0 : 0.0;
  return (po - pe) / (1 - pe);
}

TEST(CohenKappa, Examples) {
  const std::vector<int> x = {0, 1, 2, 2, 5};
  EXPECT_EQ(CohenKappa(x, x), 1.0);
  const std::vector<int> a = {1, 1, 0, 0}, b = {1, 0, 1, 0};
  EXPECT_EQ(CohenKappa(a, b), 0.0);
  const std::vector<int> c = {1, 1, 1, 1}, d = {0, 0, 0, 0};
  EXPECT_EQ(CohenKappa(c, d), 0.0);
  EXPECT_EQ(CohenKappa(c, c), 1.0);
  EXPECT_THROW(CohenKappa(a, std::vector<int>{1}), ValidationError);
  EXPECT_THROW(CohenKappa(std::vector<int>{}, std::vector<int>{}), ValidationError);
}

TEST(CohenKappa, OracleIdentityAndRelabelInvariance) {
  Gen g(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = g.Int(1, 40), k = g.Int(2, 6);
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = g.Int(0, k - 1);
      b[i] = g.Bool(0.6) ? a[i] : g.Int(0, k - 1);
    }
    const double kappa = CohenKappa(a, b);
    EXPECT_NEAR(kappa, KappaOracle(a, b), 1e-9);
    EXPECT_GE(kappa, -1.0);
    EXPECT_LE(kappa, 1.0);
    if (std::set<int>(a.begin(), a.end()).size() >= 2) EXPECT_EQ(CohenKappa(a, a), 1.0);
    std::vector<int> perm(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) perm[i] = 10 * i + 7;
    for (int i = k - 1; i > 0; --i) std::swap(perm[i], perm[g.Int(0, i)]);
    std::vector<int> ra(n), rb(n);
    for (int i = 0; i < n; ++i) {
      ra[i] = perm[a[i]];
      rb[i] = perm[b[i]];
    }
    EXPECT_EQ(CohenKappa(ra, rb), kappa);
  }
}

std::vector<PatchRecord> FixturePatches(int n) {
  std::vector<PatchRecord> ps;
  for (int i = 0; i < n; ++i) {
    ps.push_back(testing::MakePatch(testing::Solid(224, 224, static_cast<std::uint8_t>(20 * i), 90, 160),
                                    224 * i));
  }
  return ps;
}

TEST(ThroughputBench, FeatureModel) {
  const FeatureModel m(WeightMatrix(2, kFeatureDim + 1));
  const auto ps = FixturePatches(4);
  const ComplexityProfile p = ThroughputBench(m, ps, 3);
  EXPECT_EQ(p.param_count, 34u);
  EXPECT_EQ(p.timings_s.size(), 3u);
  EXPECT_GT(p.throughput_pps, 0.0);
  std::vector<double> t = p.timings_s;
  std::sort(t.begin(), t.end());
  EXPECT_NEAR(p.throughput_pps, 4.0 / t[1], 1e-9 * p.throughput_pps);
  EXPECT_THROW(ThroughputBench(m, {}, 3), ValidationError);
  EXPECT_THROW(ThroughputBench(m, ps, 0), ValidationError);
}

TEST(ThroughputBench, PipelineCallCount) {
  int calls = 0;
  const auto ps = FixturePatches(2);
  const auto p = ThroughputBench([&](std::span<const PatchRecord>) { ++calls; },
                                 ModelComplexity{7, 11}, ps, 4);
  EXPECT_EQ(calls, 5);  // one warm-up plus four timed passes
  EXPECT_EQ(p.param_count, 7u);
  EXPECT_EQ(p.flop_count, 11u);
}

TEST(HsStats, Examples) {
  std::vector<PatchRecord> red = {testing::MakePatch(testing::Solid(8, 8, 255, 0, 0)),
                                  testing::MakePatch(testing::Solid(8, 8, 255, 0, 0))};
  const HsSummary r = HsStats(red);
  EXPECT_EQ(r.per_patch.size(), 2u);
  EXPECT_EQ(r.hue_mean, 0.0);
  EXPECT_EQ(r.saturation_mean, 1.0);
  EXPECT_EQ(r.saturation_std, 0.0);
  std::vector<PatchRecord> gray = {testing::MakePatch(testing::Solid(8, 8, 90, 90, 90))};
  EXPECT_EQ(HsStats(gray).saturation_mean, 0.0);
  EXPECT_TRUE(HsStats({}).per_patch.empty());
}

TEST(HsStats, SeparatesTintedCohorts) {
  Gen g(4);
  auto cohort = [&](int r, int gr, int b) {
    std::vector<PatchRecord> ps;
    for (int i = 0; i < 20; ++i) {
      Raster img(16, 16);
      for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
          img.Set(x, y, static_cast<std::uint8_t>(r + g.Int(-10, 10)),
                  static_cast<std::uint8_t>(gr + g.Int(-10, 10)),
                  static_cast<std::uint8_t>(b + g.Int(-10, 10)));
        }
      }
      ps.push_back(testing::MakePatch(img));
    }
    return HsStats(ps);
  };
  const HsSummary a = cohort(200, 110, 170);  // pink
  const HsSummary b = cohort(110, 120, 200);  // blue-violet
  EXPECT_GT(std::abs(a.hue_mean - b.hue_mean), 3 * (a.hue_std + b.hue_std));
}

}  // namespace
}  // namespace slideqc
