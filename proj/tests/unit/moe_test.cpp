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
#include <numeric>
#include <sstream>

#include "slideqc/errors.h"
#include "slideqc/moe.h"
#include "test_util.h"

namespace slideqc {
namespace {

using testing::Gen;
using testing::OracleExpert;

std::vector<ProbVector> FromArtifactProbs(const std::vector<double>& art) {
  std::vector<ProbVector> out;
  for (double a : art) out.push_back(ProbVector{{a, 1.0 - a}});
  return out;
}

TEST(Fuse, Examples) {
  auto f = Fuse(FromArtifactProbs({0.1, 0.2, 0.9, 0.3, 0.05}));
  EXPECT_EQ(f.p_artifact, 0.9);
  EXPECT_EQ(f.p_artifact_free, 1.0 - 0.9);
  EXPECT_FALSE(f.label.has_value());
  EXPECT_EQ(DecideMoe(f, 0.326), 3);
  EXPECT_EQ(Fuse(FromArtifactProbs({0, 0, 0, 0, 0})).p_artifact_free, 1.0);
  EXPECT_EQ(Fuse(FromArtifactProbs({1, 1, 1, 1, 1})).p_artifact_free, 0.0);
}

TEST(Fuse, Errors) {
  EXPECT_THROW(Fuse(FromArtifactProbs({0.1, 0.2})), ValidationError);
  std::vector<ProbVector> six(5, ProbVector{{0.5, 0.5, 0, 0, 0, 0}});
  EXPECT_THROW(Fuse(six), ValidationError);
}

TEST(DecideMoe, Examples) {
  FusedPrediction f;
  f.p_artifact_free = 0.35;
  f.p_artifact = 0.65;
  EXPECT_EQ(DecideMoe(f, 0.326), 0);
  // Inclusive boundary.
  EXPECT_EQ(DecideMoe(f, 0.35), 0);
  f.p_artifact_free = 0.0;
  f.p_artifact = 1.0;
  f.per_expert_artifact_probs = {1, 1, 0, 0, 0};
  EXPECT_EQ(DecideMoe(f, 0.0), 0);
  EXPECT_EQ(DecideMoe(f, 0.5), 1);  // tie goes to the smallest index
}

TEST(DecideMoe, AtOneOnlyCertainlyFree) {
  Gen g(1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> art(5);
    for (auto& a : art) a = g.Bool(0.2) ? 0.0 : g.Uniform();
    const auto f = Fuse(FromArtifactProbs(art));
    EXPECT_EQ(DecideMoe(f, 1.0) == 0, f.p_artifact_free == 1.0);
    EXPECT_EQ(DecideMoe(f, 0.0), 0);
  }
}

TEST(DecideMulticlass, Examples) {
  EXPECT_EQ(DecideMulticlass(ProbVector{{0.4, 0.3, 0.1, 0.1, 0.05, 0.05}}, 0.341), 0);
  EXPECT_EQ(DecideMulticlass(ProbVector{{0.2, 0.5, 0.1, 0.1, 0.05, 0.05}}, 0.341), 1);
  for (double t : {0.0, 0.3, 1.0}) {
    EXPECT_EQ(DecideMulticlass(ProbVector{{1, 0, 0, 0, 0, 0}}, t), 0);
  }
  EXPECT_EQ(DecideMulticlass(ProbVector{{0.2, 0.1, 0.3, 0.3, 0.1, 0.0}}, 0.5), 2);
  EXPECT_THROW(DecideMulticlass(ProbVector{{0.5, 0.5}}, 0.5), ValidationError);
}

TEST(Fuse, PermutationCovariant) {
  Gen g(2);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> art(5);
    for (auto& a : art) a = g.Uniform();
    std::vector<int> perm(5);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 4; i > 0; --i) std::swap(perm[i], perm[g.Int(0, i)]);
    std::vector<double> permuted(5);
    for (int i = 0; i < 5; ++i) permuted[i] = art[perm[i]];
    const auto a = Fuse(FromArtifactProbs(art));
    const auto b = Fuse(FromArtifactProbs(permuted));
    EXPECT_EQ(a.p_artifact_free, b.p_artifact_free);
    for (int i = 0; i < 5; ++i) {
      EXPECT_EQ(b.per_expert_artifact_probs[i], a.per_expert_artifact_probs[perm[i]]);
    }
  }
}

TEST(DecideMoe, FreeCountMonotoneInThreshold) {
  Gen g(3);
  std::vector<FusedPrediction> fused;
  for (int i = 0; i < 500; ++i) {
    std::vector<double> art(5);
    for (auto& a : art) a = g.Uniform();
    fused.push_back(Fuse(FromArtifactProbs(art)));
  }
  long prev = static_cast<long>(fused.size()) + 1;
  for (int k = 0; k <= 100; ++k) {
    const double t = k / 100.0;
    long free_count = 0;
    for (const auto& f : fused) {
      const auto label = DecideMoe(f, t);
      ASSERT_LE(label, 5);
      free_count += label == 0;
    }
    EXPECT_LE(free_count, prev);
    prev = free_count;
  }
}

MoEConfig OracleMoE(double t_s) {
  MoEConfig cfg;
  for (int k = 0; k < kNumArtifacts; ++k) cfg.experts[k] = std::make_shared<OracleExpert>(k + 1);
  cfg.t_s = t_s;
  return cfg;
}

std::vector<PatchRecord> LabeledGrid(Gen& g, int rows, int cols) {
  std::vector<PatchRecord> ps;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      ps.push_back(testing::MakePatch(Raster(4, 4), c * kPatchSize, r * kPatchSize,
                                      static_cast<std::uint8_t>(g.Int(0, 5))));
    }
  }
  for (std::size_t i = ps.size() - 1; i > 0; --i) {
    std::swap(ps[i], ps[static_cast<std::size_t>(g.Int(0, static_cast<int>(i)))]);
  }
  return ps;
}

TEST(ClassifySlide, OracleExpertsReproduceTruthSorted) {
  Gen g(4);
  const auto ps = LabeledGrid(g, 5, 7);
  EXPECT_TRUE(ClassifySlide(std::span<const PatchRecord>{}, OracleMoE(0.5)).empty());
  for (const auto& run : {ClassifySlide(ps, OracleMoE(0.5), 1), ClassifySlide(ps, OracleMoE(0.5), 3)}) {
    ASSERT_EQ(run.size(), ps.size());
    for (std::size_t i = 1; i < run.size(); ++i) {
      EXPECT_TRUE(std::pair(run[i - 1].y, run[i - 1].x) < std::pair(run[i].y, run[i].x));
    }
    for (const auto& d : run) {
      const auto it = std::find_if(ps.begin(), ps.end(),
                                   [&](const PatchRecord& p) { return p.x == d.x && p.y == d.y; });
      EXPECT_EQ(d.label, *it->label);
      EXPECT_EQ(d.p_free, *it->label == 0 ? 1.0 : 0.0);
    }
  }
  EXPECT_EQ(ClassifySlide(ps, OracleMoE(0.5), 1), ClassifySlide(ps, OracleMoE(0.5), 4));
}

TEST(ClassifySlide, MulticlassOracle) {
  Gen g(5);
  const auto ps = LabeledGrid(g, 3, 4);
  MulticlassConfig cfg{std::make_shared<OracleExpert>(0), 0.341};
  const auto d = ClassifySlide(ps, cfg, 2);
  for (const auto& x : d) {
    const auto it = std::find_if(ps.begin(), ps.end(),
                                 [&](const PatchRecord& p) { return p.x == x.x && p.y == x.y; });
    EXPECT_EQ(x.label, *it->label);
  }
}

TEST(ClassifySlide, ConfigValidation) {
  MoEConfig cfg = OracleMoE(0.5);
  cfg.experts[2] = nullptr;
  std::vector<PatchRecord> one = {testing::MakePatch(Raster(4, 4), 0, 0, 0)};
  EXPECT_THROW(ClassifySlide(one, cfg), ValidationError);
  cfg = OracleMoE(0.5);
  cfg.experts[1] = std::make_shared<OracleExpert>(0);
  EXPECT_THROW(ClassifySlide(one, cfg), ValidationError);
  EXPECT_THROW(ClassifySlide(one, OracleMoE(1.5)), ValidationError);
  MulticlassConfig mc{std::make_shared<OracleExpert>(1), 0.5};
  EXPECT_THROW(ClassifySlide(one, mc), ValidationError);
}

TEST(Decisions, JsonlRoundTrip) {
  Gen g(6);
  std::vector<Decision> ds;
  for (int i = 0; i < 50; ++i) {
    ds.push_back({224 * g.Int(0, 20), 224 * g.Int(0, 20),
                  static_cast<std::uint8_t>(g.Int(0, 5)), g.Uniform()});
  }
  const std::string text = DecisionsToJsonl(ds);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 50);
  EXPECT_EQ(text.find("{\"x\":"), 0u);
  std::istringstream in(text);
  EXPECT_EQ(DecisionsFromJsonl(in), ds);
  std::istringstream bad("{\"x\":0}\n");
  EXPECT_THROW(DecisionsFromJsonl(bad), ValidationError);
}

}  // namespace
}  // namespace slideqc
