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

#include <fstream>

#include "slideqc/errors.h"
#include "slideqc/pipeline.h"
#include "slideqc/synthgen.h"
#include "test_util.h"

namespace slideqc {
namespace {

namespace fs = std::filesystem;
using testing::Gen;
using testing::TempDir;

TEST(Pipeline, ParseInferMode) {
  EXPECT_EQ(ParseInferMode("moe"), InferMode::kMoE);
  EXPECT_EQ(ParseInferMode("multiclass"), InferMode::kMulticlass);
  EXPECT_THROW(ParseInferMode("MoE"), ValidationError);
}

TEST(Pipeline, TaskDatasetLabels) {
  std::vector<PatchRecord> ps;
  for (int c = 0; c < kNumClasses; ++c) {
    ps.push_back(testing::MakePatch(testing::Solid(224, 224, 40 * c, 90, 120), 0, 0,
                                    static_cast<std::uint8_t>(c)));
  }
  ps.push_back(testing::MakePatch(testing::Solid(224, 224, 1, 2, 3)));  // unlabeled
  const auto fold = BuildTaskDataset(ps, "fold");
  ASSERT_EQ(fold.size(), 2u);
  EXPECT_EQ(fold[0].label, 1);  // artifact-free
  EXPECT_EQ(fold[1].label, 0);  // artifact
  EXPECT_EQ(fold[1].x, ExtractFeatures(ps[5].pixels));
  EXPECT_EQ(BuildTaskDataset(ps, "multiclass").size(), 6u);
  EXPECT_THROW(BuildTaskDataset(ps, "smudge"), ValidationError);
  EXPECT_TRUE(IsValidTask("blur"));
  EXPECT_FALSE(IsValidTask("artifact_free"));
}

TEST(Pipeline, ResolveModelPath) {
  TempDir d("models");
  std::ofstream(d / "blood.json") << "{}";
  fs::create_directories(d / "blur");
  EXPECT_EQ(ResolveModelPath(d.path(), "blood"), d / "blood.json");
  EXPECT_EQ(ResolveModelPath(d.path(), "blur"), d / "blur");
  EXPECT_THROW(ResolveModelPath(d.path(), "fold"), ValidationError);
  EXPECT_THROW(ResolveModelPath(d / "missing", "fold"), ValidationError);
  EXPECT_THROW(LoadMoE(d.path(), 0.5), ValidationError);
}

TEST(Pipeline, CellTruthLabelMajority) {
  LabelRaster t(448, 224, kUnlabeled);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) t.data[static_cast<std::size_t>(y) * 448 + x] = x < 100 ? 2 : 0;
  }
  EXPECT_EQ(CellTruthLabel(t, 0, 0), 0);
  EXPECT_EQ(CellTruthLabel(t, 224, 0), kUnlabeled);
}

TEST(Pipeline, EvaluatePerfectAndInverted) {
  LabelRaster t(672, 448, 0);
  for (int y = 0; y < 224; ++y) {
    for (int x = 448; x < 672; ++x) t.data[static_cast<std::size_t>(y) * 672 + x] = 3;
  }
  std::vector<Decision> ds;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      ds.push_back({c * 224, r * 224, CellTruthLabel(t, c * 224, r * 224), 0});
    }
  }
  const EvalResult e = Evaluate(ds, t);
  EXPECT_EQ(e.n_cells, 6u);
  EXPECT_EQ(e.dice, 1.0);
  EXPECT_EQ(e.kappa, 1.0);
  EXPECT_EQ(e.multiclass_accuracy, 1.0);
  EXPECT_EQ(e.rho_pred, 5.0 / 6.0);
  EXPECT_EQ(e.rho_pred, e.rho_truth);
  EXPECT_EQ(e.confusion, (ConfusionCounts{5, 0, 1, 0}));
  for (auto& d : ds) d.label = d.label == 0 ? 1 : 0;
  const EvalResult inv = Evaluate(ds, t);
  EXPECT_EQ(inv.dice, 0.0);
  EXPECT_EQ(inv.confusion, (ConfusionCounts{0, 1, 0, 5}));
  const nlohmann::json j = EvalToJson(inv);
  EXPECT_EQ(j.at("fn"), 5);
  EXPECT_THROW(Evaluate({}, t), ValidationError);
}

TEST(Pipeline, InferOnBlankSlideGivesEmptyReport) {
  Slide s;
  s.manifest.slide_id = "blank";
  s.manifest.width_px = 448;
  s.manifest.height_px = 448;
  s.raster = testing::Solid(448, 448, 255, 255, 255);
  int calls = 0;
  const PatchClassifier none = [&](std::span<const PatchRecord> ps, int) {
    ++calls;
    EXPECT_TRUE(ps.empty());
    return std::vector<Decision>{};
  };
  const InferOutputs out = InferSlide(s, none, {});
  EXPECT_EQ(calls, 1);
  EXPECT_TRUE(out.degenerate_foreground);
  EXPECT_FALSE(out.report.accept);
  EXPECT_EQ(out.report.n_total, 0u);
  EXPECT_EQ(out.roi_mask.data, std::vector<std::uint8_t>(448 * 448, 0));
  EXPECT_EQ(out.masked_slide, Raster(448, 448));
  EXPECT_FALSE(out.report.throughput_pps.has_value());
}

TEST(Pipeline, InferMaskMatchesDecisions) {
  SynthSpec spec;
  spec.seed = 77;
  spec.width = 1120;
  spec.height = 896;
  const SynthSlide sl = GenerateSlide(spec, "m");
  const Slide slide{sl.manifest, sl.raster, sl.annotations};
  // Every patch artifact-free except those in the first grid column.
  const PatchClassifier cls = [](std::span<const PatchRecord> ps, int) {
    std::vector<Decision> out;
    for (const auto& p : ps) out.push_back({p.x, p.y, static_cast<std::uint8_t>(p.x == 0 ? 4 : 0), 0.5});
    return out;
  };
  InferOptions opt;
  opt.close_kernel = 1;
  const InferOutputs out = InferSlide(slide, cls, opt);
  ASSERT_FALSE(out.decisions.empty());
  for (int y = 0; y < 896; y += 37) {
    for (int x = 0; x < 1120; x += 41) {
      const std::uint8_t cell = out.matrix.At(y / 224, x / 224);
      EXPECT_EQ(out.roi_mask.data[static_cast<std::size_t>(y) * 1120 + x], cell == 0 ? 255 : 0);
      const bool keep = cell == 0;
      for (int ch = 0; ch < 3; ++ch) {
        EXPECT_EQ(out.masked_slide.Pixel(x, y)[ch], keep ? sl.raster.Pixel(x, y)[ch] : 0);
      }
    }
  }
  EXPECT_EQ(out.seg_map.width, 5);
  EXPECT_EQ(out.seg_map.height, 4);
}

}  // namespace
}  // namespace slideqc
