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

#include <set>

#include <boost/multiprecision/cpp_int.hpp>

#include "slideqc/errors.h"
#include "slideqc/tiler.h"
#include "oracles.h"
#include "test_util.h"

namespace slideqc {
namespace {

using boost::multiprecision::cpp_rational;
using testing::Gen;

// Exhaustive maximizer of w0*w1*(mu0-mu1)^2 in exact rationals over
// t in 0..255 (foreground = value < t), smallest t on ties.
int OtsuOracle(const ValueHistogram& h) {
  cpp_rational total = 0;
  for (auto c : h) total += c;
  int best_t = -1;
  cpp_rational best = -1;
  for (int t = 0; t < 256; ++t) {
    cpp_rational n0 = 0, s0 = 0, n1 = 0, s1 = 0;
    for (int i = 0; i < 256; ++i) {
      (i < t ? n0 : n1) += h[i];
      (i < t ? s0 : s1) += cpp_rational(h[i]) * i;
    }
    if (n0 == 0 || n1 == 0) continue;
    const cpp_rational w0 = n0 / total, w1 = n1 / total;
    const cpp_rational mu0 = s0 / n0, mu1 = s1 / n1;
    const cpp_rational var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (var > best) {
      best = var;
      best_t = t;
    }
  }
  return best_t;
}

TEST(RgbToHsv, Examples) {
  Hsv w = RgbToHsv(255, 255, 255);
  EXPECT_EQ(w.h, 0);
  EXPECT_EQ(w.s, 0);
  EXPECT_EQ(w.v, 1.0);
  Hsv r = RgbToHsv(255, 0, 0);
  EXPECT_EQ(r.h, 0);
  EXPECT_EQ(r.s, 1.0);
  EXPECT_EQ(r.v, 1.0);
  Hsv k = RgbToHsv(0, 0, 0);
  EXPECT_EQ(k.h, 0);
  EXPECT_EQ(k.s, 0);
  EXPECT_EQ(k.v, 0);
}

TEST(RgbToHsv, HexconeReference) {
  Hsv g = RgbToHsv(0, 255, 0);
  EXPECT_NEAR(g.h, 120, 1e-12);
  Hsv b = RgbToHsv(0, 0, 255);
  EXPECT_NEAR(b.h, 240, 1e-12);
  Hsv m = RgbToHsv(255, 0, 128);
  EXPECT_NEAR(m.h, 360 - 60.0 * 128 / 255, 1e-9);
  Hsv p = RgbToHsv(100, 50, 200);
  EXPECT_NEAR(p.v, 200 / 255.0, 1e-12);
  EXPECT_NEAR(p.s, 150 / 200.0, 1e-12);
  EXPECT_NEAR(p.h, 60.0 * (4 + (100 - 50) / 150.0), 1e-9);
}

TEST(Otsu, TwoDeltaPeaksSeparated) {
  ValueHistogram h{};
  h[50] = 1000;
  h[200] = 1000;
  const int t = OtsuThreshold(h);
  EXPECT_GT(t, 50);
  EXPECT_LE(t, 200);
  EXPECT_EQ(t, OtsuOracle(h));
}

TEST(Otsu, SingleBinReturnsBin) {
  for (int b : {0, 17, 128, 255}) {
    ValueHistogram h{};
    h[b] = 12345;
    EXPECT_EQ(OtsuThreshold(h), b);
  }
}

TEST(Otsu, UniformHistogramMatchesOracle) {
  ValueHistogram h{};
  h.fill(10);
  const int t = OtsuThreshold(h);
  EXPECT_TRUE(t == 127 || t == 128) << t;
  EXPECT_EQ(t, OtsuOracle(h));
}

TEST(Otsu, EmptyHistogramIsError) {
  ValueHistogram h{};
  EXPECT_THROW(OtsuThreshold(h), ValidationError);
}

TEST(Otsu, RandomHistogramsMatchOracle) {
  Gen g(3);
  for (int trial = 0; trial < 60; ++trial) {
    ValueHistogram h{};
    const int mode = trial % 3;
    for (int i = 0; i < 256; ++i) {
      if (mode == 0) h[i] = g.Next() % 1000;
      if (mode == 1) h[i] = g.Bool(0.05) ? g.Next() % 5000 + 1 : 0;
      if (mode == 2) h[i] = g.Bool(0.5) ? 7 : 0;
    }
    h[g.Int(0, 255)] += 1;
    ASSERT_EQ(OtsuThreshold(h), OtsuOracle(h)) << "trial " << trial;
  }
}

TEST(Otsu, IntegerOracleAgreesWithRationalOracle) {
  Gen g(4);
  for (int trial = 0; trial < 40; ++trial) {
    ValueHistogram h{};
    for (int i = 0; i < 256; ++i) h[i] = g.Bool(0.3) ? g.Next() % (trial % 2 ? 4 : 100000) : 0;
    h[g.Int(0, 127)] += 1;
    h[g.Int(128, 255)] += 1;
    ASSERT_EQ(testing::ExactOtsuOracle(h), OtsuOracle(h)) << "trial " << trial;
  }
}

TEST(Foreground, AllWhiteIsEmpty) {
  const Raster white = testing::Solid(300, 200, 255, 255, 255);
  const ForegroundMask m = ExtractForeground(white);
  for (auto v : m.data) EXPECT_EQ(v, 0);
  EXPECT_TRUE(m.degenerate);
}

TEST(Foreground, PinkBlockOnWhite) {
  Raster img = testing::Solid(400, 300, 255, 255, 255);
  for (int y = 50; y < 150; ++y) {
    for (int x = 120; x < 220; ++x) img.Set(x, y, 230, 150, 200);
  }
  const ForegroundMask m = ExtractForeground(img);
  EXPECT_FALSE(m.degenerate);
  for (int y = 0; y < 300; ++y) {
    for (int x = 0; x < 400; ++x) {
      ASSERT_EQ(m.At(x, y), x >= 120 && x < 220 && y >= 50 && y < 150);
    }
  }
}

TEST(Foreground, SingleColorIsDegenerate) {
  const ForegroundMask m = ExtractForeground(testing::Solid(64, 64, 120, 60, 90));
  EXPECT_TRUE(m.degenerate);
  for (auto v : m.data) EXPECT_EQ(v, 0);
}

TEST(Foreground, WorkerCountDoesNotMatter) {
  Gen g(5);
  Raster img(333, 257);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(g.Int(0, 255));
  const ForegroundMask a = ExtractForeground(img, 1);
  const ForegroundMask b = ExtractForeground(img, 7);
  EXPECT_EQ(a.data, b.data);
  EXPECT_EQ(a.threshold, b.threshold);
  EXPECT_EQ(ValueHistogramOf(img, 1), ValueHistogramOf(img, 5));
}

ForegroundMask FullMask(int w, int h, bool v = true) {
  ForegroundMask m;
  m.width = w;
  m.height = h;
  m.data.assign(static_cast<std::size_t>(w) * h, v ? 1 : 0);
  return m;
}

TEST(PlanGrid, FullMask448) {
  const GridPlan p = PlanGrid(FullMask(448, 448), nullptr);
  ASSERT_EQ(p.selected.size(), 4u);
  EXPECT_EQ(p.cells.size(), 4u);
  std::set<std::pair<int, int>> got;
  for (const auto& c : p.selected) got.insert({c.x, c.y});
  EXPECT_EQ(got, (std::set<std::pair<int, int>>{{0, 0}, {0, 224}, {224, 0}, {224, 224}}));
}

TEST(PlanGrid, CellInsideLabelPolygon) {
  LabelRaster l(448, 224, kUnlabeled);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) l.At(x, y) = 1;
  }
  const GridPlan p = PlanGrid(FullMask(448, 224), &l);
  ASSERT_EQ(p.selected.size(), 1u);
  EXPECT_EQ(p.selected[0], (GridCell{0, 0, 1}));
}

TEST(PlanGrid, HalfCoverageNotSelected) {
  LabelRaster l(224, 224, kUnlabeled);
  for (int y = 0; y < 112; ++y) {
    for (int x = 0; x < 224; ++x) l.At(x, y) = 1;
  }
  EXPECT_TRUE(PlanGrid(FullMask(224, 224), &l).selected.empty());
}

TEST(PlanGrid, ForegroundFraction) {
  ForegroundMask m = FullMask(224, 224, false);
  for (int i = 0; i < 224 * 112; ++i) m.data[i] = 1;
  EXPECT_EQ(PlanGrid(m, nullptr, {0.5, 0.7}).selected.size(), 1u);
  EXPECT_EQ(PlanGrid(m, nullptr, {0.51, 0.7}).selected.size(), 0u);
}

TEST(PlanGrid, PartialCellsAreNotOnGrid) {
  const GridPlan p = PlanGrid(FullMask(500, 230), nullptr);
  EXPECT_EQ(p.cells.size(), 2u);
  for (const auto& c : p.cells) {
    EXPECT_EQ(c.x % 224, 0);
    EXPECT_LE(c.x + 224, 500);
  }
}

TEST(PlanGrid, TiesGoToSmallerClass) {
  LabelRaster l(224, 224, kUnlabeled);
  for (int y = 0; y < 224; ++y) {
    for (int x = 0; x < 224; ++x) l.At(x, y) = x < 112 ? 2 : 4;
  }
  // Neither reaches 0.7; with a lower bar both tie at 0.5.
  const GridPlan p = PlanGrid(FullMask(224, 224), &l, {0.5, 0.5});
  ASSERT_EQ(p.selected.size(), 1u);
  EXPECT_EQ(p.selected[0].label, 2);
}

// Property: raising min_overlap never adds cells.
TEST(PlanGrid, MonotoneInOverlap) {
  Gen g(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int w = 224 * g.Int(1, 4), h = 224 * g.Int(1, 4);
    LabelRaster l(w, h, kUnlabeled);
    for (int k = 0; k < 6; ++k) {
      const int x0 = g.Int(0, w - 1), y0 = g.Int(0, h - 1);
      const int x1 = std::min(w, x0 + g.Int(50, 400)), y1 = std::min(h, y0 + g.Int(50, 400));
      const auto lab = static_cast<std::uint8_t>(g.Int(0, 5));
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) l.At(x, y) = lab;
      }
    }
    std::vector<std::pair<int, int>> prev;
    bool first = true;
    for (double ov = 0.0; ov <= 1.0; ov += 0.1) {
      const GridPlan p = PlanGrid(FullMask(w, h), &l, {0.5, ov});
      std::vector<std::pair<int, int>> cur;
      for (const auto& c : p.selected) cur.push_back({c.x, c.y});
      if (!first) {
        for (const auto& c : cur) {
          EXPECT_NE(std::find(prev.begin(), prev.end(), c), prev.end());
        }
      }
      prev = cur;
      first = false;
    }
  }
}

TEST(PlanGrid, RejectsBadFractions) {
  EXPECT_THROW(PlanGrid(FullMask(224, 224), nullptr, {1.5, 0.7}), ValidationError);
}

TEST(ExtractPatches, CoordinatesAndPixels) {
  Gen g(4);
  Raster img(448, 448);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(g.Int(0, 255));
  const GridPlan p = PlanGrid(FullMask(448, 448), nullptr);
  const auto patches = ExtractPatches(img, "s", p, 3);
  ASSERT_EQ(patches.size(), 4u);
  for (std::size_t i = 1; i < patches.size(); ++i) {
    EXPECT_LT(std::make_pair(patches[i - 1].y, patches[i - 1].x),
              std::make_pair(patches[i].y, patches[i].x));
  }
  for (const auto& pt : patches) {
    EXPECT_EQ(pt.pixels.width, 224);
    for (int y = 0; y < 224; y += 37) {
      for (int x = 0; x < 224; x += 41) {
        for (int c = 0; c < 3; ++c) {
          ASSERT_EQ(pt.pixels.Pixel(x, y)[c], img.Pixel(pt.x + x, pt.y + y)[c]);
        }
      }
    }
  }
  EXPECT_EQ(ExtractPatches(img, "s", p, 1), patches);
}

TEST(ExtractPatches, EmptyPlan) {
  EXPECT_TRUE(ExtractPatches(Raster(448, 448), "s", GridPlan{}).empty());
}

TEST(ExtractPatches, OutOfBoundsCell) {
  GridPlan p;
  p.selected.push_back({448, 0, std::nullopt});
  EXPECT_THROW(ExtractPatches(Raster(448, 448), "s", p), ValidationError);
}

TEST(GridPlanJson, RoundTrip) {
  GridPlan p;
  p.selected = {{0, 0, 1}, {224, 448, std::nullopt}};
  const nlohmann::json j = GridPlanToJson(p);
  EXPECT_EQ(j.at("stride"), 224);
  EXPECT_TRUE(j.at("cells")[1].at("label").is_null());
  const GridPlan back = GridPlanFromJson(j);
  EXPECT_EQ(back.selected, p.selected);
  nlohmann::json bad = j;
  bad["cells"][0]["x"] = 5;
  EXPECT_THROW(GridPlanFromJson(bad), ValidationError);
}

}  // namespace
}  // namespace slideqc
