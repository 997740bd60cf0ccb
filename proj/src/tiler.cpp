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

#include "slideqc/tiler.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "slideqc/errors.h"
#include "slideqc/parallel.h"

namespace slideqc {

Hsv RgbToHsv(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const int maxc = std::max({r, g, b});
  const int minc = std::min({r, g, b});
  const int delta = maxc - minc;
  Hsv out;
  out.v = maxc / 255.0;
  if (maxc == 0 || delta == 0) return out;
  out.s = static_cast<double>(delta) / maxc;
  double h;
  if (maxc == r) {
    h = 60.0 * static_cast<double>(g - b) / delta;
  } else if (maxc == g) {
    h = 60.0 * (2.0 + static_cast<double>(b - r) / delta);
  } else {
    h = 60.0 * (4.0 + static_cast<double>(r - g) / delta);
  }
  if (h < 0) h += 360.0;
  out.h = h;
  return out;
}

int OtsuThreshold(const ValueHistogram& histogram) {
  std::uint64_t total = 0;
  std::uint64_t weighted = 0;
  int occupied = 0;
  int last_bin = 0;
  for (int i = 0; i < 256; ++i) {
    total += histogram[i];
    weighted += histogram[i] * static_cast<std::uint64_t>(i);
    if (histogram[i] != 0) {
      ++occupied;
      last_bin = i;
    }
  }
  if (total == 0) throw ValidationError("otsu: histogram is empty");
  if (occupied == 1) return last_bin;

  // Between-class variance is proportional to (n0*s1 - n1*s0)^2 / (n0*n1).
  // Candidates are ranked in long double; near-ties are settled exactly.
  using boost::multiprecision::cpp_int;
  int best_t = 0;
  long double best = -1.0L;
  __int128 best_diff = 0;
  std::uint64_t best_n0 = 0, best_n1 = 0;
  std::uint64_t n0 = 0;
  std::uint64_t s0 = 0;
  for (int t = 1; t < 256; ++t) {
    n0 += histogram[t - 1];
    s0 += histogram[t - 1] * static_cast<std::uint64_t>(t - 1);
    const std::uint64_t n1 = total - n0;
    if (n0 == 0 || n1 == 0) continue;
    const std::uint64_t s1 = weighted - s0;
    const __int128 diff = static_cast<__int128>(n0) * s1 -
                          static_cast<__int128>(n1) * s0;
    const long double d = static_cast<long double>(diff);
    const long double score =
        d * d / (static_cast<long double>(n0) * static_cast<long double>(n1));
    bool better = score > best;
    if (best >= 0 && std::fabs(score - best) <= 1e-12L * best) {
      auto big = [](__int128 v) {
        const bool neg = v < 0;
        const unsigned __int128 m = neg ? -static_cast<unsigned __int128>(v)
                                        : static_cast<unsigned __int128>(v);
        cpp_int r = static_cast<std::uint64_t>(m >> 64);
        r <<= 64;
        r += static_cast<std::uint64_t>(m);
        return r;
      };
      const cpp_int a = big(diff), b = big(best_diff);
      better = a * a * cpp_int(best_n0) * cpp_int(best_n1) >
               b * b * cpp_int(n0) * cpp_int(n1);
    }
    if (better) {
      best = score;
      best_t = t;
      best_diff = diff;
      best_n0 = n0;
      best_n1 = n1;
    }
  }
  return best_t;
}

ValueHistogram ValueHistogramOf(const Raster& slide, int workers) {
  const std::size_t rows = static_cast<std::size_t>(slide.height);
  std::vector<ValueHistogram> per_row(rows, ValueHistogram{});
  ParallelFor(rows, workers, [&](std::size_t y) {
    ValueHistogram& h = per_row[y];
    const std::uint8_t* p = slide.Pixel(0, static_cast<int>(y));
    for (int x = 0; x < slide.width; ++x, p += 3) {
      ++h[std::max({p[0], p[1], p[2]})];
    }
  });
  ValueHistogram total{};
  for (const auto& h : per_row) {
    for (int i = 0; i < 256; ++i) total[i] += h[i];
  }
  return total;
}

ForegroundMask ExtractForeground(const Raster& slide, int workers) {
  ForegroundMask mask;
  mask.width = slide.width;
  mask.height = slide.height;
  mask.data.assign(static_cast<std::size_t>(slide.width) * slide.height, 0);
  if (slide.width == 0 || slide.height == 0) {
    mask.degenerate = true;
    return mask;
  }
  const ValueHistogram hist = ValueHistogramOf(slide, workers);
  const int occupied = static_cast<int>(
      std::count_if(hist.begin(), hist.end(), [](std::uint64_t c) { return c != 0; }));
  mask.threshold = OtsuThreshold(hist);
  if (occupied == 1) {
    mask.degenerate = true;
    return mask;
  }
  const int t = mask.threshold;
  ParallelFor(static_cast<std::size_t>(slide.height), workers, [&](std::size_t y) {
    const std::uint8_t* p = slide.Pixel(0, static_cast<int>(y));
    std::uint8_t* out = mask.data.data() + y * slide.width;
    for (int x = 0; x < slide.width; ++x, p += 3) {
      out[x] = std::max({p[0], p[1], p[2]}) < t ? 1 : 0;
    }
  });
  return mask;
}

GridPlan PlanGrid(const ForegroundMask& mask, const LabelRaster* labels,
                  const GridOptions& options) {
  if (options.min_fg_fraction < 0 || options.min_fg_fraction > 1 ||
      options.min_overlap < 0 || options.min_overlap > 1) {
    throw ValidationError("plan_grid: fractions must lie in [0, 1]");
  }
  if (labels != nullptr &&
      (labels->width != mask.width || labels->height != mask.height)) {
    throw ValidationError("plan_grid: label raster does not match the mask");
  }
  constexpr double kArea = static_cast<double>(kPatchSize) * kPatchSize;
  GridPlan plan;
  for (int y = 0; y + kPatchSize <= mask.height; y += kPatchSize) {
    for (int x = 0; x + kPatchSize <= mask.width; x += kPatchSize) {
      GridCell cell{x, y, std::nullopt};
      plan.cells.push_back(cell);

      std::size_t fg = 0;
      std::array<std::size_t, kNumClasses> cover{};
      for (int yy = y; yy < y + kPatchSize; ++yy) {
        for (int xx = x; xx < x + kPatchSize; ++xx) {
          fg += mask.At(xx, yy) ? 1 : 0;
          if (labels != nullptr) {
            const std::uint8_t l = labels->At(xx, yy);
            if (l < kNumClasses) ++cover[l];
          }
        }
      }
      if (fg / kArea < options.min_fg_fraction) continue;
      if (labels != nullptr) {
        int best = -1;
        for (int k = 0; k < kNumClasses; ++k) {
          if (cover[k] / kArea < options.min_overlap) continue;
          if (best < 0 || cover[k] > cover[best]) best = k;
        }
        if (best < 0) continue;
        cell.label = static_cast<std::uint8_t>(best);
      }
      plan.selected.push_back(cell);
    }
  }
  return plan;
}

Raster CropPatch(const Raster& slide, int x, int y) {
  if (x < 0 || y < 0 || x + kPatchSize > slide.width ||
      y + kPatchSize > slide.height) {
    throw ValidationError("patch (" + std::to_string(x) + "," +
                          std::to_string(y) + ") lies outside the slide");
  }
  Raster out(kPatchSize, kPatchSize);
  const std::size_t row_bytes = static_cast<std::size_t>(kPatchSize) * 3;
  for (int r = 0; r < kPatchSize; ++r) {
    std::copy_n(slide.Pixel(x, y + r), row_bytes, out.Pixel(0, r));
  }
  return out;
}

std::vector<PatchRecord> ExtractPatches(const Raster& slide,
                                        const std::string& slide_id,
                                        const GridPlan& plan, int workers) {
  std::vector<GridCell> cells = plan.selected;
  std::sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  std::vector<PatchRecord> out(cells.size());
  ParallelFor(cells.size(), workers, [&](std::size_t i) {
    PatchRecord& p = out[i];
    p.slide_id = slide_id;
    p.x = cells[i].x;
    p.y = cells[i].y;
    p.label = cells[i].label;
    p.pixels = CropPatch(slide, p.x, p.y);
  });
  return out;
}

nlohmann::json GridPlanToJson(const GridPlan& plan) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : plan.selected) {
    cells.push_back({{"x", c.x},
                     {"y", c.y},
                     {"label", c.label ? nlohmann::json(*c.label)
                                       : nlohmann::json(nullptr)}});
  }
  return {{"stride", plan.stride}, {"cells", std::move(cells)}};
}

GridPlan GridPlanFromJson(const nlohmann::json& j) {
  GridPlan plan;
  try {
    plan.stride = j.at("stride").get<int>();
    for (const auto& c : j.at("cells")) {
      GridCell cell{c.at("x").get<int>(), c.at("y").get<int>(), std::nullopt};
      if (c.contains("label") && !c.at("label").is_null()) {
        cell.label = c.at("label").get<std::uint8_t>();
      }
      plan.selected.push_back(cell);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("grid plan: ") + e.what());
  }
  if (plan.stride != kPatchSize) {
    throw ValidationError("grid plan: stride must be 224");
  }
  for (const auto& c : plan.selected) {
    if (c.x % kPatchSize != 0 || c.y % kPatchSize != 0) {
      throw ValidationError("grid plan: cell off the 224 grid");
    }
  }
  plan.cells = plan.selected;
  return plan;
}

}  // namespace slideqc
