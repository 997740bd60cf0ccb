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

#ifndef SLIDEQC_TILER_H_
#define SLIDEQC_TILER_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "slideqc/image.h"
#include "slideqc/wsi_store.h"

namespace slideqc {

struct Hsv {
  double h = 0;  // degrees, [0, 360)
  double s = 0;  // [0, 1]
  double v = 0;  // [0, 1]
};

/// Hexcone RGB -> HSV. Hue is 0 for achromatic colors.
Hsv RgbToHsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);

using ValueHistogram = std::array<std::uint64_t, 256>;

/// Otsu threshold over a 256-bin histogram. Bins below t form the dark class
/// and bins >= t the bright class. Returns the t in 1..255 that maximizes the
/// between-class variance, smallest t on ties. A histogram with a single
/// occupied bin b yields t = b. Throws ValidationError on an all-zero
/// histogram.
int OtsuThreshold(const ValueHistogram& histogram);

struct ForegroundMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // 1 = tissue
  int threshold = 0;
  /// Set when the slide's value channel has a single level, in which case
  /// the mask is empty.
  bool degenerate = false;

  bool At(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x] != 0;
  }
};

/// Value-channel histogram, value = max(r, g, b).
ValueHistogram ValueHistogramOf(const Raster& slide, int workers = 1);

/// Tissue is darker than the white background: a pixel is foreground iff its
/// value channel is below the slide's Otsu threshold.
ForegroundMask ExtractForeground(const Raster& slide, int workers = 1);

struct GridCell {
  int x = 0;
  int y = 0;
  std::optional<std::uint8_t> label;

  bool operator==(const GridCell&) const = default;
};

struct GridPlan {
  int stride = kPatchSize;
  /// All full 224x224 cells inside the slide, (y, x) order.
  std::vector<GridCell> cells;
  /// Cells that passed the foreground and annotation-overlap filters.
  std::vector<GridCell> selected;
};

struct GridOptions {
  double min_fg_fraction = 0.5;
  double min_overlap = 0.70;
};

/// Lays a non-overlapping 224-stride grid over the mask. A cell is selected
/// when its foreground fraction reaches min_fg_fraction and, if `labels` is
/// given, some class covers at least min_overlap of it; the cell takes the
/// best-covered such class (smaller id on ties).
GridPlan PlanGrid(const ForegroundMask& mask, const LabelRaster* labels,
                  const GridOptions& options = {});

/// Copies the selected cells out of the slide in (y, x) order.
std::vector<PatchRecord> ExtractPatches(const Raster& slide,
                                        const std::string& slide_id,
                                        const GridPlan& plan, int workers = 1);

/// Crops one 224x224 tile; throws ValidationError when out of bounds.
Raster CropPatch(const Raster& slide, int x, int y);

nlohmann::json GridPlanToJson(const GridPlan& plan);
GridPlan GridPlanFromJson(const nlohmann::json& j);

}  // namespace slideqc

#endif  // SLIDEQC_TILER_H_
