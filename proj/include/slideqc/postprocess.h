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

#ifndef SLIDEQC_POSTPROCESS_H_
#define SLIDEQC_POSTPROCESS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "slideqc/image.h"
#include "slideqc/moe.h"

namespace slideqc {

/// Stride-resolution class grid: one cell per 224x224 slide tile, 255 where
/// no decision was made (background or partial edge tiles).
struct SegmentationMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> cells;

  SegmentationMatrix() = default;
  SegmentationMatrix(int r, int c)
      : rows(r), cols(c), cells(static_cast<std::size_t>(r) * c, kUnlabeled) {}

  std::uint8_t& At(int row, int col) {
    return cells[static_cast<std::size_t>(row) * cols + col];
  }
  std::uint8_t At(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * cols + col];
  }
  bool operator==(const SegmentationMatrix&) const = default;
};

/// Grid shape for a slide: ceil(height / 224) rows, ceil(width / 224) cols.
SegmentationMatrix EmptyMatrix(int slide_width, int slide_height);

/// Writes each decision's label into cell (y / 224, x / 224). Throws
/// ValidationError for off-grid, out-of-range or duplicate coordinates.
SegmentationMatrix FillMatrix(std::span<const Decision> decisions,
                              int slide_width, int slide_height);

struct QcReport {
  /// Percent of evaluated cells per artifact class, blood..fold.
  std::array<double, kNumArtifacts> per_class_pct{};
  double rho = 0;
  double tau = 0.5;
  bool accept = false;
  std::size_t n_total = 0;
  std::array<std::size_t, kNumClasses> n_per_class{};
  /// Omitted from deterministic outputs unless explicitly recorded.
  std::optional<double> throughput_pps;
};

/// Counts over non-255 cells. Throws ValidationError when none are
/// evaluated.
QcReport ArtifactReport(const SegmentationMatrix& m, double tau);

nlohmann::json ReportToJson(const QcReport& r);

/// true for artifact-free cells; artifact and background cells are false.
BinaryMask BinarizeMask(const SegmentationMatrix& m);

/// Dilation followed by erosion with a kernel x kernel square. The input is
/// treated as false outside its bounds, so the result equals closing on an
/// unbounded false background restricted to the grid. Kernel must be odd.
BinaryMask MorphClose(const BinaryMask& mask, int kernel = 3);

/// Nearest-neighbour upscale: target pixel (i, j) reads cell
/// (floor(i * rows / target_rows), floor(j * cols / target_cols)).
BinaryMask ResizeNearest(const BinaryMask& mask, int target_rows, int target_cols);

enum class FillMode { kZero, kWhite };

/// Elementwise product of the slide with a pixel mask (rows = height,
/// cols = width). Masked-out pixels become 0, or 255 with FillMode::kWhite.
Raster ApplyMask(const Raster& slide, const BinaryMask& pixel_mask,
                 FillMode fill = FillMode::kZero);

/// Fixed palette; `scale` pixels per cell side.
Raster RenderSegmentation(const SegmentationMatrix& m, int scale = 1);

inline constexpr std::array<std::array<std::uint8_t, 3>, kNumClasses> kPalette = {{
    {0, 255, 0},    // artifact_free: green
    {255, 0, 0},    // blood: red
    {0, 0, 255},    // blur: blue
    {255, 255, 0},  // bubble: yellow
    {255, 0, 255},  // damage: magenta
    {0, 255, 255},  // fold: cyan
}};

/// 0/255 grayscale image of a mask.
LabelRaster MaskToImage(const BinaryMask& mask);

}  // namespace slideqc

#endif  // SLIDEQC_POSTPROCESS_H_
