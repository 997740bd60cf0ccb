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

#include "slideqc/postprocess.h"

#include <algorithm>
#include <string>

#include "slideqc/errors.h"

namespace slideqc {

SegmentationMatrix EmptyMatrix(int slide_width, int slide_height) {
  if (slide_width < 1 || slide_height < 1) {
    throw ValidationError("segmentation matrix: slide dimensions must be >= 1");
  }
  return SegmentationMatrix((slide_height + kPatchSize - 1) / kPatchSize,
                            (slide_width + kPatchSize - 1) / kPatchSize);
}

SegmentationMatrix FillMatrix(std::span<const Decision> decisions,
                              int slide_width, int slide_height) {
  SegmentationMatrix m = EmptyMatrix(slide_width, slide_height);
  std::vector<std::uint8_t> seen(m.cells.size(), 0);
  for (const auto& d : decisions) {
    const std::string where = "(" + std::to_string(d.x) + "," + std::to_string(d.y) + ")";
    if (d.x < 0 || d.y < 0 || d.x % kPatchSize != 0 || d.y % kPatchSize != 0) {
      throw ValidationError("fill_matrix: off-grid coordinate " + where);
    }
    const int col = d.x / kPatchSize;
    const int row = d.y / kPatchSize;
    if (row >= m.rows || col >= m.cols) {
      throw ValidationError("fill_matrix: coordinate outside slide " + where);
    }
    if (d.label >= kNumClasses) {
      throw ValidationError("fill_matrix: invalid label at " + where);
    }
    const std::size_t idx = static_cast<std::size_t>(row) * m.cols + col;
    if (seen[idx]) throw ValidationError("fill_matrix: duplicate coordinate " + where);
    seen[idx] = 1;
    m.cells[idx] = d.label;
  }
  return m;
}

QcReport ArtifactReport(const SegmentationMatrix& m, double tau) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in [0, 1]");
  QcReport r;
  r.tau = tau;
  for (std::uint8_t v : m.cells) {
    if (v == kUnlabeled) continue;
    if (v >= kNumClasses) throw ValidationError("artifact_report: invalid cell value");
    ++r.n_per_class[v];
    ++r.n_total;
  }
  if (r.n_total == 0) throw ValidationError("artifact_report: no evaluated cells");
  const double total = static_cast<double>(r.n_total);
  for (int k = 1; k < kNumClasses; ++k) {
    r.per_class_pct[k - 1] = static_cast<double>(r.n_per_class[k]) / total * 100.0;
  }
  r.rho = static_cast<double>(r.n_per_class[0]) / total;
  r.accept = r.rho >= tau;
  return r;
}

nlohmann::json ReportToJson(const QcReport& r) {
  nlohmann::json pct = nlohmann::json::object();
  for (int k = 1; k < kNumClasses; ++k) {
    pct[std::string(kClassNames[k])] = r.per_class_pct[k - 1];
  }
  nlohmann::json counts = nlohmann::json::object();
  for (int k = 0; k < kNumClasses; ++k) {
    counts[std::string(kClassNames[k])] = r.n_per_class[k];
  }
  return {{"per_class_pct", std::move(pct)},
          {"rho", r.rho},
          {"tau", r.tau},
          {"verdict", r.accept ? "accept" : "discard"},
          {"n_total", r.n_total},
          {"n_per_class", std::move(counts)},
          {"throughput_pps", r.throughput_pps ? nlohmann::json(*r.throughput_pps)
                                              : nlohmann::json(nullptr)}};
}

BinaryMask BinarizeMask(const SegmentationMatrix& m) {
  BinaryMask out(m.rows, m.cols);
  for (std::size_t i = 0; i < m.cells.size(); ++i) out.data[i] = m.cells[i] == 0 ? 1 : 0;
  return out;
}

BinaryMask MorphClose(const BinaryMask& mask, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) {
    throw ValidationError("morph_close: kernel must be odd and >= 1");
  }
  const int r = kernel / 2;
  if (r == 0) return mask;
  // Dilate into a grid padded by r so erosion near the border sees the same
  // values it would on an unbounded background.
  const int prow = mask.rows + 2 * r;
  const int pcol = mask.cols + 2 * r;
  BinaryMask dilated(prow, pcol);
  for (int i = 0; i < prow; ++i) {
    for (int j = 0; j < pcol; ++j) {
      bool any = false;
      for (int di = -r; di <= r && !any; ++di) {
        const int si = i - r + di;
        if (si < 0 || si >= mask.rows) continue;
        for (int dj = -r; dj <= r; ++dj) {
          const int sj = j - r + dj;
          if (sj >= 0 && sj < mask.cols && mask.At(si, sj)) {
            any = true;
            break;
          }
        }
      }
      dilated.Set(i, j, any);
    }
  }
  BinaryMask out(mask.rows, mask.cols);
  for (int i = 0; i < mask.rows; ++i) {
    for (int j = 0; j < mask.cols; ++j) {
      bool all = true;
      for (int di = -r; di <= r && all; ++di) {
        for (int dj = -r; dj <= r; ++dj) {
          if (!dilated.At(i + r + di, j + r + dj)) {
            all = false;
            break;
          }
        }
      }
      out.Set(i, j, all);
    }
  }
  return out;
}

BinaryMask ResizeNearest(const BinaryMask& mask, int target_rows, int target_cols) {
  if (target_rows < 1 || target_cols < 1) {
    throw ValidationError("resize: target dimensions must be >= 1");
  }
  if (target_rows < mask.rows || target_cols < mask.cols) {
    throw ValidationError("resize: target must not be smaller than the mask");
  }
  BinaryMask out(target_rows, target_cols);
  std::vector<int> col_of(static_cast<std::size_t>(target_cols));
  for (int j = 0; j < target_cols; ++j) {
    col_of[j] = static_cast<int>(static_cast<long long>(j) * mask.cols / target_cols);
  }
  for (int i = 0; i < target_rows; ++i) {
    const int si = static_cast<int>(static_cast<long long>(i) * mask.rows / target_rows);
    for (int j = 0; j < target_cols; ++j) out.Set(i, j, mask.At(si, col_of[j]));
  }
  return out;
}

Raster ApplyMask(const Raster& slide, const BinaryMask& pixel_mask, FillMode fill) {
  if (pixel_mask.rows != slide.height || pixel_mask.cols != slide.width) {
    throw ValidationError("apply_mask: mask and slide dimensions differ");
  }
  Raster out = slide;
  const std::uint8_t value = fill == FillMode::kWhite ? 255 : 0;
  for (std::size_t i = 0; i < pixel_mask.data.size(); ++i) {
    if (pixel_mask.data[i]) continue;
    std::fill_n(out.data.begin() + static_cast<std::ptrdiff_t>(i * 3), 3, value);
  }
  return out;
}

Raster RenderSegmentation(const SegmentationMatrix& m, int scale) {
  if (scale < 1) throw ValidationError("render: scale must be >= 1");
  Raster out(m.cols * scale, m.rows * scale);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const std::uint8_t v = m.At(y / scale, x / scale);
      if (v < kNumClasses) {
        const auto& c = kPalette[v];
        out.Set(x, y, c[0], c[1], c[2]);
      } else {
        out.Set(x, y, 255, 255, 255);
      }
    }
  }
  return out;
}

LabelRaster MaskToImage(const BinaryMask& mask) {
  LabelRaster out(mask.cols, mask.rows, 0);
  for (std::size_t i = 0; i < mask.data.size(); ++i) out.data[i] = mask.data[i] ? 255 : 0;
  return out;
}

}  // namespace slideqc
