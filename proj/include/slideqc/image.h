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

#ifndef SLIDEQC_IMAGE_H_
#define SLIDEQC_IMAGE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace slideqc {

inline constexpr int kPatchSize = 224;
inline constexpr int kNumClasses = 6;
inline constexpr int kNumArtifacts = 5;
inline constexpr std::uint8_t kUnlabeled = 255;

/// Class ids follow the released dataset ordering. In binary experts the
/// convention is different: index 0 = artifact, index 1 = artifact-free.
enum class ClassId : std::uint8_t {
  kArtifactFree = 0,
  kBlood = 1,
  kBlur = 2,
  kBubble = 3,
  kDamage = 4,
  kFold = 5,
};

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "artifact_free", "blood", "blur", "bubble", "damage", "fold"};

/// Returns -1 when `name` is not a class name.
int ClassIdFromName(std::string_view name);

/// 8-bit RGB image, row-major, interleaved.
struct Raster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  Raster() = default;
  Raster(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::size_t Offset(int x, int y) const {
    return (static_cast<std::size_t>(y) * width + x) * 3;
  }
  std::uint8_t* Pixel(int x, int y) { return data.data() + Offset(x, y); }
  const std::uint8_t* Pixel(int x, int y) const {
    return data.data() + Offset(x, y);
  }
  void Set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    std::uint8_t* p = Pixel(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  bool operator==(const Raster&) const = default;
};

/// Single-channel 8-bit plane. Used for per-pixel class labels (255 =
/// unlabeled) and for grayscale output images.
struct LabelRaster {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;

  LabelRaster() = default;
  LabelRaster(int w, int h, std::uint8_t fill = kUnlabeled)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& At(int x, int y) {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t At(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }

  bool operator==(const LabelRaster&) const = default;
};

/// rows x cols boolean grid stored as bytes (0/1).
struct BinaryMask {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int r, int c, bool fill = false)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill ? 1 : 0) {}

  bool At(int row, int col) const {
    return data[static_cast<std::size_t>(row) * cols + col] != 0;
  }
  void Set(int row, int col, bool v) {
    data[static_cast<std::size_t>(row) * cols + col] = v ? 1 : 0;
  }
  std::size_t Count() const;

  bool operator==(const BinaryMask&) const = default;
};

}  // namespace slideqc

#endif  // SLIDEQC_IMAGE_H_
