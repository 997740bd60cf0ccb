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

#ifndef SLIDEQC_FEATURES_H_
#define SLIDEQC_FEATURES_H_

#include <array>

#include "slideqc/image.h"

namespace slideqc {

inline constexpr int kFeatureDim = 16;
inline constexpr int kFeatureVersion = 1;

/// Hand-crafted patch embedding. Layout:
///   [0..2]  mean of standardized R, G, B
///   [3..5]  std of standardized R, G, B
///   [6..7]  mean, std of hue / 360
///   [8..9]  mean, std of saturation
///   [10..11] mean, std of value
///   [12]    variance of the 4-neighbour Laplacian of luma in [0, 1]
///   [13]    fraction of pixels whose luma gradient magnitude exceeds
///           FeatureConfig::edge_threshold
///   [14]    fraction of near-red pixels
///   [15]    fraction of near-white pixels
using FeatureVector = std::array<double, kFeatureDim>;

struct FeatureConfig {
  // Per-channel standardization applied as (pixel / 255 - mean) / std.
  std::array<double, 3> channel_mean = {0.485, 0.456, 0.406};
  std::array<double, 3> channel_std = {0.229, 0.224, 0.225};
  double edge_threshold = 0.1;
  double red_hue_window_deg = 20.0;
  double red_min_saturation = 0.5;
  double red_min_value = 0.2;
  double white_max_saturation = 0.15;
  double white_min_value = 0.85;

  /// Identity standardization: channel statistics on pixel / 255.
  static FeatureConfig Raw() {
    FeatureConfig c;
    c.channel_mean = {0, 0, 0};
    c.channel_std = {1, 1, 1};
    return c;
  }
};

/// Deterministic; accepts any non-empty RGB raster (patches are 224x224).
FeatureVector ExtractFeatures(const Raster& patch,
                              const FeatureConfig& config = {});

}  // namespace slideqc

#endif  // SLIDEQC_FEATURES_H_
