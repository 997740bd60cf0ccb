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

#include "slideqc/features.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "slideqc/errors.h"
#include "slideqc/tiler.h"

namespace slideqc {
namespace {

// Welford accumulator; constant input yields exactly zero spread.
struct Moments {
  double count = 0;
  double mean = 0;
  double m2 = 0;
  void Add(double v) {
    count += 1;
    const double delta = v - mean;
    mean += delta / count;
    m2 += delta * (v - mean);
  }
  double Mean() const { return mean; }
  double Variance() const { return count > 0 ? m2 / count : 0.0; }
  double Std() const { return std::sqrt(std::max(0.0, Variance())); }
};

}  // namespace

FeatureVector ExtractFeatures(const Raster& patch, const FeatureConfig& config) {
  const int w = patch.width;
  const int h = patch.height;
  if (w < 1 || h < 1) throw ValidationError("features: empty patch");
  const double n = static_cast<double>(w) * h;

  std::array<Moments, 3> rgb;
  Moments hue, sat, val;
  std::size_t red = 0, white = 0;
  std::vector<double> luma(static_cast<std::size_t>(w) * h);

  for (int y = 0; y < h; ++y) {
    const std::uint8_t* p = patch.Pixel(0, y);
    for (int x = 0; x < w; ++x, p += 3) {
      for (int c = 0; c < 3; ++c) {
        rgb[c].Add((p[c] / 255.0 - config.channel_mean[c]) / config.channel_std[c]);
      }
      const Hsv hsv = RgbToHsv(p[0], p[1], p[2]);
      hue.Add(hsv.h / 360.0);
      sat.Add(hsv.s);
      val.Add(hsv.v);
      const bool red_hue = hsv.h <= config.red_hue_window_deg ||
                           hsv.h >= 360.0 - config.red_hue_window_deg;
      if (red_hue && hsv.s >= config.red_min_saturation &&
          hsv.v >= config.red_min_value) {
        ++red;
      }
      if (hsv.s <= config.white_max_saturation && hsv.v >= config.white_min_value) {
        ++white;
      }
      luma[static_cast<std::size_t>(y) * w + x] =
          (0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2]) / 255.0;
    }
  }

  // Interior-only stencils; a patch narrower than 3 px has no interior.
  Moments lap;
  std::size_t edges = 0;
  double interior = 0;
  auto L = [&](int x, int y) { return luma[static_cast<std::size_t>(y) * w + x]; };
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const double c = L(x, y);
      lap.Add(L(x - 1, y) + L(x + 1, y) + L(x, y - 1) + L(x, y + 1) - 4 * c);
      const double gx = 0.5 * (L(x + 1, y) - L(x - 1, y));
      const double gy = 0.5 * (L(x, y + 1) - L(x, y - 1));
      if (std::sqrt(gx * gx + gy * gy) > config.edge_threshold) ++edges;
      interior += 1;
    }
  }

  FeatureVector f{};
  for (int c = 0; c < 3; ++c) {
    f[c] = rgb[c].Mean();
    f[3 + c] = rgb[c].Std();
  }
  f[6] = hue.Mean();
  f[7] = hue.Std();
  f[8] = sat.Mean();
  f[9] = sat.Std();
  f[10] = val.Mean();
  f[11] = val.Std();
  if (interior > 0) {
    f[12] = lap.Variance();
    f[13] = edges / interior;
  }
  f[14] = red / n;
  f[15] = white / n;
  return f;
}

}  // namespace slideqc
