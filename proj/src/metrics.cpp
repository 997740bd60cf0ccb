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

#include "slideqc/metrics.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "slideqc/errors.h"
#include "slideqc/tiler.h"

namespace slideqc {

ConfusionCounts CountConfusion(std::span<const bool> predicted_positive,
                               std::span<const bool> truth_positive) {
  if (predicted_positive.size() != truth_positive.size()) {
    throw ValidationError("confusion: prediction and truth lengths differ");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth_positive.size(); ++i) {
    if (truth_positive[i]) {
      ++(predicted_positive[i] ? c.tp : c.fn);
    } else {
      ++(predicted_positive[i] ? c.fp : c.tn);
    }
  }
  return c;
}

namespace {

std::optional<double> Ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

ClassificationMetrics ComputeClassificationMetrics(const ConfusionCounts& c) {
  ClassificationMetrics m;
  m.accuracy = Ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
  m.sensitivity = Ratio(c.tp, c.tp + c.fn);
  m.specificity = Ratio(c.tn, c.tn + c.fp);
  m.precision = Ratio(c.tp, c.tp + c.fp);
  m.f1 = Ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn);
  return m;
}

nlohmann::json MetricsToJson(const ClassificationMetrics& m) {
  return {{"accuracy", OptionalJson(m.accuracy)},
          {"sensitivity", OptionalJson(m.sensitivity)},
          {"specificity", OptionalJson(m.specificity)},
          {"precision", OptionalJson(m.precision)},
          {"f1", OptionalJson(m.f1)}};
}

double Dice(const BinaryMask& a, const BinaryMask& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ValidationError("dice: mask dimensions differ");
  }
  std::size_t inter = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool x = a.data[i] != 0;
    const bool y = b.data[i] != 0;
    na += x;
    nb += y;
    inter += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

double CohenKappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ValidationError("kappa: label lists differ in length");
  if (a.empty()) throw ValidationError("kappa: label lists are empty");
  std::map<int, std::int64_t> count_a, count_b;
  std::int64_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++count_a[a[i]];
    ++count_b[b[i]];
    agree += a[i] == b[i] ? 1 : 0;
  }
  // kappa = (p_o - p_e) / (1 - p_e) scaled by n^2 into integers.
  const auto n = static_cast<std::int64_t>(a.size());
  std::int64_t chance = 0;
  for (const auto& [label, ca] : count_a) {
    const auto it = count_b.find(label);
    if (it != count_b.end()) chance += ca * it->second;
  }
  const std::int64_t den = n * n - chance;
  if (den == 0) return 1.0;
  return static_cast<double>(agree * n - chance) / static_cast<double>(den);
}

ComplexityProfile ThroughputBench(
    const std::function<void(std::span<const PatchRecord>)>& pipeline,
    const ModelComplexity& complexity, std::span<const PatchRecord> patches,
    int repeats) {
  if (patches.empty()) throw ValidationError("bench: no patches");
  if (repeats < 1) throw ValidationError("bench: repeats must be >= 1");
  using Clock = std::chrono::steady_clock;
  pipeline(patches);
  ComplexityProfile out;
  out.param_count = complexity.param_count;
  out.flop_count = complexity.flop_count;
  std::vector<double> rates;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    pipeline(patches);
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    out.timings_s.push_back(secs);
    rates.push_back(static_cast<double>(patches.size()) / std::max(secs, 1e-9));
  }
  std::sort(rates.begin(), rates.end());
  const std::size_t mid = rates.size() / 2;
  out.throughput_pps =
      rates.size() % 2 == 1 ? rates[mid] : 0.5 * (rates[mid - 1] + rates[mid]);
  return out;
}

ComplexityProfile ThroughputBench(const Expert& expert,
                                  std::span<const PatchRecord> patches, int repeats) {
  return ThroughputBench(
      [&expert](std::span<const PatchRecord> ps) {
        for (const auto& p : ps) (void)expert.Predict(p);
      },
      expert.Complexity(), patches, repeats);
}

HsSummary HsStats(std::span<const PatchRecord> patches) {
  HsSummary out;
  for (const auto& p : patches) {
    const Raster& px = p.pixels;
    const std::size_t n = static_cast<std::size_t>(px.width) * px.height;
    double hue = 0, sat = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Hsv hsv = RgbToHsv(px.data[3 * i], px.data[3 * i + 1], px.data[3 * i + 2]);
      hue += hsv.h;
      sat += hsv.s;
    }
    out.per_patch.push_back({n ? hue / n : 0.0, n ? sat / n : 0.0});
  }
  if (out.per_patch.empty()) return out;
  const double m = static_cast<double>(out.per_patch.size());
  for (const auto& hs : out.per_patch) {
    out.hue_mean += hs.mean_hue / m;
    out.saturation_mean += hs.mean_saturation / m;
  }
  double vh = 0, vs = 0;
  for (const auto& hs : out.per_patch) {
    vh += (hs.mean_hue - out.hue_mean) * (hs.mean_hue - out.hue_mean);
    vs += (hs.mean_saturation - out.saturation_mean) *
          (hs.mean_saturation - out.saturation_mean);
  }
  out.hue_std = std::sqrt(vh / m);
  out.saturation_std = std::sqrt(vs / m);
  return out;
}

}  // namespace slideqc
