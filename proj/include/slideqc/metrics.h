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

#ifndef SLIDEQC_METRICS_H_
#define SLIDEQC_METRICS_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"
#include "slideqc/experts.h"
#include "slideqc/image.h"

namespace slideqc {

/// Positive class = artifact-free.
struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fn = 0;

  bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts CountConfusion(std::span<const bool> predicted_positive,
                               std::span<const bool> truth_positive);

/// Ratios with a zero denominator are left empty rather than reported as 0.
struct ClassificationMetrics {
  std::optional<double> accuracy;
  std::optional<double> sensitivity;  // recall, TP / (TP + FN)
  std::optional<double> specificity;  // TN / (TN + FP)
  std::optional<double> precision;    // TP / (TP + FP)
  std::optional<double> f1;
};

ClassificationMetrics ComputeClassificationMetrics(const ConfusionCounts& c);
nlohmann::json MetricsToJson(const ClassificationMetrics& m);

/// 2|a & b| / (|a| + |b|); 1 when both masks are empty.
double Dice(const BinaryMask& a, const BinaryMask& b);

/// Cohen's kappa for two raters over equal-length categorical labels.
/// Evaluated from integer counts, so relabeling categories cannot change the
/// result. Returns 1 when both raters use one identical category throughout.
double CohenKappa(std::span<const int> a, std::span<const int> b);

struct ComplexityProfile {
  std::uint64_t param_count = 0;
  std::uint64_t flop_count = 0;
  double throughput_pps = 0;
  /// Wall-clock seconds per timed repeat (warm-up excluded).
  std::vector<double> timings_s;
};

/// Runs `pipeline` once as warm-up and then `repeats` timed passes over the
/// patches; reports the median patches/second. Must not run concurrently
/// with another benchmark in the same process.
ComplexityProfile ThroughputBench(
    const std::function<void(std::span<const PatchRecord>)>& pipeline,
    const ModelComplexity& complexity, std::span<const PatchRecord> patches,
    int repeats);

ComplexityProfile ThroughputBench(const Expert& expert,
                                  std::span<const PatchRecord> patches, int repeats);

struct HueSaturation {
  double mean_hue = 0;  // degrees
  double mean_saturation = 0;
};

struct HsSummary {
  std::vector<HueSaturation> per_patch;
  double hue_mean = 0;
  double hue_std = 0;
  double saturation_mean = 0;
  double saturation_std = 0;
};

/// Per-patch HSV means and the cohort mean/std of each axis.
HsSummary HsStats(std::span<const PatchRecord> patches);

}  // namespace slideqc

#endif  // SLIDEQC_METRICS_H_
