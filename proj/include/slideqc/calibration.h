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

#ifndef SLIDEQC_CALIBRATION_H_
#define SLIDEQC_CALIBRATION_H_

#include <span>
#include <vector>

#include "json.hpp"

namespace slideqc {

/// A validation score with its ground truth; positive = artifact-free.
struct ScoredExample {
  double score = 0;
  bool positive = false;
};

struct RocPoint {
  double fpr = 0;
  double tpr = 0;
  /// Rule: score >= threshold -> positive. The leading (0, 0) point carries
  /// +infinity.
  double threshold = 0;
};

struct RocCurve {
  /// Threshold-descending; starts at (0, 0) and ends at (1, 1).
  std::vector<RocPoint> points;
  double auc = 0;
};

/// One point per distinct score plus the (0, 0) origin; AUC by the
/// trapezoid rule. Throws ValidationError unless both classes are present.
RocCurve ComputeRoc(std::span<const ScoredExample> scores);

struct SensitivityThreshold {
  double t_s = 0;
  double tpr = 0;
  double fpr = 0;
  /// No threshold reached the target; t_s is the smallest score.
  bool saturated = false;
};

/// Largest threshold whose TPR reaches `target`, which keeps specificity as
/// high as the sensitivity constraint allows.
SensitivityThreshold ThresholdForSensitivity(const RocCurve& curve,
                                             double target = 0.98);

struct F1Threshold {
  double threshold = 0;
  double f1 = 0;
};

/// Distinct-score threshold maximizing positive-class F1; larger threshold
/// wins ties.
F1Threshold ThresholdMaxF1(std::span<const ScoredExample> scores);

struct CalibrationResult {
  double t_s = 0;
  double auc = 0;
  double target_sensitivity = 0.98;
  double achieved_tpr = 0;
  double achieved_fpr = 0;
};

CalibrationResult Calibrate(std::span<const ScoredExample> scores,
                            double target_sensitivity = 0.98);

nlohmann::json CalibrationToJson(const CalibrationResult& c);
CalibrationResult CalibrationFromJson(const nlohmann::json& j);

}  // namespace slideqc

#endif  // SLIDEQC_CALIBRATION_H_
