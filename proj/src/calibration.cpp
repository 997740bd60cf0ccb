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

#include "slideqc/calibration.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "slideqc/errors.h"

namespace slideqc {
namespace {

struct ScoreGroup {
  double score;
  std::size_t pos;
  std::size_t neg;
};

// Distinct scores, descending, with per-score class counts.
std::vector<ScoreGroup> GroupScores(std::span<const ScoredExample> scores,
                                    std::size_t* total_pos, std::size_t* total_neg) {
  std::vector<ScoredExample> sorted(scores.begin(), scores.end());
  for (const auto& s : sorted) {
    if (!std::isfinite(s.score)) throw ValidationError("roc: non-finite score");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const ScoredExample& a, const ScoredExample& b) { return a.score > b.score; });
  std::vector<ScoreGroup> groups;
  *total_pos = 0;
  *total_neg = 0;
  for (const auto& s : sorted) {
    if (groups.empty() || groups.back().score != s.score) groups.push_back({s.score, 0, 0});
    if (s.positive) {
      ++groups.back().pos;
      ++*total_pos;
    } else {
      ++groups.back().neg;
      ++*total_neg;
    }
  }
  if (*total_pos == 0 || *total_neg == 0) {
    throw ValidationError("roc: scores must contain both classes");
  }
  return groups;
}

}  // namespace

RocCurve ComputeRoc(std::span<const ScoredExample> scores) {
  std::size_t P = 0, N = 0;
  const std::vector<ScoreGroup> groups = GroupScores(scores, &P, &N);
  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    fp += g.neg;
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(N),
                            static_cast<double>(tp) / static_cast<double>(P), g.score});
  }
  double auc = 0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const RocPoint& a = curve.points[i - 1];
    const RocPoint& b = curve.points[i];
    auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
  }
  curve.auc = auc;
  return curve;
}

SensitivityThreshold ThresholdForSensitivity(const RocCurve& curve, double target) {
  if (!(target > 0.0 && target <= 1.0)) {
    throw ValidationError("target sensitivity must lie in (0, 1]");
  }
  const RocPoint* last = nullptr;
  for (const auto& p : curve.points) {
    if (!std::isfinite(p.threshold)) continue;
    last = &p;
    if (p.tpr >= target) return {p.threshold, p.tpr, p.fpr, false};
  }
  if (last == nullptr) throw ValidationError("roc curve has no thresholds");
  return {last->threshold, last->tpr, last->fpr, true};
}

F1Threshold ThresholdMaxF1(std::span<const ScoredExample> scores) {
  std::size_t P = 0, N = 0;
  const std::vector<ScoreGroup> groups = GroupScores(scores, &P, &N);
  F1Threshold best{groups.front().score, -1.0};
  std::size_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    fp += g.neg;
    const std::size_t fn = P - tp;
    const double f1 = 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    // Descending walk: a later equal F1 has a smaller threshold and loses.
    if (f1 > best.f1) best = {g.score, f1};
  }
  return best;
}

CalibrationResult Calibrate(std::span<const ScoredExample> scores,
                            double target_sensitivity) {
  const RocCurve curve = ComputeRoc(scores);
  const SensitivityThreshold t = ThresholdForSensitivity(curve, target_sensitivity);
  CalibrationResult out;
  out.t_s = t.t_s;
  out.auc = curve.auc;
  out.target_sensitivity = target_sensitivity;
  out.achieved_tpr = t.tpr;
  out.achieved_fpr = t.fpr;
  return out;
}

nlohmann::json CalibrationToJson(const CalibrationResult& c) {
  return {{"t_s", c.t_s},
          {"auc", c.auc},
          {"target_sensitivity", c.target_sensitivity},
          {"achieved_tpr", c.achieved_tpr},
          {"achieved_fpr", c.achieved_fpr}};
}

CalibrationResult CalibrationFromJson(const nlohmann::json& j) {
  CalibrationResult c;
  try {
    c.t_s = j.at("t_s").get<double>();
    c.auc = j.at("auc").get<double>();
    c.target_sensitivity = j.at("target_sensitivity").get<double>();
    c.achieved_tpr = j.at("achieved_tpr").get<double>();
    c.achieved_fpr = j.at("achieved_fpr").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("calibration: ") + e.what());
  }
  if (!(c.t_s >= 0.0 && c.t_s <= 1.0)) {
    throw ValidationError("calibration: t_s must lie in [0, 1]");
  }
  return c;
}

}  // namespace slideqc
