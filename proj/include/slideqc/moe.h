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

#ifndef SLIDEQC_MOE_H_
#define SLIDEQC_MOE_H_

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slideqc/experts.h"

namespace slideqc {

/// Expert slots in artifact-id order: blood, blur, bubble, damage, fold.
inline constexpr std::array<std::string_view, kNumArtifacts> kExpertTasks = {
    "blood", "blur", "bubble", "damage", "fold"};

struct FusedPrediction {
  double p_artifact_free = 1.0;
  double p_artifact = 0.0;
  std::array<double, kNumArtifacts> per_expert_artifact_probs{};
  std::optional<std::uint8_t> label;
};

/// Max-fusion of five binary experts: p_artifact is the largest index-0
/// probability, p_artifact_free = 1 - p_artifact.
FusedPrediction Fuse(std::span<const ProbVector> expert_probs);

/// 0 when p_artifact_free >= t_s, otherwise 1 + the expert with the highest
/// artifact probability (lowest index on ties).
std::uint8_t DecideMoe(const FusedPrediction& fused, double t_s);

/// 0 when probs[0] >= t_s, otherwise the most probable artifact class
/// (lowest id on ties).
std::uint8_t DecideMulticlass(const ProbVector& probs, double t_s);

struct MoEConfig {
  std::array<std::shared_ptr<const Expert>, kNumArtifacts> experts;
  double t_s = 0.5;
};

struct MulticlassConfig {
  std::shared_ptr<const Expert> model;
  double t_s = 0.5;
};

struct Decision {
  int x = 0;
  int y = 0;
  std::uint8_t label = 0;
  double p_free = 0;

  bool operator==(const Decision&) const = default;
};

/// Artifact-free score per patch: fused p_artifact_free for the MoE,
/// probs[0] for a multiclass model. Order follows `patches`.
std::vector<double> ArtifactFreeScores(std::span<const PatchRecord> patches,
                                       const MoEConfig& config, int workers = 1);
std::vector<double> ArtifactFreeScores(std::span<const PatchRecord> patches,
                                       const MulticlassConfig& config,
                                       int workers = 1);

/// Per-patch decisions sorted by (y, x). Results do not depend on `workers`.
std::vector<Decision> ClassifySlide(std::span<const PatchRecord> patches,
                                    const MoEConfig& config, int workers = 1);
std::vector<Decision> ClassifySlide(std::span<const PatchRecord> patches,
                                    const MulticlassConfig& config,
                                    int workers = 1);

/// One JSON object per line: {"x":..,"y":..,"label":..,"p_free":..}.
std::string DecisionsToJsonl(std::span<const Decision> decisions);
std::vector<Decision> DecisionsFromJsonl(std::istream& in);

}  // namespace slideqc

#endif  // SLIDEQC_MOE_H_
