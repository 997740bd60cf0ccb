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

#include "slideqc/moe.h"

#include <algorithm>
#include <istream>
#include <sstream>

#include "json.hpp"
#include "slideqc/errors.h"
#include "slideqc/parallel.h"

namespace slideqc {
namespace {

void CheckThreshold(double t_s) {
  if (!(t_s >= 0.0 && t_s <= 1.0)) {
    throw ValidationError("t_s must lie in [0, 1]");
  }
}

void CheckExperts(const MoEConfig& config) {
  for (std::size_t i = 0; i < config.experts.size(); ++i) {
    if (!config.experts[i]) {
      throw ValidationError("moe: missing expert for " + std::string(kExpertTasks[i]));
    }
    if (config.experts[i]->class_count() != 2) {
      throw ValidationError("moe: expert " + std::string(kExpertTasks[i]) +
                            " is not binary");
    }
  }
  CheckThreshold(config.t_s);
}

void CheckMulticlass(const MulticlassConfig& config) {
  if (!config.model || config.model->class_count() != kNumClasses) {
    throw ValidationError("multiclass mode needs a 6-class model");
  }
  CheckThreshold(config.t_s);
}

FusedPrediction FusePatch(const PatchRecord& patch, const MoEConfig& config) {
  std::array<ProbVector, kNumArtifacts> probs;
  for (int i = 0; i < kNumArtifacts; ++i) probs[i] = config.experts[i]->Predict(patch);
  return Fuse(probs);
}

std::vector<Decision> SortedDecisions(std::span<const PatchRecord> patches,
                                      std::vector<Decision> decisions) {
  for (std::size_t i = 0; i < patches.size(); ++i) {
    decisions[i].x = patches[i].x;
    decisions[i].y = patches[i].y;
  }
  std::stable_sort(decisions.begin(), decisions.end(),
                   [](const Decision& a, const Decision& b) {
                     return a.y != b.y ? a.y < b.y : a.x < b.x;
                   });
  return decisions;
}

}  // namespace

FusedPrediction Fuse(std::span<const ProbVector> expert_probs) {
  if (expert_probs.size() != kNumArtifacts) {
    throw ValidationError("fuse: expected 5 expert outputs, got " +
                          std::to_string(expert_probs.size()));
  }
  FusedPrediction out;
  out.p_artifact = 0.0;
  for (int i = 0; i < kNumArtifacts; ++i) {
    if (expert_probs[i].size() != 2) {
      throw ValidationError("fuse: expert outputs must be binary");
    }
    out.per_expert_artifact_probs[i] = expert_probs[i][0];
    out.p_artifact = std::max(out.p_artifact, expert_probs[i][0]);
  }
  out.p_artifact_free = 1.0 - out.p_artifact;
  return out;
}

std::uint8_t DecideMoe(const FusedPrediction& fused, double t_s) {
  CheckThreshold(t_s);
  if (fused.p_artifact_free >= t_s) return 0;
  const auto& p = fused.per_expert_artifact_probs;
  const auto best = std::max_element(p.begin(), p.end());  // first max
  return static_cast<std::uint8_t>(1 + (best - p.begin()));
}

std::uint8_t DecideMulticlass(const ProbVector& probs, double t_s) {
  CheckThreshold(t_s);
  if (probs.size() != kNumClasses) {
    throw ValidationError("decide_multiclass: expected 6 probabilities");
  }
  if (probs[0] >= t_s) return 0;
  const auto best = std::max_element(probs.probs.begin() + 1, probs.probs.end());
  return static_cast<std::uint8_t>(best - probs.probs.begin());
}

std::vector<double> ArtifactFreeScores(std::span<const PatchRecord> patches,
                                       const MoEConfig& config, int workers) {
  CheckExperts(config);
  std::vector<double> out(patches.size());
  ParallelFor(patches.size(), workers, [&](std::size_t i) {
    out[i] = FusePatch(patches[i], config).p_artifact_free;
  });
  return out;
}

std::vector<double> ArtifactFreeScores(std::span<const PatchRecord> patches,
                                       const MulticlassConfig& config,
                                       int workers) {
  CheckMulticlass(config);
  std::vector<double> out(patches.size());
  ParallelFor(patches.size(), workers,
              [&](std::size_t i) { out[i] = config.model->Predict(patches[i])[0]; });
  return out;
}

std::vector<Decision> ClassifySlide(std::span<const PatchRecord> patches,
                                    const MoEConfig& config, int workers) {
  CheckExperts(config);
  std::vector<Decision> out(patches.size());
  ParallelFor(patches.size(), workers, [&](std::size_t i) {
    const FusedPrediction fused = FusePatch(patches[i], config);
    out[i].label = DecideMoe(fused, config.t_s);
    out[i].p_free = fused.p_artifact_free;
  });
  return SortedDecisions(patches, std::move(out));
}

std::vector<Decision> ClassifySlide(std::span<const PatchRecord> patches,
                                    const MulticlassConfig& config, int workers) {
  CheckMulticlass(config);
  std::vector<Decision> out(patches.size());
  ParallelFor(patches.size(), workers, [&](std::size_t i) {
    const ProbVector p = config.model->Predict(patches[i]);
    out[i].label = DecideMulticlass(p, config.t_s);
    out[i].p_free = p[0];
  });
  return SortedDecisions(patches, std::move(out));
}

std::string DecisionsToJsonl(std::span<const Decision> decisions) {
  std::string out;
  for (const auto& d : decisions) {
    const nlohmann::ordered_json j = {{"x", d.x}, {"y", d.y}, {"label", d.label}, {"p_free", d.p_free}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<Decision> DecisionsFromJsonl(std::istream& in) {
  std::vector<Decision> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Decision d;
      d.x = j.at("x").get<int>();
      d.y = j.at("y").get<int>();
      const int label = j.at("label").get<int>();
      if (label < 0 || label >= kNumClasses) {
        throw ValidationError("decisions line " + std::to_string(line_no) +
                              ": label out of range");
      }
      d.label = static_cast<std::uint8_t>(label);
      d.p_free = j.at("p_free").get<double>();
      out.push_back(d);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("decisions line " + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  return out;
}

}  // namespace slideqc
