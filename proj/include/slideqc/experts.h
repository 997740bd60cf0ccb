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

#ifndef SLIDEQC_EXPERTS_H_
#define SLIDEQC_EXPERTS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "slideqc/features.h"
#include "slideqc/wsi_store.h"

namespace slideqc {

/// Class probability distribution emitted by an expert; length 2 (binary,
/// index 0 = artifact) or 6 (multiclass, index 0 = artifact-free).
struct ProbVector {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
  bool operator==(const ProbVector&) const = default;
};

/// True when every entry is in [0, 1] and the entries sum to 1 within tol.
bool IsValidDistribution(const ProbVector& p, double tol = 1e-9);

/// Max-subtracted softmax.
ProbVector Softmax(std::span<const double> logits);

inline constexpr double kProbabilityFloor = 1e-12;

/// -ln(max(probs[truth], 1e-12)).
double CrossEntropy(int truth, const ProbVector& probs);

struct ModelComplexity {
  std::uint64_t param_count = 0;
  std::uint64_t flop_count = 0;
};

/// Probability-emitting patch classifier. Implementations are immutable
/// after construction and safe to call concurrently.
class Expert {
 public:
  virtual ~Expert() = default;
  virtual int class_count() const = 0;
  virtual ProbVector Predict(const PatchRecord& patch) const = 0;
  virtual ModelComplexity Complexity() const = 0;
  virtual std::string kind() const = 0;
};

/// Dense row-major matrix; rows = classes, cols = kFeatureDim + 1 (bias last).
struct WeightMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  WeightMatrix() = default;
  WeightMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}
  double& At(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double At(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  bool operator==(const WeightMatrix&) const = default;
};

/// Linear softmax classifier over the 16-dim feature vector.
class FeatureModel final : public Expert {
 public:
  FeatureModel(WeightMatrix weights, FeatureConfig features = {});

  int class_count() const override { return weights_.rows; }
  ProbVector Predict(const PatchRecord& patch) const override;
  ModelComplexity Complexity() const override;
  std::string kind() const override { return "trained_feature_model"; }

  ProbVector PredictFeatures(const FeatureVector& f) const;
  const WeightMatrix& weights() const { return weights_; }
  const FeatureConfig& feature_config() const { return features_; }

  nlohmann::json ToJson() const;
  static FeatureModel FromJson(const nlohmann::json& j);
  static FeatureModel Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;

 private:
  WeightMatrix weights_;
  FeatureConfig features_;
};

/// Feature-extraction cost charged per patch, in operations per pixel.
inline constexpr std::uint64_t kFeatureOpsPerPixel = 10;

struct LabeledFeatures {
  FeatureVector x{};
  int label = 0;
};

/// logits = W * [x; 1].
std::vector<double> Logits(const WeightMatrix& w, const FeatureVector& x);

struct LossAndGradient {
  double loss = 0;
  WeightMatrix gradient;
};

/// Mean cross-entropy over the batch and its analytic gradient with respect
/// to every weight, (p - onehot) [x; 1]^T averaged over the batch.
LossAndGradient BatchLossAndGradient(const WeightMatrix& w,
                                     std::span<const LabeledFeatures> batch);

struct TrainConfig {
  double learning_rate = 0.01;
  int batch_size = 128;
  int patience = 20;
  int max_epochs = 20000;
  int plateau_patience = 5;
  double plateau_factor = 0.5;
  std::uint64_t seed = 0;
  /// Standardize features with training-set statistics during optimization.
  /// The returned model has the transform folded into its weights.
  bool standardize = true;
};

struct EpochStats {
  int epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_accuracy = 0;
  double learning_rate = 0;
};

struct TrainResult {
  WeightMatrix weights;
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

/// Mini-batch SGD on mean cross-entropy with plateau learning-rate halving
/// and early stopping on validation loss. Returns the weights from the epoch
/// with the lowest validation loss.
TrainResult Train(std::span<const LabeledFeatures> train,
                  std::span<const LabeledFeatures> validation, int class_count,
                  const TrainConfig& config);

double MeanLoss(const WeightMatrix& w, std::span<const LabeledFeatures> data);
double Accuracy(const WeightMatrix& w, std::span<const LabeledFeatures> data);

/// Elementwise equal to calling expert.Predict on each patch; order kept.
std::vector<ProbVector> PredictBatch(const Expert& expert,
                                     std::span<const PatchRecord> patches,
                                     int workers = 1);

}  // namespace slideqc

#endif  // SLIDEQC_EXPERTS_H_
