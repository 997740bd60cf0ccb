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

#include "slideqc/experts.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "slideqc/errors.h"
#include "slideqc/parallel.h"

namespace slideqc {

bool IsValidDistribution(const ProbVector& p, double tol) {
  if (p.probs.empty()) return false;
  double sum = 0;
  for (double v : p.probs) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

ProbVector Softmax(std::span<const double> logits) {
  ProbVector out;
  if (logits.empty()) return out;
  const double m = *std::max_element(logits.begin(), logits.end());
  out.probs.resize(logits.size());
  double sum = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.probs[i] = std::exp(logits[i] - m);
    sum += out.probs[i];
  }
  for (double& v : out.probs) v /= sum;
  return out;
}

double CrossEntropy(int truth, const ProbVector& probs) {
  return -std::log(std::max(probs.probs.at(static_cast<std::size_t>(truth)),
                            kProbabilityFloor));
}

std::vector<double> Logits(const WeightMatrix& w, const FeatureVector& x) {
  std::vector<double> z(static_cast<std::size_t>(w.rows));
  for (int r = 0; r < w.rows; ++r) {
    double acc = w.At(r, kFeatureDim);
    for (int c = 0; c < kFeatureDim; ++c) acc += w.At(r, c) * x[c];
    z[r] = acc;
  }
  return z;
}

// ---------------------------------------------------------------------------
// FeatureModel

FeatureModel::FeatureModel(WeightMatrix weights, FeatureConfig features)
    : weights_(std::move(weights)), features_(features) {
  if (weights_.rows != 2 && weights_.rows != kNumClasses) {
    throw ValidationError("feature model: class_count must be 2 or 6");
  }
  if (weights_.cols != kFeatureDim + 1 ||
      weights_.data.size() != static_cast<std::size_t>(weights_.rows) * weights_.cols) {
    throw ValidationError("feature model: weight matrix must have 17 columns");
  }
  for (double v : weights_.data) {
    if (!std::isfinite(v)) throw ValidationError("feature model: non-finite weight");
  }
}

ProbVector FeatureModel::PredictFeatures(const FeatureVector& f) const {
  const std::vector<double> z = Logits(weights_, f);
  return Softmax(z);
}

ProbVector FeatureModel::Predict(const PatchRecord& patch) const {
  return PredictFeatures(ExtractFeatures(patch.pixels, features_));
}

ModelComplexity FeatureModel::Complexity() const {
  ModelComplexity c;
  c.param_count = static_cast<std::uint64_t>(weights_.rows) * weights_.cols;
  c.flop_count = 2 * c.param_count +
                 kFeatureOpsPerPixel * static_cast<std::uint64_t>(kPatchSize) * kPatchSize;
  return c;
}

nlohmann::json FeatureModel::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < weights_.rows; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < weights_.cols; ++c) row.push_back(weights_.At(r, c));
    rows.push_back(std::move(row));
  }
  return {{"kind", "trained_feature_model"},
          {"class_count", weights_.rows},
          {"weights", std::move(rows)},
          {"feature_version", kFeatureVersion}};
}

FeatureModel FeatureModel::FromJson(const nlohmann::json& j) {
  try {
    if (j.at("kind").get<std::string>() != "trained_feature_model") {
      throw ValidationError("model kind is not trained_feature_model");
    }
    if (j.at("feature_version").get<int>() != kFeatureVersion) {
      throw ValidationError("unsupported feature_version");
    }
    const int k = j.at("class_count").get<int>();
    const auto& rows = j.at("weights");
    if (!rows.is_array() || static_cast<int>(rows.size()) != k) {
      throw ValidationError("weights row count does not match class_count");
    }
    WeightMatrix w(k, kFeatureDim + 1);
    for (int r = 0; r < k; ++r) {
      if (rows[r].size() != static_cast<std::size_t>(kFeatureDim + 1)) {
        throw ValidationError("weights rows must have 17 entries");
      }
      for (int c = 0; c <= kFeatureDim; ++c) w.At(r, c) = rows[r][c].get<double>();
    }
    return FeatureModel(std::move(w));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("feature model: ") + e.what());
  }
}

FeatureModel FeatureModel::Load(const std::filesystem::path& path) {
  try {
    return FromJson(ReadJsonFile(path));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(e.what()) + " (" + path.string() + ")");
  }
}

void FeatureModel::Save(const std::filesystem::path& path) const {
  WriteJsonFile(path, ToJson());
}

// ---------------------------------------------------------------------------
// Training

LossAndGradient BatchLossAndGradient(const WeightMatrix& w,
                                     std::span<const LabeledFeatures> batch) {
  LossAndGradient out;
  out.gradient = WeightMatrix(w.rows, w.cols);
  if (batch.empty()) return out;
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const ProbVector p = Softmax(Logits(w, ex.x));
    out.loss += CrossEntropy(ex.label, p);
    for (int r = 0; r < w.rows; ++r) {
      const double err = (p[r] - (r == ex.label ? 1.0 : 0.0)) * inv;
      for (int c = 0; c < kFeatureDim; ++c) out.gradient.At(r, c) += err * ex.x[c];
      out.gradient.At(r, kFeatureDim) += err;
    }
  }
  out.loss *= inv;
  return out;
}

double MeanLoss(const WeightMatrix& w, std::span<const LabeledFeatures> data) {
  if (data.empty()) return 0.0;
  double sum = 0;
  for (const auto& ex : data) sum += CrossEntropy(ex.label, Softmax(Logits(w, ex.x)));
  return sum / static_cast<double>(data.size());
}

double Accuracy(const WeightMatrix& w, std::span<const LabeledFeatures> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& ex : data) {
    const std::vector<double> z = Logits(w, ex.x);
    const int pred = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
    hits += pred == ex.label ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

struct Standardizer {
  FeatureVector mean{};
  FeatureVector scale{};

  static Standardizer Fit(std::span<const LabeledFeatures> data, bool enabled) {
    Standardizer s;
    s.scale.fill(1.0);
    if (!enabled || data.empty()) return s;
    const double n = static_cast<double>(data.size());
    for (const auto& ex : data) {
      for (int c = 0; c < kFeatureDim; ++c) s.mean[c] += ex.x[c] / n;
    }
    for (int c = 0; c < kFeatureDim; ++c) {
      double var = 0;
      for (const auto& ex : data) var += (ex.x[c] - s.mean[c]) * (ex.x[c] - s.mean[c]);
      const double sd = std::sqrt(var / n);
      s.scale[c] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
  }

  std::vector<LabeledFeatures> Apply(std::span<const LabeledFeatures> data) const {
    std::vector<LabeledFeatures> out(data.begin(), data.end());
    for (auto& ex : out) {
      for (int c = 0; c < kFeatureDim; ++c) ex.x[c] = (ex.x[c] - mean[c]) / scale[c];
    }
    return out;
  }

  // Weights acting on standardized inputs -> weights acting on raw inputs.
  WeightMatrix Fold(const WeightMatrix& w) const {
    WeightMatrix out(w.rows, w.cols);
    for (int r = 0; r < w.rows; ++r) {
      double bias = w.At(r, kFeatureDim);
      for (int c = 0; c < kFeatureDim; ++c) {
        out.At(r, c) = w.At(r, c) / scale[c];
        bias -= w.At(r, c) * mean[c] / scale[c];
      }
      out.At(r, kFeatureDim) = bias;
    }
    return out;
  }
};

}  // namespace

TrainResult Train(std::span<const LabeledFeatures> train,
                  std::span<const LabeledFeatures> validation, int class_count,
                  const TrainConfig& config) {
  if (class_count != 2 && class_count != kNumClasses) {
    throw ValidationError("train: class_count must be 2 or 6");
  }
  if (config.batch_size < 1 || !(config.learning_rate > 0) || config.max_epochs < 1) {
    throw ValidationError("train: invalid configuration");
  }
  std::vector<std::size_t> per_class(static_cast<std::size_t>(class_count), 0);
  for (const auto& ex : train) {
    if (ex.label < 0 || ex.label >= class_count) {
      throw ValidationError("train: label out of range");
    }
    ++per_class[ex.label];
  }
  for (int k = 0; k < class_count; ++k) {
    if (per_class[k] == 0) {
      throw ValidationError("train: class " + std::to_string(k) +
                            " has no training examples");
    }
  }
  if (validation.empty()) throw ValidationError("train: validation split is empty");

  const Standardizer std_ = Standardizer::Fit(train, config.standardize);
  const std::vector<LabeledFeatures> xs = std_.Apply(train);
  const std::vector<LabeledFeatures> vs = std_.Apply(validation);

  WeightMatrix w(class_count, kFeatureDim + 1);
  TrainResult result;
  result.weights = w;
  double best_val = std::numeric_limits<double>::infinity();
  double lr = config.learning_rate;
  int since_best = 0;
  int plateau_wait = 0;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<LabeledFeatures> batch;
  batch.reserve(static_cast<std::size_t>(config.batch_size));

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(xs[order[i]]);
      const LossAndGradient g = BatchLossAndGradient(w, batch);
      if (!std::isfinite(g.loss)) throw RuntimeError("train: non-finite loss");
      for (std::size_t i = 0; i < w.data.size(); ++i) w.data[i] -= lr * g.gradient.data[i];
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = MeanLoss(w, xs);
    stats.val_loss = MeanLoss(w, vs);
    stats.val_accuracy = Accuracy(w, vs);
    stats.learning_rate = lr;
    if (!std::isfinite(stats.train_loss) || !std::isfinite(stats.val_loss)) {
      throw RuntimeError("train: non-finite loss");
    }
    result.history.push_back(stats);

    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      result.weights = w;
      result.best_epoch = epoch;
      since_best = 0;
      plateau_wait = 0;
    } else {
      ++since_best;
      if (++plateau_wait >= config.plateau_patience) {
        lr *= config.plateau_factor;
        plateau_wait = 0;
      }
      if (since_best >= config.patience) break;
    }
  }
  result.weights = std_.Fold(result.weights);
  return result;
}

std::vector<ProbVector> PredictBatch(const Expert& expert,
                                     std::span<const PatchRecord> patches,
                                     int workers) {
  std::vector<ProbVector> out(patches.size());
  ParallelFor(patches.size(), workers,
              [&](std::size_t i) { out[i] = expert.Predict(patches[i]); });
  return out;
}

}  // namespace slideqc
