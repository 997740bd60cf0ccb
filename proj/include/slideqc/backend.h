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

#ifndef SLIDEQC_BACKEND_H_
#define SLIDEQC_BACKEND_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "slideqc/experts.h"

namespace slideqc {

/// model_manifest.json contents for an externally trained network.
struct ModelManifest {
  int class_count = 0;
  std::uint64_t param_count = 0;
  std::uint64_t flop_count = 0;
  std::map<std::string, std::string> labels;
  /// Model file relative to the model directory; empty = auto-detect.
  std::string model_file;
  std::vector<int> input_shape;

  bool operator==(const ModelManifest&) const = default;
};

nlohmann::json ModelManifestToJson(const ModelManifest& m);
ModelManifest ModelManifestFromJson(const nlohmann::json& j);

/// What a backend consumes for one patch.
enum class BackendInput {
  kFeatures,  // the 16-dim FeatureVector
  kPixels,    // standardized float CHW tensor, 3 x 224 x 224
};

/// Executes a serialized network on one input tensor and returns logits.
class InferenceBackend {
 public:
  virtual ~InferenceBackend() = default;
  virtual std::string name() const = 0;
  virtual BackendInput input_kind() const = 0;
  virtual std::size_t input_size() const = 0;
  virtual std::size_t output_size() const = 0;
  virtual std::vector<double> Run(std::span<const float> input) const = 0;
};

/// Opens a model file, choosing the backend from its format. Supported:
///   *.json with "format": "dense-mlp" (built in).
/// ONNX files are recognized but need a build with ONNX Runtime.
std::unique_ptr<InferenceBackend> OpenBackend(const std::filesystem::path& file);

/// Expert backed by a serialized network plus its manifest.
class ExternalModel final : public Expert {
 public:
  ExternalModel(ModelManifest manifest, std::unique_ptr<InferenceBackend> backend,
                FeatureConfig features = {});

  int class_count() const override { return manifest_.class_count; }
  ProbVector Predict(const PatchRecord& patch) const override;
  ModelComplexity Complexity() const override;
  std::string kind() const override { return "external_model"; }

  const ModelManifest& manifest() const { return manifest_; }
  const InferenceBackend& backend() const { return *backend_; }

 private:
  ModelManifest manifest_;
  std::unique_ptr<InferenceBackend> backend_;
  FeatureConfig features_;
};

/// Loads model_manifest.json and the model file from `model_dir`. Throws
/// ValidationError when the manifest is missing or its class_count
/// disagrees with the network's output width.
std::unique_ptr<ExternalModel> LoadExternal(const std::filesystem::path& model_dir);

/// A *.json path is read as a trained feature model, a directory as an
/// external model.
std::unique_ptr<Expert> LoadExpert(const std::filesystem::path& path);

}  // namespace slideqc

#endif  // SLIDEQC_BACKEND_H_
