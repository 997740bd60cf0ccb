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

#include "slideqc/backend.h"

#include <algorithm>
#include <cmath>

#include "slideqc/errors.h"

namespace slideqc {

namespace fs = std::filesystem;
using nlohmann::json;

json ModelManifestToJson(const ModelManifest& m) {
  json j;
  j["class_count"] = m.class_count;
  j["param_count"] = m.param_count;
  j["flop_count"] = m.flop_count;
  j["labels"] = m.labels;
  if (!m.model_file.empty()) j["model_file"] = m.model_file;
  if (!m.input_shape.empty()) j["input_shape"] = m.input_shape;
  return j;
}

ModelManifest ModelManifestFromJson(const json& j) {
  ModelManifest m;
  try {
    m.class_count = j.at("class_count").get<int>();
    m.param_count = j.at("param_count").get<std::uint64_t>();
    m.flop_count = j.at("flop_count").get<std::uint64_t>();
    if (j.contains("labels")) {
      m.labels = j.at("labels").get<std::map<std::string, std::string>>();
    }
    if (j.contains("model_file")) m.model_file = j.at("model_file").get<std::string>();
    if (j.contains("input_shape")) {
      m.input_shape = j.at("input_shape").get<std::vector<int>>();
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("model manifest: ") + e.what());
  }
  if (m.class_count != 2 && m.class_count != kNumClasses) {
    throw ValidationError("model manifest: class_count must be 2 or 6");
  }
  if (m.class_count == 2 && m.labels.contains("1")) {
    std::string l = m.labels.at("1");
    std::replace(l.begin(), l.end(), '-', '_');
    if (l != "artifact_free") {
      throw ValidationError(
          "model manifest: binary models must label index 1 as artifact_free");
    }
  }
  return m;
}

namespace {

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<float> weights;  // out x in, row-major
  std::vector<float> bias;
  bool relu = false;
};

// Fully connected network stored as JSON:
//   {"format": "dense-mlp", "version": 1, "input": "features" | "pixels",
//    "layers": [{"weights": [[...], ...], "bias": [...],
//                "activation": "relu" | "linear"}, ...]}
class DenseMlpBackend final : public InferenceBackend {
 public:
  explicit DenseMlpBackend(const json& j) {
    try {
      if (j.at("version").get<int>() != 1) {
        throw ValidationError("dense-mlp: unsupported version");
      }
      const std::string input = j.at("input").get<std::string>();
      if (input == "features") {
        input_ = BackendInput::kFeatures;
      } else if (input == "pixels") {
        input_ = BackendInput::kPixels;
      } else {
        throw ValidationError("dense-mlp: input must be features or pixels");
      }
      std::size_t width = input_size();
      for (const auto& lj : j.at("layers")) {
        DenseLayer layer;
        const auto& rows = lj.at("weights");
        layer.in = width;
        layer.out = rows.size();
        if (layer.out == 0) throw ValidationError("dense-mlp: empty layer");
        for (const auto& row : rows) {
          if (row.size() != layer.in) {
            throw ValidationError("dense-mlp: layer width mismatch");
          }
          for (const auto& v : row) layer.weights.push_back(v.get<float>());
        }
        layer.bias = lj.at("bias").get<std::vector<float>>();
        if (layer.bias.size() != layer.out) {
          throw ValidationError("dense-mlp: bias length mismatch");
        }
        const std::string act = lj.value("activation", "linear");
        if (act != "relu" && act != "linear") {
          throw ValidationError("dense-mlp: unknown activation " + act);
        }
        layer.relu = act == "relu";
        width = layer.out;
        layers_.push_back(std::move(layer));
      }
    } catch (const json::exception& e) {
      throw ValidationError(std::string("dense-mlp: ") + e.what());
    }
    if (layers_.empty()) throw ValidationError("dense-mlp: no layers");
  }

  std::string name() const override { return "dense-mlp"; }
  BackendInput input_kind() const override { return input_; }
  std::size_t input_size() const override {
    return input_ == BackendInput::kFeatures
               ? static_cast<std::size_t>(kFeatureDim)
               : static_cast<std::size_t>(3) * kPatchSize * kPatchSize;
  }
  std::size_t output_size() const override { return layers_.back().out; }

  std::vector<double> Run(std::span<const float> input) const override {
    if (input.size() != input_size()) {
      throw RuntimeError("dense-mlp: input has " + std::to_string(input.size()) +
                         " values, expected " + std::to_string(input_size()));
    }
    std::vector<double> act(input.begin(), input.end());
    std::vector<double> next;
    for (const auto& layer : layers_) {
      next.assign(layer.out, 0.0);
      for (std::size_t o = 0; o < layer.out; ++o) {
        double acc = layer.bias[o];
        const float* w = layer.weights.data() + o * layer.in;
        for (std::size_t i = 0; i < layer.in; ++i) acc += w[i] * act[i];
        next[o] = layer.relu ? std::max(0.0, acc) : acc;
      }
      act.swap(next);
    }
    return act;
  }

 private:
  BackendInput input_ = BackendInput::kFeatures;
  std::vector<DenseLayer> layers_;
};

}  // namespace

std::unique_ptr<InferenceBackend> OpenBackend(const fs::path& file) {
  if (!fs::is_regular_file(file)) {
    throw ValidationError("model file not found: " + file.string());
  }
  const std::string ext = file.extension().string();
  if (ext == ".onnx") {
    throw RuntimeError("cannot run " + file.string() +
                       ": this build has no ONNX Runtime backend");
  }
  if (ext == ".json") {
    const json j = ReadJsonFile(file);
    if (j.is_object() && j.value("format", "") == "dense-mlp") {
      return std::make_unique<DenseMlpBackend>(j);
    }
  }
  throw ValidationError("unrecognized model format: " + file.string());
}

ExternalModel::ExternalModel(ModelManifest manifest,
                             std::unique_ptr<InferenceBackend> backend,
                             FeatureConfig features)
    : manifest_(std::move(manifest)), backend_(std::move(backend)), features_(features) {
  if (!backend_) throw ValidationError("external model: null backend");
  if (backend_->output_size() != static_cast<std::size_t>(manifest_.class_count)) {
    throw ValidationError("external model: manifest class_count " +
                          std::to_string(manifest_.class_count) +
                          " but model outputs " +
                          std::to_string(backend_->output_size()));
  }
}

ProbVector ExternalModel::Predict(const PatchRecord& patch) const {
  std::vector<float> input;
  if (backend_->input_kind() == BackendInput::kFeatures) {
    const FeatureVector f = ExtractFeatures(patch.pixels, features_);
    input.assign(f.begin(), f.end());
  } else {
    const Raster& px = patch.pixels;
    if (px.width != kPatchSize || px.height != kPatchSize) {
      throw RuntimeError("external model: patch must be 224x224");
    }
    const std::size_t plane = static_cast<std::size_t>(kPatchSize) * kPatchSize;
    input.resize(3 * plane);
    for (std::size_t i = 0; i < plane; ++i) {
      for (int c = 0; c < 3; ++c) {
        input[c * plane + i] = static_cast<float>(
            (px.data[i * 3 + c] / 255.0 - features_.channel_mean[c]) /
            features_.channel_std[c]);
      }
    }
  }
  const std::vector<double> logits = backend_->Run(input);
  if (logits.size() != static_cast<std::size_t>(manifest_.class_count)) {
    throw RuntimeError("external model: backend returned wrong output width");
  }
  return Softmax(logits);
}

ModelComplexity ExternalModel::Complexity() const {
  return {manifest_.param_count, manifest_.flop_count};
}

std::unique_ptr<ExternalModel> LoadExternal(const fs::path& model_dir) {
  const fs::path manifest_path = model_dir / "model_manifest.json";
  if (!fs::is_regular_file(manifest_path)) {
    throw ValidationError("missing model manifest: " + manifest_path.string());
  }
  ModelManifest manifest = ModelManifestFromJson(ReadJsonFile(manifest_path));
  fs::path model_file;
  if (!manifest.model_file.empty()) {
    model_file = model_dir / manifest.model_file;
  } else {
    std::vector<fs::path> candidates;
    for (const auto& e : fs::directory_iterator(model_dir)) {
      const auto ext = e.path().extension();
      if (e.path().filename() != "model_manifest.json" &&
          (ext == ".json" || ext == ".onnx")) {
        candidates.push_back(e.path());
      }
    }
    std::sort(candidates.begin(), candidates.end());
    if (candidates.empty()) {
      throw ValidationError("no model file in " + model_dir.string());
    }
    model_file = candidates.front();
  }
  return std::make_unique<ExternalModel>(std::move(manifest), OpenBackend(model_file));
}

std::unique_ptr<Expert> LoadExpert(const fs::path& path) {
  if (fs::is_directory(path)) return LoadExternal(path);
  if (fs::is_regular_file(path)) {
    return std::make_unique<FeatureModel>(FeatureModel::Load(path));
  }
  throw ValidationError("model not found: " + path.string());
}

}  // namespace slideqc
