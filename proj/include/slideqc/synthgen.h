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

#ifndef SLIDEQC_SYNTHGEN_H_
#define SLIDEQC_SYNTHGEN_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "slideqc/image.h"
#include "slideqc/wsi_store.h"

namespace slideqc {

struct SynthRegion {
  std::uint8_t class_id = 1;  // 1..5
  /// Share of the tissue area this artifact should cover.
  double target_fraction = 0.1;
};

/// Recipe for one procedurally generated slide. The images are caricatures
/// tuned so that the hand-crafted features can tell the classes apart.
struct SynthSpec {
  std::uint64_t seed = 0;
  int width = 1792;   // multiple of 224, >= 448
  int height = 1792;  // multiple of 224, >= 448
  std::vector<SynthRegion> regions;
  /// Tissue tint as hue (degrees), saturation, value.
  std::array<double, 3> tint = {318.0, 0.38, 0.70};
  /// Tissue covers the whole raster instead of an irregular blob on white.
  bool all_tissue = false;
};

nlohmann::json SynthSpecToJson(const SynthSpec& s);
/// "class" may be given as an id or a class name.
SynthSpec SynthSpecFromJson(const nlohmann::json& j);

/// Throws ValidationError when dimensions, classes or fractions are invalid.
void ValidateSynthSpec(const SynthSpec& s);

struct SynthSlide {
  SlideManifest manifest;
  Raster raster;
  AnnotationSet annotations;
  /// Per-pixel class: 0 tissue, 1..5 artifacts, 255 background. Equal to
  /// RasterizeAnnotations(annotations).
  LabelRaster truth;
};

/// Same seed, same spec -> identical pixels and annotations.
SynthSlide GenerateSlide(const SynthSpec& spec, const std::string& slide_id);

/// Writes a slide directory: manifest.json, slide.png, annotations.json and
/// truth.png (single-channel class ids).
void SaveSynthSlide(const std::filesystem::path& dir, const SynthSlide& slide);

/// Loads truth.png from a slide directory.
LabelRaster LoadTruth(const std::filesystem::path& slide_dir);

struct SplitCounts {
  int train = 0;
  int val = 0;
  int test = 0;
  bool operator==(const SplitCounts&) const = default;
};

/// Validation and test sizes are n * fraction rounded to nearest (at least
/// one each); training takes the remainder. Throws ValidationError when
/// n < 3 or the fractions do not sum to 1.
SplitCounts SplitSizes(int n, double train, double val, double test);

struct CorpusOptions {
  int n_slides = 11;
  std::array<double, 3> split = {0.64, 0.18, 0.18};
  std::uint64_t seed = 42;
  int slide_size = 2240;
  int workers = 1;
};

struct CorpusSummary {
  SplitCounts counts;
  std::array<std::vector<std::string>, 3> slide_ids;  // train, val, test
  std::array<ClassCounts, 3> patch_counts;
};

/// Layout:
///   root/corpus.json
///   root/{train,val,test}/slides/<slide_id>/...
///   root/{train,val,test}/patches/<class>/<slide_id>_<x>_<y>.png
/// Patch labels come from the truth raster with the default grid filters.
CorpusSummary GenerateCorpus(const CorpusOptions& options,
                             const std::filesystem::path& root);

/// Recipe used for slide i of a corpus; exposed for tests.
SynthSpec CorpusSlideSpec(std::uint64_t corpus_seed, int index, int slide_size);

inline constexpr std::array<std::string_view, 3> kSplitNames = {"train", "val", "test"};

}  // namespace slideqc

#endif  // SLIDEQC_SYNTHGEN_H_
