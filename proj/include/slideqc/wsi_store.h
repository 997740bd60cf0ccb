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

#ifndef SLIDEQC_WSI_STORE_H_
#define SLIDEQC_WSI_STORE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "slideqc/image.h"

namespace slideqc {

/// Desk-scale slide descriptor stored as manifest.json next to the raster.
struct SlideManifest {
  std::string slide_id;
  int width_px = 0;
  int height_px = 0;
  std::string magnification = "40x";
  double pixel_size_um = 0.25;
  std::string raster_path = "slide.png";
  std::optional<std::string> annotation_path;

  bool operator==(const SlideManifest&) const = default;
};

struct Vertex {
  double x = 0;
  double y = 0;
  bool operator==(const Vertex&) const = default;
};

/// A closed polygon labeled with a class id 0..5.
struct AnnotationRegion {
  std::uint8_t label = 0;
  std::vector<Vertex> polygon;
  bool operator==(const AnnotationRegion&) const = default;
};

struct AnnotationSet {
  std::vector<AnnotationRegion> regions;
  bool operator==(const AnnotationSet&) const = default;
};

/// A 224x224 tile cut from a slide at grid coordinate (x, y).
struct PatchRecord {
  std::string slide_id;
  int x = 0;
  int y = 0;
  std::optional<std::uint8_t> label;
  Raster pixels;

  bool operator==(const PatchRecord&) const = default;
};

struct Slide {
  SlideManifest manifest;
  Raster raster;
  std::optional<AnnotationSet> annotations;
};

using ClassCounts = std::array<std::size_t, kNumClasses>;

nlohmann::json ManifestToJson(const SlideManifest& m);
/// Validates field types and the positivity invariants.
SlideManifest ManifestFromJson(const nlohmann::json& j);

nlohmann::json AnnotationsToJson(const AnnotationSet& a);
/// Rejects labels outside 0..5 and polygons with fewer than 3 vertices.
AnnotationSet AnnotationsFromJson(const nlohmann::json& j);

/// Reads a JSON document, mapping parse failures to ValidationError.
nlohmann::json ReadJsonFile(const std::filesystem::path& path);
/// Writes `j` pretty-printed with a trailing newline. Output is byte-stable.
void WriteJsonFile(const std::filesystem::path& path, const nlohmann::json& j);

/// Loads manifest.json, the referenced PNG raster and, when present, the
/// annotation file. Raster dimensions must match the manifest.
Slide LoadSlide(const std::filesystem::path& dir);

/// Writes manifest.json, the raster and (when given) annotations into `dir`.
/// The manifest's annotation_path is set from the presence of `annotations`.
void SaveSlide(const std::filesystem::path& dir, SlideManifest manifest,
               const Raster& raster,
               const std::optional<AnnotationSet>& annotations);

/// Calls emit(y, x_begin, x_end) for every run of pixels whose centers lie
/// inside the polygon (even-odd rule), clipped to width x height.
void ScanPolygon(std::span<const Vertex> polygon, int width, int height,
                 const std::function<void(int, int, int)>& emit);

/// Per-pixel class ids, 255 where no region covers the pixel. A pixel
/// belongs to a polygon when its center (x+0.5, y+0.5) is inside under the
/// even-odd rule; later regions overwrite earlier ones.
LabelRaster RasterizeAnnotations(const AnnotationSet& annotations, int width,
                                 int height);

/// Writes root/<class_name>/<slide_id>_<x>_<y>.png for every patch and
/// returns per-class counts. All six class directories are created.
ClassCounts SavePatchDataset(std::span<const PatchRecord> patches,
                             const std::filesystem::path& root);

/// Inverse of SavePatchDataset. Patches are returned sorted by
/// (class, slide_id, y, x).
std::vector<PatchRecord> LoadPatchDataset(const std::filesystem::path& root);

std::string PatchFileName(const std::string& slide_id, int x, int y);

}  // namespace slideqc

#endif  // SLIDEQC_WSI_STORE_H_
