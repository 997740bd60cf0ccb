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

#include "slideqc/wsi_store.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "slideqc/errors.h"
#include "slideqc/png_io.h"

namespace slideqc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const json& Require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

int RequireInt(const json& j, const char* key, const std::string& where) {
  const json& v = Require(j, key, where);
  if (!v.is_number_integer()) {
    throw ValidationError(where + ": field '" + key + "' must be an integer");
  }
  return v.get<int>();
}

std::string RequireString(const json& j, const char* key,
                          const std::string& where) {
  const json& v = Require(j, key, where);
  if (!v.is_string()) {
    throw ValidationError(where + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

}  // namespace

json ManifestToJson(const SlideManifest& m) {
  json j;
  j["slide_id"] = m.slide_id;
  j["width_px"] = m.width_px;
  j["height_px"] = m.height_px;
  j["magnification"] = m.magnification;
  j["pixel_size_um"] = m.pixel_size_um;
  j["raster_path"] = m.raster_path;
  j["annotation_path"] =
      m.annotation_path ? json(*m.annotation_path) : json(nullptr);
  return j;
}

SlideManifest ManifestFromJson(const json& j) {
  const std::string where = "manifest";
  SlideManifest m;
  m.slide_id = RequireString(j, "slide_id", where);
  m.width_px = RequireInt(j, "width_px", where);
  m.height_px = RequireInt(j, "height_px", where);
  m.magnification = RequireString(j, "magnification", where);
  const json& ps = Require(j, "pixel_size_um", where);
  if (!ps.is_number()) {
    throw ValidationError("manifest: pixel_size_um must be a number");
  }
  m.pixel_size_um = ps.get<double>();
  m.raster_path = RequireString(j, "raster_path", where);
  if (j.contains("annotation_path") && !j.at("annotation_path").is_null()) {
    m.annotation_path = RequireString(j, "annotation_path", where);
  }
  if (m.width_px < 1 || m.height_px < 1) {
    throw ValidationError("manifest: dimensions must be >= 1");
  }
  if (!(m.pixel_size_um > 0) || !std::isfinite(m.pixel_size_um)) {
    throw ValidationError("manifest: pixel_size_um must be > 0");
  }
  return m;
}

json AnnotationsToJson(const AnnotationSet& a) {
  json regions = json::array();
  for (const auto& r : a.regions) {
    json poly = json::array();
    for (const auto& v : r.polygon) poly.push_back({v.x, v.y});
    regions.push_back({{"label", r.label}, {"polygon", std::move(poly)}});
  }
  return {{"regions", std::move(regions)}};
}

AnnotationSet AnnotationsFromJson(const json& j) {
  const json& regions = Require(j, "regions", "annotations");
  if (!regions.is_array()) {
    throw ValidationError("annotations: 'regions' must be an array");
  }
  AnnotationSet out;
  for (const auto& r : regions) {
    const int label = RequireInt(r, "label", "annotations");
    if (label < 0 || label >= kNumClasses) {
      throw ValidationError("annotations: unknown label id " +
                            std::to_string(label));
    }
    const json& poly = Require(r, "polygon", "annotations");
    if (!poly.is_array() || poly.size() < 3) {
      throw ValidationError("annotations: polygon needs at least 3 vertices");
    }
    AnnotationRegion region;
    region.label = static_cast<std::uint8_t>(label);
    for (const auto& v : poly) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
          !v[1].is_number()) {
        throw ValidationError("annotations: vertex must be [x, y]");
      }
      region.polygon.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    out.regions.push_back(std::move(region));
  }
  return out;
}

json ReadJsonFile(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " +
                          e.what());
  }
}

void WriteJsonFile(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw RuntimeError("failed writing " + path.string());
}

Slide LoadSlide(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw ValidationError("slide directory not found: " + dir.string());
  }
  Slide slide;
  try {
    slide.manifest = ManifestFromJson(ReadJsonFile(dir / "manifest.json"));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(e.what()) + " (in " + dir.string() + ")");
  }
  slide.raster = ReadPngRgb(dir / slide.manifest.raster_path);
  if (slide.raster.width != slide.manifest.width_px ||
      slide.raster.height != slide.manifest.height_px) {
    std::ostringstream msg;
    msg << "dimension mismatch in " << dir.string() << ": manifest "
        << slide.manifest.width_px << "x" << slide.manifest.height_px
        << ", raster " << slide.raster.width << "x" << slide.raster.height;
    throw ValidationError(msg.str());
  }
  if (slide.manifest.annotation_path) {
    slide.annotations =
        AnnotationsFromJson(ReadJsonFile(dir / *slide.manifest.annotation_path));
  }
  return slide;
}

void SaveSlide(const fs::path& dir, SlideManifest manifest,
               const Raster& raster,
               const std::optional<AnnotationSet>& annotations) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RuntimeError("cannot create " + dir.string());
  manifest.width_px = raster.width;
  manifest.height_px = raster.height;
  if (annotations) {
    if (!manifest.annotation_path) manifest.annotation_path = "annotations.json";
    WriteJsonFile(dir / *manifest.annotation_path, AnnotationsToJson(*annotations));
  } else {
    manifest.annotation_path.reset();
  }
  WritePngRgb(dir / manifest.raster_path, raster);
  WriteJsonFile(dir / "manifest.json", ManifestToJson(manifest));
}

void ScanPolygon(std::span<const Vertex> poly, int width, int height,
                 const std::function<void(int, int, int)>& emit) {
  if (poly.size() < 3) return;
  double ymin = poly[0].y, ymax = poly[0].y;
  for (const auto& v : poly) {
    ymin = std::min(ymin, v.y);
    ymax = std::max(ymax, v.y);
  }
  const int row_begin = std::max(0, static_cast<int>(std::floor(ymin)));
  const int row_end = std::min(height, static_cast<int>(std::ceil(ymax)) + 1);
  std::vector<double> xs;
  for (int y = row_begin; y < row_end; ++y) {
    const double yc = y + 0.5;
    xs.clear();
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
      const Vertex& a = poly[j];
      const Vertex& b = poly[i];
      if ((a.y <= yc) != (b.y <= yc)) {
        xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel centers in [xs[k], xs[k+1]).
      const int x0 = std::max(0, static_cast<int>(std::ceil(xs[k] - 0.5)));
      const int x1 = std::min(width, static_cast<int>(std::ceil(xs[k + 1] - 0.5)));
      if (x0 < x1) emit(y, x0, x1);
    }
  }
}

LabelRaster RasterizeAnnotations(const AnnotationSet& annotations, int width,
                                 int height) {
  LabelRaster out(width, height, kUnlabeled);
  for (const auto& region : annotations.regions) {
    ScanPolygon(region.polygon, width, height, [&](int y, int x0, int x1) {
      std::fill(out.data.begin() + static_cast<std::ptrdiff_t>(y) * width + x0,
                out.data.begin() + static_cast<std::ptrdiff_t>(y) * width + x1,
                region.label);
    });
  }
  return out;
}

std::string PatchFileName(const std::string& slide_id, int x, int y) {
  return slide_id + "_" + std::to_string(x) + "_" + std::to_string(y) + ".png";
}

ClassCounts SavePatchDataset(std::span<const PatchRecord> patches,
                             const fs::path& root) {
  for (const auto& p : patches) {
    if (!p.label || *p.label >= kNumClasses) {
      throw ValidationError("patch " + PatchFileName(p.slide_id, p.x, p.y) +
                            " has no valid label");
    }
  }
  std::error_code ec;
  for (auto name : kClassNames) {
    fs::create_directories(root / name, ec);
    if (ec) throw RuntimeError("cannot create " + (root / name).string());
  }
  ClassCounts counts{};
  for (const auto& p : patches) {
    WritePngRgb(root / kClassNames[*p.label] / PatchFileName(p.slide_id, p.x, p.y),
                p.pixels);
    ++counts[*p.label];
  }
  return counts;
}

std::vector<PatchRecord> LoadPatchDataset(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw ValidationError("patch dataset not found: " + root.string());
  }
  std::vector<PatchRecord> out;
  for (int k = 0; k < kNumClasses; ++k) {
    const fs::path dir = root / kClassNames[k];
    if (!fs::is_directory(dir)) continue;
    std::vector<PatchRecord> cls;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.path().extension() != ".png") continue;
      const std::string stem = entry.path().stem().string();
      const auto py = stem.rfind('_');
      const auto px = py == std::string::npos || py == 0
                          ? std::string::npos
                          : stem.rfind('_', py - 1);
      if (px == std::string::npos) {
        throw ValidationError("bad patch file name: " + entry.path().string());
      }
      PatchRecord p;
      p.slide_id = stem.substr(0, px);
      try {
        p.x = std::stoi(stem.substr(px + 1, py - px - 1));
        p.y = std::stoi(stem.substr(py + 1));
      } catch (const std::exception&) {
        throw ValidationError("bad patch file name: " + entry.path().string());
      }
      p.label = static_cast<std::uint8_t>(k);
      p.pixels = ReadPngRgb(entry.path());
      if (p.pixels.width != kPatchSize || p.pixels.height != kPatchSize) {
        throw ValidationError("patch is not 224x224: " + entry.path().string());
      }
      cls.push_back(std::move(p));
    }
    std::sort(cls.begin(), cls.end(), [](const PatchRecord& a, const PatchRecord& b) {
      return std::tie(a.slide_id, a.y, a.x) < std::tie(b.slide_id, b.y, b.x);
    });
    for (auto& p : cls) out.push_back(std::move(p));
  }
  return out;
}

}  // namespace slideqc
