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

#include "slideqc/synthgen.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "slideqc/errors.h"
#include "slideqc/parallel.h"
#include "slideqc/png_io.h"
#include "slideqc/tiler.h"

namespace slideqc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Hash(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  return Mix(Mix(Mix(a) ^ b) ^ c);
}

// splitmix64 stream; hand-rolled so the output does not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return Mix(state_);
  }
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }
  double Uniform(double a, double b) { return a + (b - a) * Uniform(); }
  int Int(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(Next() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

double Lattice(std::uint64_t seed, std::int64_t ix, std::int64_t iy) {
  return static_cast<double>(Hash(seed, static_cast<std::uint64_t>(ix),
                                  static_cast<std::uint64_t>(iy)) >> 11) *
         0x1.0p-53;
}

double ValueNoise(std::uint64_t seed, double x, double y, double scale) {
  const double fx = x / scale, fy = y / scale;
  const auto ix = static_cast<std::int64_t>(std::floor(fx));
  const auto iy = static_cast<std::int64_t>(std::floor(fy));
  double tx = fx - ix, ty = fy - iy;
  tx = tx * tx * (3 - 2 * tx);
  ty = ty * ty * (3 - 2 * ty);
  const double a = Lattice(seed, ix, iy), b = Lattice(seed, ix + 1, iy);
  const double c = Lattice(seed, ix, iy + 1), d = Lattice(seed, ix + 1, iy + 1);
  return (a + (b - a) * tx) + ((c + (d - c) * tx) - (a + (b - a) * tx)) * ty;
}

// Three-octave value noise in [0, 1].
double Fbm(std::uint64_t seed, double x, double y) {
  return 0.6 * ValueNoise(seed, x, y, 96) + 0.3 * ValueNoise(seed + 1, x, y, 24) +
         0.1 * ValueNoise(seed + 2, x, y, 6);
}

std::array<std::uint8_t, 3> HsvToRgb(double h, double s, double v) {
  h = std::fmod(h, 360.0);
  if (h < 0) h += 360.0;
  s = std::clamp(s, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  const double c = v * s;
  const double hp = h / 60.0;
  const double x = c * (1 - std::abs(std::fmod(hp, 2.0) - 1));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  auto q = [](double u) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(u * 255.0), 0L, 255L));
  };
  return {q(r + m), q(g + m), q(b + m)};
}

// Star-shaped outline: radius(theta) = 1 + sum_k amp_k sin((k+2) theta + phase_k),
// scaled by (rx, ry) around the center.
struct Blob {
  double cx = 0, cy = 0, rx = 0, ry = 0;
  std::array<double, 3> amp{};
  std::array<double, 3> phase{};

  double Radius(double theta) const {
    double r = 1.0;
    for (int k = 0; k < 3; ++k) r += amp[k] * std::sin((k + 2) * theta + phase[k]);
    return r;
  }

  std::vector<Vertex> Polygon(int n = 96) const {
    std::vector<Vertex> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double t = 2 * kPi * i / n;
      const double r = Radius(t);
      // Quantize to 1/8 px so JSON round-trips exactly.
      out.push_back({std::round((cx + r * rx * std::cos(t)) * 8) / 8,
                     std::round((cy + r * ry * std::sin(t)) * 8) / 8});
    }
    return out;
  }

  // Approximate distance (px) from (x, y) inward to the outline.
  double InsetDistance(double x, double y) const {
    const double dx = (x - cx) / rx, dy = (y - cy) / ry;
    const double d = std::sqrt(dx * dx + dy * dy);
    return (Radius(std::atan2(dy, dx)) - d) * std::min(rx, ry);
  }
};

Blob RandomBlob(Rng& rng, double cx, double cy, double rx, double ry, double max_amp) {
  Blob b;
  b.cx = cx;
  b.cy = cy;
  b.rx = rx;
  b.ry = ry;
  for (int k = 0; k < 3; ++k) {
    b.amp[k] = rng.Uniform(0, max_amp);
    b.phase[k] = rng.Uniform(0, 2 * kPi);
  }
  return b;
}

struct PlacedBlob {
  Blob blob;
  std::uint8_t class_id;
};

std::uint8_t Clamp8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

// ---------------------------------------------------------------------------

json SynthSpecToJson(const SynthSpec& s) {
  json regions = json::array();
  for (const auto& r : s.regions) {
    regions.push_back({{"class", r.class_id}, {"target_fraction", r.target_fraction}});
  }
  return {{"seed", s.seed},     {"width", s.width},
          {"height", s.height}, {"regions", std::move(regions)},
          {"tint", s.tint},     {"all_tissue", s.all_tissue}};
}

SynthSpec SynthSpecFromJson(const json& j) {
  SynthSpec s;
  try {
    s.seed = j.value("seed", std::uint64_t{0});
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    s.all_tissue = j.value("all_tissue", false);
    if (j.contains("tint")) s.tint = j.at("tint").get<std::array<double, 3>>();
    if (j.contains("regions")) {
      for (const auto& r : j.at("regions")) {
        SynthRegion region;
        const json& c = r.at("class");
        int id = -1;
        if (c.is_string()) {
          id = ClassIdFromName(c.get<std::string>());
        } else {
          id = c.get<int>();
        }
        if (id < 1 || id >= kNumClasses) {
          throw ValidationError("synth spec: region class must be an artifact");
        }
        region.class_id = static_cast<std::uint8_t>(id);
        region.target_fraction = r.at("target_fraction").get<double>();
        s.regions.push_back(region);
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("synth spec: ") + e.what());
  }
  ValidateSynthSpec(s);
  return s;
}

void ValidateSynthSpec(const SynthSpec& s) {
  if (s.width < 448 || s.height < 448 || s.width % kPatchSize != 0 ||
      s.height % kPatchSize != 0) {
    throw ValidationError("synth spec: dimensions must be multiples of 224 and >= 448");
  }
  double total = 0;
  std::array<bool, kNumClasses> seen{};
  for (const auto& r : s.regions) {
    if (r.class_id < 1 || r.class_id >= kNumClasses) {
      throw ValidationError("synth spec: region class must be 1..5");
    }
    if (seen[r.class_id]) {
      throw ValidationError("synth spec: class listed twice");
    }
    seen[r.class_id] = true;
    if (!(r.target_fraction > 0.0)) {
      throw ValidationError("synth spec: target_fraction must be > 0");
    }
    total += r.target_fraction;
  }
  if (total > 0.8 + 1e-12) {
    throw ValidationError("synth spec: target fractions sum above 0.8");
  }
  if (!(s.tint[1] >= 0 && s.tint[1] <= 1 && s.tint[2] >= 0 && s.tint[2] <= 1)) {
    throw ValidationError("synth spec: tint saturation/value must lie in [0, 1]");
  }
}

SynthSlide GenerateSlide(const SynthSpec& spec, const std::string& slide_id) {
  ValidateSynthSpec(spec);
  const int w = spec.width;
  const int h = spec.height;
  Rng rng(Hash(spec.seed, 0x5eed));

  // Tissue outline.
  AnnotationRegion tissue{0, {}};
  if (spec.all_tissue) {
    tissue.polygon = {{0, 0}, {static_cast<double>(w), 0},
                      {static_cast<double>(w), static_cast<double>(h)},
                      {0, static_cast<double>(h)}};
  } else {
    // Slightly larger than the slide; the corners stay glass.
    const Blob outline =
        RandomBlob(rng, w * rng.Uniform(0.48, 0.52), h * rng.Uniform(0.48, 0.52),
                   0.48 * w, 0.48 * h, 0.05);
    tissue.polygon = outline.Polygon(160);
    for (auto& v : tissue.polygon) {
      v.x = std::clamp(v.x, 0.0, static_cast<double>(w));
      v.y = std::clamp(v.y, 0.0, static_cast<double>(h));
    }
  }
  LabelRaster truth(w, h, kUnlabeled);
  std::size_t tissue_px = 0;
  ScanPolygon(tissue.polygon, w, h, [&](int y, int x0, int x1) {
    for (int x = x0; x < x1; ++x) truth.At(x, y) = 0;
    tissue_px += static_cast<std::size_t>(x1 - x0);
  });

  // Artifact blobs: inside tissue, never overlapping another blob.
  std::vector<PlacedBlob> blobs;
  const double min_dim = std::min(w, h);
  for (const auto& region : spec.regions) {
    const double target = region.target_fraction * static_cast<double>(tissue_px);
    bool done = false;
    for (int round = 0; round < 8 && !done; ++round) {
      std::vector<PlacedBlob> placed;
      std::vector<std::pair<int, std::pair<int, int>>> painted;  // y, [x0, x1)
      double area = 0;
      double r_max = std::max(60.0, 0.22 * min_dim);
      const double r_min = std::max(40.0, 0.07 * min_dim);
      int failures = 0;
      while (area < 0.97 * target && failures < 600) {
        const double remaining = target - area;
        double r = std::sqrt(remaining / kPi);
        r = std::clamp(r, std::min(r_min, r_max), r_max);
        const Blob b = RandomBlob(rng, rng.Uniform(0, w), rng.Uniform(0, h),
                                  r * rng.Uniform(0.9, 1.1), r * rng.Uniform(0.9, 1.1),
                                  0.12);
        const std::vector<Vertex> poly = b.Polygon();
        bool ok = true;
        std::size_t px = 0;
        ScanPolygon(poly, w, h, [&](int y, int x0, int x1) {
          if (!ok) return;
          for (int x = x0; x < x1; ++x) {
            if (truth.At(x, y) != 0) {
              ok = false;
              return;
            }
          }
          px += static_cast<std::size_t>(x1 - x0);
        });
        // Blobs cut by the raster edge are rejected too.
        for (const auto& v : poly) {
          if (v.x < 0 || v.y < 0 || v.x > w || v.y > h) ok = false;
        }
        if (!ok || px == 0) {
          if (++failures % 60 == 0) r_max = std::max(r_min * 0.5, r_max * 0.85);
          continue;
        }
        ScanPolygon(poly, w, h, [&](int y, int x0, int x1) {
          for (int x = x0; x < x1; ++x) truth.At(x, y) = region.class_id;
          painted.push_back({y, {x0, x1}});
        });
        area += static_cast<double>(px);
        placed.push_back({b, region.class_id});
      }
      if (std::abs(area / target - 1.0) <= 0.25) {
        done = true;
        for (auto& p : placed) blobs.push_back(p);
      } else {
        for (const auto& [y, span] : painted) {
          for (int x = span.first; x < span.second; ++x) truth.At(x, y) = 0;
        }
      }
    }
    if (!done) {
      throw RuntimeError("synth: could not place " +
                         std::string(kClassNames[region.class_id]) + " regions at " +
                         std::to_string(region.target_fraction) + " of tissue");
    }
  }

  SynthSlide out;
  out.annotations.regions.push_back(tissue);
  for (const auto& b : blobs) {
    out.annotations.regions.push_back({b.class_id, b.blob.Polygon()});
  }
  out.truth = RasterizeAnnotations(out.annotations, w, h);

  // --- Rendering -----------------------------------------------------------
  const std::uint64_t noise_seed = Hash(spec.seed, 0xc0105);
  Raster img(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double j = Lattice(noise_seed + 9, x, y);
      if (out.truth.At(x, y) == kUnlabeled) {
        const std::uint8_t v = static_cast<std::uint8_t>(250 + static_cast<int>(j * 6));
        img.Set(x, y, v, v, v);
        continue;
      }
      const double n1 = Fbm(noise_seed, x, y);
      const double n2 = Fbm(noise_seed + 17, x, y);
      const auto c = HsvToRgb(spec.tint[0] + (n1 - 0.5) * 16.0,
                              spec.tint[1] * (0.8 + 0.4 * n2),
                              spec.tint[2] * (0.93 + 0.1 * n1) + (j - 0.5) * 0.04);
      img.Set(x, y, c[0], c[1], c[2]);
    }
  }
  // Nuclei: small dark purple discs over tissue.
  {
    Rng nrng(Hash(spec.seed, 0x2c1e));
    const auto count = static_cast<std::size_t>(static_cast<double>(tissue_px) / 380.0);
    for (std::size_t i = 0; i < count; ++i) {
      const double cx = nrng.Uniform(0, w), cy = nrng.Uniform(0, h);
      const double rad = nrng.Uniform(2.2, 4.5);
      const auto col = HsvToRgb(nrng.Uniform(262, 282), nrng.Uniform(0.45, 0.65),
                                nrng.Uniform(0.32, 0.45));
      const int x0 = std::max(0, static_cast<int>(cx - rad));
      const int x1 = std::min(w - 1, static_cast<int>(cx + rad) + 1);
      const int y0 = std::max(0, static_cast<int>(cy - rad));
      const int y1 = std::min(h - 1, static_cast<int>(cy + rad) + 1);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
          if (dx * dx + dy * dy <= rad * rad && out.truth.At(x, y) != kUnlabeled) {
            img.Set(x, y, col[0], col[1], col[2]);
          }
        }
      }
    }
  }
  const Raster tissue_img = img;

  // Box blur source for blur regions (summed-area table per channel).
  constexpr int kBlurRadius = 7;
  std::vector<std::uint64_t> sat;
  auto sat_at = [&](int x, int y, int c) -> std::uint64_t& {
    return sat[(static_cast<std::size_t>(y) * (w + 1) + x) * 3 + c];
  };
  bool have_blur = false;
  for (const auto& b : blobs) have_blur |= b.class_id == static_cast<int>(ClassId::kBlur);
  if (have_blur) {
    sat.assign(static_cast<std::size_t>(w + 1) * (h + 1) * 3, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::uint8_t* p = tissue_img.Pixel(x, y);
        for (int c = 0; c < 3; ++c) {
          sat_at(x + 1, y + 1, c) =
              p[c] + sat_at(x, y + 1, c) + sat_at(x + 1, y, c) - sat_at(x, y, c);
        }
      }
    }
  }

  for (std::size_t bi = 0; bi < blobs.size(); ++bi) {
    const Blob& b = blobs[bi].blob;
    const auto cls = static_cast<ClassId>(blobs[bi].class_id);
    const std::uint64_t bseed = Hash(spec.seed, 0xb10b, bi);
    Rng brng(bseed);
    // Damage: punched holes. Fold: ridge orientation.
    std::vector<Blob> holes;
    if (cls == ClassId::kDamage) {
      const double area = kPi * b.rx * b.ry;
      double covered = 0;
      while (covered < 0.38 * area) {
        const double rr = brng.Uniform(7, 20);
        const double ang = brng.Uniform(0, 2 * kPi);
        const double rad = std::sqrt(brng.Uniform()) * 0.95;
        holes.push_back(RandomBlob(brng, b.cx + rad * b.rx * std::cos(ang),
                                   b.cy + rad * b.ry * std::sin(ang), rr,
                                   rr * brng.Uniform(0.4, 1.0), 0.2));
        covered += kPi * rr * rr * 0.7;
      }
    }
    const double ridge_angle = brng.Uniform(0, kPi);
    const double ridge_period = brng.Uniform(14, 22);

    ScanPolygon(b.Polygon(), w, h, [&](int y, int x0, int x1) {
      for (int x = x0; x < x1; ++x) {
        if (out.truth.At(x, y) != static_cast<std::uint8_t>(cls)) continue;
        const double j = Lattice(bseed, x, y);
        const std::uint8_t* src = tissue_img.Pixel(x, y);
        switch (cls) {
          case ClassId::kBlood: {
            const double n = Fbm(bseed, x, y);
            const auto c = HsvToRgb(354 + 14 * n + (j - 0.5) * 6, 0.8 + 0.15 * n,
                                    0.58 + 0.2 * n + (j - 0.5) * 0.05);
            img.Set(x, y, c[0], c[1], c[2]);
            break;
          }
          case ClassId::kBlur: {
            const int xa = std::max(0, x - kBlurRadius), xb = std::min(w, x + kBlurRadius + 1);
            const int ya = std::max(0, y - kBlurRadius), yb = std::min(h, y + kBlurRadius + 1);
            const double n = static_cast<double>((xb - xa) * (yb - ya));
            std::uint8_t c[3];
            for (int k = 0; k < 3; ++k) {
              const std::uint64_t s =
                  sat_at(xb, yb, k) - sat_at(xa, yb, k) - sat_at(xb, ya, k) + sat_at(xa, ya, k);
              c[k] = Clamp8(static_cast<double>(s) / n);
            }
            img.Set(x, y, c[0], c[1], c[2]);
            break;
          }
          case ClassId::kBubble: {
            const double inset = b.InsetDistance(x + 0.5, y + 0.5);
            if (inset < 9.0) {
              const std::uint8_t v = Clamp8(70 + 40 * j);
              img.Set(x, y, v, v, static_cast<std::uint8_t>(std::min(255, v + 8)));
            } else {
              // Pale, washed-out tissue; still darker than the glass.
              const Hsv hsv = RgbToHsv(src[0], src[1], src[2]);
              const auto c = HsvToRgb(hsv.h, hsv.s * 0.3,
                                      std::min(0.84, hsv.v * 1.15) + (j - 0.5) * 0.02);
              img.Set(x, y, c[0], c[1], c[2]);
            }
            break;
          }
          case ClassId::kDamage: {
            bool hole = false;
            for (const auto& hb : holes) {
              if (std::abs(x - hb.cx) > hb.rx * 1.5 || std::abs(y - hb.cy) > hb.rx * 1.5) {
                continue;
              }
              if (hb.InsetDistance(x + 0.5, y + 0.5) > 0) {
                hole = true;
                break;
              }
            }
            if (hole) {
              const std::uint8_t v = static_cast<std::uint8_t>(250 + static_cast<int>(j * 6));
              img.Set(x, y, v, v, v);
            } else {
              img.Set(x, y, Clamp8(src[0] * 0.9), Clamp8(src[1] * 0.85), Clamp8(src[2] * 0.9));
            }
            break;
          }
          case ClassId::kFold: {
            const double t = (x * std::cos(ridge_angle) + y * std::sin(ridge_angle)) / ridge_period;
            const double ridge = 0.72 + 0.28 * std::abs(std::sin(t * kPi));
            const Hsv hsv = RgbToHsv(src[0], src[1], src[2]);
            const auto c = HsvToRgb(hsv.h - 15, std::min(1.0, hsv.s * 2.0 + 0.15),
                                    hsv.v * 0.65 * ridge);
            img.Set(x, y, c[0], c[1], c[2]);
            break;
          }
          default:
            break;
        }
      }
    });
  }

  out.raster = std::move(img);
  out.manifest.slide_id = slide_id;
  out.manifest.width_px = w;
  out.manifest.height_px = h;
  out.manifest.magnification = "40x";
  out.manifest.pixel_size_um = 0.25;
  out.manifest.raster_path = "slide.png";
  out.manifest.annotation_path = "annotations.json";
  return out;
}

void SaveSynthSlide(const fs::path& dir, const SynthSlide& slide) {
  SaveSlide(dir, slide.manifest, slide.raster, slide.annotations);
  WritePngGray(dir / "truth.png", slide.truth);
}

LabelRaster LoadTruth(const fs::path& slide_dir) {
  const fs::path p = slide_dir / "truth.png";
  if (!fs::is_regular_file(p)) {
    throw ValidationError("truth raster not found: " + p.string());
  }
  return ReadPngGray(p);
}

SplitCounts SplitSizes(int n, double train, double val, double test) {
  if (n < 3) throw ValidationError("corpus: need at least 3 slides");
  if (train < 0 || val < 0 || test < 0 || std::abs(train + val + test - 1.0) > 1e-6) {
    throw ValidationError("corpus: split fractions must be >= 0 and sum to 1");
  }
  SplitCounts c;
  c.val = std::max(1, static_cast<int>(std::lround(n * val)));
  c.test = std::max(1, static_cast<int>(std::lround(n * test)));
  c.train = n - c.val - c.test;
  if (c.train < 1) {
    throw ValidationError("corpus: split leaves no training slides");
  }
  return c;
}

SynthSpec CorpusSlideSpec(std::uint64_t corpus_seed, int index, int slide_size) {
  Rng rng(Hash(corpus_seed, 0xc0a9, static_cast<std::uint64_t>(index)));
  SynthSpec s;
  s.seed = Hash(corpus_seed, static_cast<std::uint64_t>(index), 7);
  s.width = slide_size;
  s.height = slide_size;
  s.tint = {rng.Uniform(312, 324), rng.Uniform(0.33, 0.42), rng.Uniform(0.66, 0.72)};
  // Three artifact classes per slide, rotating so every split sees all five.
  for (int k = 0; k < 3; ++k) {
    const int cls = 1 + (2 * index + k) % kNumArtifacts;
    s.regions.push_back({static_cast<std::uint8_t>(cls), rng.Uniform(0.08, 0.12)});
  }
  return s;
}

CorpusSummary GenerateCorpus(const CorpusOptions& options, const fs::path& root) {
  const SplitCounts counts = SplitSizes(options.n_slides, options.split[0],
                                        options.split[1], options.split[2]);
  CorpusSummary summary;
  summary.counts = counts;
  const std::array<int, 3> sizes = {counts.train, counts.val, counts.test};

  struct Job {
    int index;
    int split;
    std::string id;
  };
  std::vector<Job> jobs;
  int index = 0;
  for (int s = 0; s < 3; ++s) {
    for (int i = 0; i < sizes[s]; ++i, ++index) {
      char id[32];
      std::snprintf(id, sizeof(id), "synth%03d", index);
      jobs.push_back({index, s, id});
      summary.slide_ids[s].push_back(id);
    }
  }
  std::vector<std::vector<PatchRecord>> patches(jobs.size());
  ParallelFor(jobs.size(), options.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const SynthSlide slide =
        GenerateSlide(CorpusSlideSpec(options.seed, job.index, options.slide_size), job.id);
    const fs::path split_dir = root / kSplitNames[job.split];
    SaveSynthSlide(split_dir / "slides" / job.id, slide);
    const ForegroundMask fg = ExtractForeground(slide.raster);
    const GridPlan plan = PlanGrid(fg, &slide.truth, GridOptions{});
    patches[i] = ExtractPatches(slide.raster, job.id, plan);
  });
  for (int s = 0; s < 3; ++s) {
    std::vector<PatchRecord> split_patches;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].split != s) continue;
      for (auto& p : patches[i]) split_patches.push_back(std::move(p));
    }
    summary.patch_counts[s] =
        SavePatchDataset(split_patches, root / kSplitNames[s] / "patches");
  }

  json meta;
  meta["seed"] = options.seed;
  meta["n_slides"] = options.n_slides;
  meta["slide_size"] = options.slide_size;
  meta["split"] = options.split;
  for (int s = 0; s < 3; ++s) {
    const std::string name(kSplitNames[s]);
    meta["slides"][name] = summary.slide_ids[s];
    json pc = json::object();
    for (int k = 0; k < kNumClasses; ++k) {
      pc[std::string(kClassNames[k])] = summary.patch_counts[s][k];
    }
    meta["patch_counts"][name] = pc;
  }
  WriteJsonFile(root / "corpus.json", meta);
  return summary;
}

}  // namespace slideqc
