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

#include "slideqc/png_io.h"

#include <png.h>

#include <cstdio>
#include <memory>
#include <string>
#include <utility>

#include "slideqc/errors.h"

namespace slideqc {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr OpenOrThrow(const std::filesystem::path& path, const char* mode,
                    bool for_write) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    const std::string msg = "cannot open " + path.string();
    if (for_write) throw RuntimeError(msg);
    throw ValidationError(msg);
  }
  return f;
}

void ErrorFn(png_structp png, png_const_charp msg) {
  auto* out = static_cast<std::string*>(png_get_error_ptr(png));
  if (out != nullptr) *out = msg;
  png_longjmp(png, 1);
}

void WarningFn(png_structp, png_const_charp) {}

// Decodes into `channels` bytes per pixel (1 or 3).
std::vector<std::uint8_t> Decode(const std::filesystem::path& path,
                                 int channels, int* width, int* height) {
  FilePtr f = OpenOrThrow(path, "rb", false);
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw ValidationError("not a PNG file: " + path.string());
  }
  std::string err;
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, ErrorFn, WarningFn);
  png_infop info = png_create_info_struct(png);
  // Buffers live on the heap behind a pointer that is not modified after
  // setjmp, so their state is well defined if libpng longjmps.
  struct Buffers {
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
  };
  const auto buf = std::make_unique<Buffers>();
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("corrupt PNG " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);

  if (channels == 1) {
    if (color != PNG_COLOR_TYPE_GRAY || depth != 8) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw ValidationError("expected 8-bit grayscale PNG: " + path.string());
    }
  } else {
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
    }
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) {
      png_set_tRNS_to_alpha(png);
      png_set_strip_alpha(png);
    }
  }
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("unsupported PNG layout: " + path.string());
  }
  buf->pixels.resize(static_cast<std::size_t>(w) * h * channels);
  buf->rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) {
    buf->rows[y] =
        buf->pixels.data() + static_cast<std::size_t>(y) * w * channels;
  }
  png_read_image(png, buf->rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  *width = static_cast<int>(w);
  *height = static_cast<int>(h);
  return std::move(buf->pixels);
}

void Encode(const std::filesystem::path& path, const std::uint8_t* pixels,
            int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw ValidationError("cannot write empty image to " + path.string());
  }
  FilePtr f = OpenOrThrow(path, "wb", true);
  std::string err;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, ErrorFn, WarningFn);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw RuntimeError("failed writing PNG " + path.string() + ": " + err);
  }
  png_init_io(png, f.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, width, height, 8,
               channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, const_cast<png_bytep>(pixels + stride * y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(f.get()) != 0) {
    throw RuntimeError("failed flushing " + path.string());
  }
}

}  // namespace

Raster ReadPngRgb(const std::filesystem::path& path) {
  Raster r;
  r.data = Decode(path, 3, &r.width, &r.height);
  return r;
}

LabelRaster ReadPngGray(const std::filesystem::path& path) {
  LabelRaster r;
  r.data = Decode(path, 1, &r.width, &r.height);
  return r;
}

void WritePngRgb(const std::filesystem::path& path, const Raster& raster) {
  Encode(path, raster.data.data(), raster.width, raster.height, 3);
}

void WritePngGray(const std::filesystem::path& path, const LabelRaster& plane) {
  Encode(path, plane.data.data(), plane.width, plane.height, 1);
}

}  // namespace slideqc
