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

#ifndef SLIDEQC_PNG_IO_H_
#define SLIDEQC_PNG_IO_H_

#include <filesystem>

#include "slideqc/image.h"

namespace slideqc {

/// Reads any 8/16-bit PNG and converts it to 8-bit RGB (alpha dropped,
/// palette and grayscale expanded). Throws ValidationError on unreadable or
/// corrupt files.
Raster ReadPngRgb(const std::filesystem::path& path);

/// Reads a PNG as a single 8-bit channel. Only 8-bit grayscale files are
/// accepted since the values are class ids, not intensities.
LabelRaster ReadPngGray(const std::filesystem::path& path);

// Writers emit no timestamp or text chunks, so identical pixels produce
// identical bytes.
void WritePngRgb(const std::filesystem::path& path, const Raster& raster);
void WritePngGray(const std::filesystem::path& path, const LabelRaster& plane);

}  // namespace slideqc

#endif  // SLIDEQC_PNG_IO_H_
