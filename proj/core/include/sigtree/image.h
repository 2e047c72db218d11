// Copyright 2026 The sigtree Authors
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sigtree {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major 8-bit RGB raster.
struct RawImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<Rgb> pixels;

  RawImage() = default;
  RawImage(std::uint32_t w, std::uint32_t h, Rgb fill = {})
      : width(w), height(h), pixels(std::size_t{w} * h, fill) {}

  std::size_t pixel_count() const noexcept { return std::size_t{width} * height; }
  Rgb& at(std::uint32_t x, std::uint32_t y) { return pixels[std::size_t{y} * width + x]; }
  const Rgb& at(std::uint32_t x, std::uint32_t y) const {
    return pixels[std::size_t{y} * width + x];
  }
};

// Decodes PNG, JPEG or binary PPM (P6), chosen by the file's magic bytes.
// Throws kIoError if the file cannot be read and kDecodeError otherwise.
RawImage decode_image(const std::filesystem::path& path);
RawImage decode_image(std::span<const std::uint8_t> bytes);

void write_ppm(const std::filesystem::path& path, const RawImage& image);
void write_png(const std::filesystem::path& path, const RawImage& image);

// True for extensions decode_image is expected to handle (case-insensitive).
bool has_image_extension(const std::filesystem::path& path);

}  // namespace sigtree
