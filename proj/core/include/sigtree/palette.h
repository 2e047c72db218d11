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
#include <iosfwd>
#include <string>
#include <vector>

#include "sigtree/image.h"

namespace sigtree {

struct PaletteColor {
  std::string name;
  Rgb rgb;

  friend bool operator==(const PaletteColor&, const PaletteColor&) = default;
};

// Ordered set of reference colors. Bin index is the position in the list and
// is persisted in index files, so the order is part of the format.
class Palette {
 public:
  // Throws kInvalidArgument unless there are at least two colors and all RGB
  // triples are distinct.
  explicit Palette(std::vector<PaletteColor> colors);

  std::size_t size() const noexcept { return colors_.size(); }
  const PaletteColor& operator[](std::size_t i) const { return colors_[i]; }
  const std::vector<PaletteColor>& colors() const noexcept { return colors_; }

  // `name,R,G,B` per line. Blank lines and lines starting with '#' are skipped.
  static Palette parse(std::istream& in);
  static Palette load(const std::filesystem::path& path);
  void write(std::ostream& out) const;

  friend bool operator==(const Palette&, const Palette&) = default;

 private:
  std::vector<PaletteColor> colors_;
};

// Sixteen colors: four achromatic levels plus twelve hues spaced 30 degrees
// apart on the HSV wheel at full saturation and value.
const Palette& default_palette();

// Normalized per-bin pixel fractions.
struct Histogram {
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  friend bool operator==(const Histogram&, const Histogram&) = default;
};

// Nearest palette color by Euclidean RGB distance, lowest index on ties.
std::size_t quantize_pixel(Rgb pixel, const Palette& palette);

// Counts pixels per bin, drops bins whose fraction is below
// `dominant_threshold`, and renormalizes the survivors. If every bin would be
// dropped the threshold is ignored.
Histogram histogram(const RawImage& image, const Palette& palette,
                    double dominant_threshold = 0.0);

}  // namespace sigtree
