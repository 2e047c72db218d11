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

#include "sigtree/palette.h"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "sigtree/error.h"

namespace sigtree {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::uint8_t parse_channel(const std::string& field, std::size_t line_no) {
  const std::string t = trim(field);
  std::size_t used = 0;
  int v = -1;
  try {
    v = std::stoi(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || v < 0 || v > 255) {
    throw Error(ErrorCode::kInvalidArgument,
                "palette line " + std::to_string(line_no) + ": bad channel '" + t + "'");
  }
  return static_cast<std::uint8_t>(v);
}

}  // namespace

Palette::Palette(std::vector<PaletteColor> colors) : colors_(std::move(colors)) {
  if (colors_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "palette needs at least two colors");
  }
  if (colors_.size() > 0xffff) {
    throw Error(ErrorCode::kInvalidArgument, "palette too large");
  }
  for (std::size_t i = 0; i < colors_.size(); ++i) {
    for (std::size_t j = i + 1; j < colors_.size(); ++j) {
      if (colors_[i].rgb == colors_[j].rgb) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate palette color: " + colors_[i].name + " and " + colors_[j].name);
      }
    }
  }
}

Palette Palette::parse(std::istream& in) {
  std::vector<PaletteColor> colors;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(t);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) {
      throw Error(ErrorCode::kInvalidArgument,
                  "palette line " + std::to_string(line_no) + ": expected name,R,G,B");
    }
    colors.push_back({trim(fields[0]),
                      {parse_channel(fields[1], line_no), parse_channel(fields[2], line_no),
                       parse_channel(fields[3], line_no)}});
  }
  return Palette(std::move(colors));
}

Palette Palette::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open palette file " + path.string());
  return parse(in);
}

void Palette::write(std::ostream& out) const {
  for (const auto& c : colors_) {
    out << c.name << ',' << int{c.rgb.r} << ',' << int{c.rgb.g} << ',' << int{c.rgb.b} << '\n';
  }
}

const Palette& default_palette() {
  // Keep in sync with core/data/default_palette.csv.
  static const Palette palette({
      {"BLACK", {0, 0, 0}},
      {"SILVER", {192, 192, 192}},
      {"WHITE", {255, 255, 255}},
      {"GRAY", {128, 128, 128}},
      {"RED", {255, 0, 0}},
      {"ORANGE", {255, 128, 0}},
      {"YELLOW", {255, 255, 0}},
      {"LIME GREEN", {128, 255, 0}},
      {"GREEN", {0, 255, 0}},
      {"TURQUOISE", {0, 255, 128}},
      {"CYAN", {0, 255, 255}},
      {"OCEAN", {0, 128, 255}},
      {"BLUE", {0, 0, 255}},
      {"VIOLET", {128, 0, 255}},
      {"MAGENTA", {255, 0, 255}},
      {"RASPBERRY", {255, 0, 128}},
  });
  return palette;
}

std::size_t quantize_pixel(Rgb pixel, const Palette& palette) {
  std::size_t best = 0;
  int best_d2 = -1;
  for (std::size_t i = 0; i < palette.size(); ++i) {
    const Rgb c = palette[i].rgb;
    const int dr = int{pixel.r} - c.r;
    const int dg = int{pixel.g} - c.g;
    const int db = int{pixel.b} - c.b;
    const int d2 = dr * dr + dg * dg + db * db;
    if (best_d2 < 0 || d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

Histogram histogram(const RawImage& image, const Palette& palette, double dominant_threshold) {
  if (!(dominant_threshold >= 0.0 && dominant_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dominant threshold must be in [0, 1)");
  }
  const std::size_t total = image.pixel_count();
  if (total == 0) throw Error(ErrorCode::kEmptyImage, "image has no pixels");
  if (image.pixels.size() != total) {
    throw Error(ErrorCode::kInvalidArgument, "pixel buffer does not match width x height");
  }

  std::vector<std::size_t> counts(palette.size(), 0);
  // Most images repeat colors heavily; remember the last lookup.
  Rgb last = image.pixels.front();
  std::size_t last_bin = quantize_pixel(last, palette);
  for (const Rgb& p : image.pixels) {
    if (!(p == last)) {
      last = p;
      last_bin = quantize_pixel(p, palette);
    }
    ++counts[last_bin];
  }

  auto normalized = [&](double threshold) {
    std::size_t kept = 0;
    std::vector<std::size_t> survivors(counts.size(), 0);
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double fraction = static_cast<double>(counts[i]) / static_cast<double>(total);
      if (counts[i] > 0 && fraction >= threshold) {
        survivors[i] = counts[i];
        kept += counts[i];
      }
    }
    Histogram h{std::vector<double>(counts.size(), 0.0)};
    if (kept == 0) return h;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      h.values[i] = static_cast<double>(survivors[i]) / static_cast<double>(kept);
    }
    return h;
  };

  Histogram h = normalized(dominant_threshold);
  bool any = false;
  for (double v : h.values) any = any || v > 0.0;
  return any ? h : normalized(0.0);
}

}  // namespace sigtree
