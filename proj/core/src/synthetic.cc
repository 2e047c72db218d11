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

#include "sigtree/synthetic.h"

#include <algorithm>
#include <cstdio>

namespace sigtree {
namespace {

// Plain modulo keeps the stream identical across standard libraries, unlike
// std::uniform_int_distribution. The bias is negligible for these ranges.
std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

}  // namespace

RawImage synthetic_image(std::mt19937_64& rng, const Palette& palette, std::uint32_t side) {
  const std::size_t max_regions = std::min<std::size_t>(4, palette.size());
  const std::size_t regions = 1 + below(rng, max_regions);

  std::vector<std::size_t> colors;
  while (colors.size() < regions) {
    const std::size_t c = below(rng, palette.size());
    if (std::find(colors.begin(), colors.end(), c) == colors.end()) colors.push_back(c);
  }

  // Distinct cut points split the raster into non-empty runs.
  const std::size_t total = std::size_t{side} * side;
  std::vector<std::size_t> cuts;
  while (cuts.size() + 1 < regions) {
    const std::size_t c = 1 + below(rng, total - 1);
    if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(total);

  RawImage img(side, side);
  std::size_t from = 0;
  for (std::size_t r = 0; r < regions; ++r) {
    std::fill(img.pixels.begin() + static_cast<std::ptrdiff_t>(from),
              img.pixels.begin() + static_cast<std::ptrdiff_t>(cuts[r]), palette[colors[r]].rgb);
    from = cuts[r];
  }
  return img;
}

std::vector<NamedImage> synthetic_corpus(std::size_t count, std::uint64_t seed,
                                         const Palette& palette) {
  std::mt19937_64 rng(seed);
  std::vector<NamedImage> out;
  out.reserve(count);
  char name[32];
  for (std::size_t i = 0; i < count; ++i) {
    std::snprintf(name, sizeof(name), "synthetic/%06zu", i);
    out.push_back(NamedImage{name, synthetic_image(rng, palette)});
  }
  return out;
}

}  // namespace sigtree
