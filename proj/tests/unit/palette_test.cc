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

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "sigtree/error.h"

namespace sigtree {
namespace {

std::size_t index_of(const Palette& p, const std::string& name) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i].name == name) return i;
  }
  ADD_FAILURE() << "no color " << name;
  return 0;
}

RawImage filled(std::uint32_t w, std::uint32_t h, const std::vector<Rgb>& runs,
                const std::vector<std::size_t>& counts) {
  RawImage img(w, h);
  std::size_t at = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (std::size_t k = 0; k < counts[r]; ++k) img.pixels[at++] = runs[r];
  }
  return img;
}

TEST(DefaultPalette, HasSixteenDistinctColors) {
  const Palette& p = default_palette();
  EXPECT_EQ(p.size(), 16u);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) EXPECT_FALSE(p[i].rgb == p[j].rgb);
  }
  EXPECT_EQ(p[index_of(p, "BLACK")].rgb, (Rgb{0, 0, 0}));
  EXPECT_EQ(p[index_of(p, "WHITE")].rgb, (Rgb{255, 255, 255}));
}

TEST(DefaultPalette, MatchesVersionedFile) {
  EXPECT_EQ(Palette::load(SIGTREE_PALETTE_FILE), default_palette());
}

TEST(Palette, RejectsDegenerateInput) {
  EXPECT_THROW(Palette({{"ONLY", {1, 2, 3}}}), Error);
  EXPECT_THROW(Palette({{"A", {1, 2, 3}}, {"B", {1, 2, 3}}}), Error);
  std::istringstream bad_channel("A,0,0,0\nB,0,0,256\n");
  EXPECT_THROW(Palette::parse(bad_channel), Error);
  std::istringstream bad_fields("A,0,0\nB,0,0,1\n");
  EXPECT_THROW(Palette::parse(bad_fields), Error);
}

TEST(Palette, ParseWriteRoundTrip) {
  std::ostringstream out;
  default_palette().write(out);
  std::istringstream in("# comment\n\n" + out.str());
  EXPECT_EQ(Palette::parse(in), default_palette());
}

TEST(QuantizePixel, ExactColorsMapToThemselves) {
  const Palette& p = default_palette();
  EXPECT_EQ(quantize_pixel({255, 0, 0}, p), index_of(p, "RED"));
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_EQ(quantize_pixel(p[k].rgb, p), k);
}

TEST(QuantizePixel, TiesGoToLowestIndex) {
  // (50,50,0) is sqrt(5000) from bins 3 and 7 and farther from the rest.
  const Palette p({{"C0", {255, 255, 255}},
                   {"C1", {0, 0, 255}},
                   {"C2", {255, 0, 255}},
                   {"C3", {100, 0, 0}},
                   {"C4", {0, 255, 255}},
                   {"C5", {200, 200, 200}},
                   {"C6", {0, 200, 200}},
                   {"C7", {0, 100, 0}}});
  EXPECT_EQ(quantize_pixel({50, 50, 0}, p), 3u);
}

TEST(QuantizePixel, PermutationCovariantWithoutTies) {
  std::mt19937_64 rng(7);
  const Palette& base = default_palette();
  std::vector<std::size_t> perm(base.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (int round = 0; round < 20; ++round) {
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<PaletteColor> shuffled;
    for (std::size_t i : perm) shuffled.push_back(base[i]);
    const Palette permuted(shuffled);
    for (int t = 0; t < 200; ++t) {
      const Rgb px{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                   static_cast<std::uint8_t>(rng())};
      std::vector<int> d2;
      for (const auto& c : base.colors()) {
        const int dr = px.r - c.rgb.r, dg = px.g - c.rgb.g, db = px.b - c.rgb.b;
        d2.push_back(dr * dr + dg * dg + db * db);
      }
      const int best = *std::min_element(d2.begin(), d2.end());
      if (std::count(d2.begin(), d2.end(), best) > 1) continue;
      EXPECT_EQ(perm[quantize_pixel(px, permuted)], quantize_pixel(px, base));
    }
  }
}

TEST(Histogram, SingleColor) {
  const Palette& p = default_palette();
  const Histogram h = histogram(RawImage(2, 2, {255, 0, 0}), p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(h.values[i], i == index_of(p, "RED") ? 1.0 : 0.0);
  }
}

TEST(Histogram, TwoColorsSplitEvenly) {
  const Palette& p = default_palette();
  const Histogram h = histogram(filled(2, 2, {{255, 0, 0}, {0, 0, 255}}, {2, 2}), p);
  EXPECT_EQ(h.values[index_of(p, "RED")], 0.5);
  EXPECT_EQ(h.values[index_of(p, "BLUE")], 0.5);
}

TEST(Histogram, DominantThresholdDropsMinorBins) {
  // 4 / 100 = 0.04 < 0.05, so BLUE goes and RED renormalizes to 1.
  const Palette& p = default_palette();
  const RawImage img = filled(10, 10, {{255, 0, 0}, {0, 0, 255}}, {96, 4});
  const Histogram h = histogram(img, p, 0.05);
  EXPECT_EQ(h.values[index_of(p, "BLUE")], 0.0);
  EXPECT_EQ(h.values[index_of(p, "RED")], 1.0);
  const Histogram all = histogram(img, p, 0.0);
  EXPECT_DOUBLE_EQ(all.values[index_of(p, "BLUE")], 0.04);
}

TEST(Histogram, ThresholdFallsBackWhenEverythingIsDropped) {
  const Palette& p = default_palette();
  const RawImage img = filled(2, 2, {{255, 0, 0}, {0, 0, 255}}, {2, 2});
  EXPECT_EQ(histogram(img, p, 0.9), histogram(img, p, 0.0));
}

TEST(Histogram, Errors) {
  EXPECT_THROW(histogram(RawImage{}, default_palette()), Error);
  try {
    histogram(RawImage(0, 5), default_palette());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyImage);
  }
  EXPECT_THROW(histogram(RawImage(1, 1), default_palette(), 1.0), Error);
  EXPECT_THROW(histogram(RawImage(1, 1), default_palette(), -0.1), Error);
}

RawImage random_image(std::mt19937_64& rng, std::uint32_t w, std::uint32_t h) {
  RawImage img(w, h);
  for (Rgb& px : img.pixels) {
    px = {static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
          static_cast<std::uint8_t>(rng())};
  }
  return img;
}

TEST(HistogramProperty, SumsToOne) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const RawImage img = random_image(rng, 1 + rng() % 40, 1 + rng() % 40);
    const double threshold = (rng() % 4) * 0.05;
    const Histogram h = histogram(img, default_palette(), threshold);
    double sum = 0;
    for (double v : h.values) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST(HistogramProperty, ConcatenationAveragesEqualSizeImages) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 50; ++t) {
    const std::uint32_t w = 1 + rng() % 30, h = 1 + rng() % 30;
    const RawImage a = random_image(rng, w, h);
    const RawImage b = random_image(rng, w, h);
    RawImage both(w, 2 * h);
    std::copy(a.pixels.begin(), a.pixels.end(), both.pixels.begin());
    std::copy(b.pixels.begin(), b.pixels.end(), both.pixels.begin() + a.pixels.size());
    const Histogram ha = histogram(a, default_palette());
    const Histogram hb = histogram(b, default_palette());
    const Histogram hab = histogram(both, default_palette());
    for (std::size_t i = 0; i < hab.size(); ++i) {
      EXPECT_NEAR(hab.values[i], 0.5 * (ha.values[i] + hb.values[i]), 1e-12);
    }
  }
}

}  // namespace
}  // namespace sigtree
