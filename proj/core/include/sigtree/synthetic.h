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
#include <random>
#include <vector>

#include "sigtree/engine.h"
#include "sigtree/image.h"
#include "sigtree/palette.h"

namespace sigtree {

inline constexpr std::uint32_t kSyntheticSide = 64;

// A 64x64 image made of 1-4 contiguous regions, each filled with a distinct
// palette color, with random region sizes.
RawImage synthetic_image(std::mt19937_64& rng, const Palette& palette,
                         std::uint32_t side = kSyntheticSide);

// `count` images named synthetic/000000 ... from a generator seeded with `seed`.
std::vector<NamedImage> synthetic_corpus(std::size_t count, std::uint64_t seed,
                                         const Palette& palette);

}  // namespace sigtree
