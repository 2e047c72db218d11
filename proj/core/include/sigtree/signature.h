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
#include <string>
#include <string_view>
#include <vector>

#include "sigtree/binary_io.h"
#include "sigtree/palette.h"

namespace sigtree {

// A bit string of `bins` blocks of `bits_per_block` bits. Bit positions
// inside a block are 1-based; position p of block j (0-based) is global bit
// j * bits_per_block + p - 1, stored LSB-first in little-endian bytes.
//
// Image signatures have at most one set bit per block. Internal S-tree
// entries hold unions, which may have several.
class Signature {
 public:
  static constexpr int kMaxBitsPerBlock = 64;

  Signature() = default;
  // Throws kInvalidArgument for bins == 0 or bits_per_block outside 1..64.
  Signature(std::size_t bins, std::size_t bits_per_block);

  // Parses '0'/'1' characters, leftmost = position 1 of block 0. Whitespace
  // and '|' are ignored so blocks can be separated for readability.
  static Signature from_bits(std::string_view bits, std::size_t bins,
                             std::size_t bits_per_block);

  std::size_t bins() const noexcept { return bins_; }
  std::size_t bits_per_block() const noexcept { return bits_per_block_; }
  std::size_t bit_count() const noexcept { return bins_ * bits_per_block_; }
  // ceil(bins * bits_per_block / 8)
  std::size_t byte_size() const noexcept { return (bit_count() + 7) / 8; }

  bool test(std::size_t block, std::size_t position) const;
  void set(std::size_t block, std::size_t position, bool value = true);
  std::size_t block_popcount(std::size_t block) const;
  bool is_zero() const noexcept;

  // Fails with kDimensionMismatch if shapes differ.
  Signature& operator|=(const Signature& other);

  std::vector<std::uint8_t> packed_bytes() const;
  std::string to_hex() const;
  std::string to_bits() const;

  // n (u16), m (u16), then the packed bytes.
  void serialize(ByteWriter& out) const;
  static Signature deserialize(ByteReader& in);

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const Signature&, const Signature&) = default;

 private:
  std::size_t global_bit(std::size_t block, std::size_t position) const;

  std::size_t bins_ = 0;
  std::size_t bits_per_block_ = 0;
  std::vector<std::uint64_t> words_;
};

void require_same_shape(const Signature& a, const Signature& b);

// One block per bin; bit ceil(h_j * m) is set for h_j > 0, clamped to [1, m].
Signature encode(const Histogram& h, std::size_t bits_per_block);

// How to turn a block into a weight when it has more than one bit set.
enum class BlockRule {
  kOneHot,  // image signatures: more than one bit is kMalformedSignature
  kSummed,  // union signatures: sum position * 100 / m over all set bits
};

// Per-block percentages in [0, 100] for image signatures.
std::vector<double> weight_vector(const Signature& s, BlockRule rule = BlockRule::kOneHot);

// Weights scaled by m / 100, i.e. the sum of set positions per block. These
// are small integers, which keeps the transport solver exact.
std::vector<double> position_weights(const Signature& s, BlockRule rule);

Signature signature_union(const Signature& a, const Signature& b);

// (query AND container) == query
bool covers(const Signature& container, const Signature& query);

}  // namespace sigtree
