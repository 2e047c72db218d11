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

#include "sigtree/signature.h"

#include <bit>
#include <algorithm>
#include <cmath>

#include "sigtree/error.h"

namespace sigtree {

Signature::Signature(std::size_t bins, std::size_t bits_per_block)
    : bins_(bins), bits_per_block_(bits_per_block) {
  if (bins == 0 || bins > 0xffff) {
    throw Error(ErrorCode::kInvalidArgument, "signature needs 1..65535 bins");
  }
  if (bits_per_block < 1 || bits_per_block > kMaxBitsPerBlock) {
    throw Error(ErrorCode::kInvalidArgument, "bits per block must be in 1..64");
  }
  words_.assign((bit_count() + 63) / 64, 0);
}

Signature Signature::from_bits(std::string_view bits, std::size_t bins,
                               std::size_t bits_per_block) {
  Signature s(bins, bits_per_block);
  std::size_t g = 0;
  for (char c : bits) {
    if (c == ' ' || c == '|' || c == '\t' || c == '\n') continue;
    if (c != '0' && c != '1') {
      throw Error(ErrorCode::kInvalidArgument, "bit string may only contain 0 and 1");
    }
    if (g >= s.bit_count()) throw Error(ErrorCode::kDimensionMismatch, "bit string too long");
    if (c == '1') s.words_[g / 64] |= std::uint64_t{1} << (g % 64);
    ++g;
  }
  if (g != s.bit_count()) throw Error(ErrorCode::kDimensionMismatch, "bit string too short");
  return s;
}

std::size_t Signature::global_bit(std::size_t block, std::size_t position) const {
  if (block >= bins_ || position < 1 || position > bits_per_block_) {
    throw Error(ErrorCode::kInvalidArgument, "bit position out of range");
  }
  return block * bits_per_block_ + position - 1;
}

bool Signature::test(std::size_t block, std::size_t position) const {
  const std::size_t g = global_bit(block, position);
  return (words_[g / 64] >> (g % 64)) & 1u;
}

void Signature::set(std::size_t block, std::size_t position, bool value) {
  const std::size_t g = global_bit(block, position);
  const std::uint64_t mask = std::uint64_t{1} << (g % 64);
  if (value) {
    words_[g / 64] |= mask;
  } else {
    words_[g / 64] &= ~mask;
  }
}

std::size_t Signature::block_popcount(std::size_t block) const {
  std::size_t count = 0;
  for (std::size_t p = 1; p <= bits_per_block_; ++p) count += test(block, p) ? 1 : 0;
  return count;
}

bool Signature::is_zero() const noexcept {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

Signature& Signature::operator|=(const Signature& other) {
  require_same_shape(*this, other);
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

std::vector<std::uint8_t> Signature::packed_bytes() const {
  std::vector<std::uint8_t> out(byte_size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = static_cast<std::uint8_t>(words_[k / 8] >> (8 * (k % 8)));
  }
  return out;
}

std::string Signature::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (std::uint8_t b : packed_bytes()) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

std::string Signature::to_bits() const {
  std::string out;
  for (std::size_t j = 0; j < bins_; ++j) {
    if (j > 0) out.push_back('|');
    for (std::size_t p = 1; p <= bits_per_block_; ++p) out.push_back(test(j, p) ? '1' : '0');
  }
  return out;
}

void Signature::serialize(ByteWriter& out) const {
  out.u16(static_cast<std::uint16_t>(bins_));
  out.u16(static_cast<std::uint16_t>(bits_per_block_));
  out.raw(packed_bytes());
}

Signature Signature::deserialize(ByteReader& in) {
  const std::size_t bins = in.u16();
  const std::size_t m = in.u16();
  if (bins == 0 || m < 1 || m > kMaxBitsPerBlock) {
    throw Error(ErrorCode::kCorruptIndex, "signature header out of range");
  }
  Signature s(bins, m);
  auto bytes = in.raw(s.byte_size());
  for (std::size_t k = 0; k < bytes.size(); ++k) {
    s.words_[k / 8] |= std::uint64_t{bytes[k]} << (8 * (k % 8));
  }
  // Padding bits in the last byte must be clear.
  const std::size_t tail = s.bit_count() % 64;
  if (tail != 0 && (s.words_.back() >> tail) != 0) {
    throw Error(ErrorCode::kCorruptIndex, "signature padding bits set");
  }
  return s;
}

void require_same_shape(const Signature& a, const Signature& b) {
  if (a.bins() != b.bins() || a.bits_per_block() != b.bits_per_block()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "signature shapes differ: " + std::to_string(a.bins()) + "x" +
                    std::to_string(a.bits_per_block()) + " vs " + std::to_string(b.bins()) + "x" +
                    std::to_string(b.bits_per_block()));
  }
}

Signature encode(const Histogram& h, std::size_t bits_per_block) {
  Signature s(h.size(), bits_per_block);
  const double m = static_cast<double>(bits_per_block);
  for (std::size_t j = 0; j < h.size(); ++j) {
    const double v = h.values[j];
    if (!(v >= 0.0 && v <= 1.0 + 1e-9)) {
      throw Error(ErrorCode::kInvalidArgument, "histogram value outside [0, 1]");
    }
    if (v == 0.0) continue;
    // count/total fractions such as 3/10 land a few ulps above k/m after the
    // multiply; without the slack ceil would jump one position too far.
    const double scaled = std::ceil(v * m - 1e-9);
    const auto pos = static_cast<std::size_t>(std::clamp(scaled, 1.0, m));
    s.set(j, pos);
  }
  return s;
}

std::vector<double> position_weights(const Signature& s, BlockRule rule) {
  std::vector<double> w(s.bins(), 0.0);
  const std::size_t m = s.bits_per_block();
  const auto& words = s.words();
  for (std::size_t j = 0; j < s.bins(); ++j) {
    std::size_t sum = 0;
    std::size_t set_bits = 0;
    std::size_t g = j * m;
    for (std::size_t p = 1; p <= m; ++p, ++g) {
      if ((words[g / 64] >> (g % 64)) & 1u) {
        sum += p;
        ++set_bits;
      }
    }
    if (set_bits > 1 && rule == BlockRule::kOneHot) {
      throw Error(ErrorCode::kMalformedSignature,
                  "block " + std::to_string(j) + " has " + std::to_string(set_bits) + " set bits");
    }
    w[j] = static_cast<double>(sum);
  }
  return w;
}

std::vector<double> weight_vector(const Signature& s, BlockRule rule) {
  std::vector<double> w = position_weights(s, rule);
  const double m = static_cast<double>(s.bits_per_block());
  for (double& v : w) v = v * 100.0 / m;
  return w;
}

Signature signature_union(const Signature& a, const Signature& b) {
  Signature out = a;
  out |= b;
  return out;
}

bool covers(const Signature& container, const Signature& query) {
  require_same_shape(container, query);
  const auto& c = container.words();
  const auto& q = query.words();
  for (std::size_t i = 0; i < q.size(); ++i) {
    if ((q[i] & c[i]) != q[i]) return false;
  }
  return true;
}

}  // namespace sigtree
