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

#include <gtest/gtest.h>

#include <random>

#include "sigtree/error.h"
#include "test_util.h"

namespace sigtree {
namespace {

Histogram one_bin(std::size_t n, std::size_t j, double v) {
  Histogram h{std::vector<double>(n, 0.0)};
  h.values[j] = v;
  return h;
}

TEST(Encode, FullBinSetsLastBit) {
  const Signature s = encode(one_bin(16, 0, 1.0), 10);
  EXPECT_EQ(s.to_bits().substr(0, 10), "0000000001");
  for (std::size_t j = 1; j < 16; ++j) EXPECT_EQ(s.block_popcount(j), 0u);
}

TEST(Encode, CeilingOfScaledFraction) {
  EXPECT_TRUE(encode(one_bin(4, 2, 0.37), 10).test(2, 4));
  EXPECT_TRUE(encode(one_bin(4, 2, 0.001), 10).test(2, 1));
  // 3/10 must not spill into position 4 through rounding.
  EXPECT_TRUE(encode(one_bin(4, 1, 3.0 / 10.0), 10).test(1, 3));
}

TEST(Encode, ZeroBinIsEmptyBlock) {
  const Signature s = encode(Histogram{{0.0, 1.0}}, 8);
  EXPECT_EQ(s.block_popcount(0), 0u);
  EXPECT_TRUE(s.test(1, 8));
}

TEST(WeightVector, Examples) {
  Signature s(3, 10);
  s.set(1, 4);
  const auto w = weight_vector(s);
  EXPECT_DOUBLE_EQ(w[1], 40.0);
  EXPECT_EQ(w[0], 0.0);
  for (double v : weight_vector(Signature(5, 8))) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(weight_vector(encode(Histogram{{0.5, 0.5}}, 10)), (std::vector<double>{50.0, 50.0}));
}

TEST(WeightVector, MultiBitBlocks) {
  const Signature u = Signature::from_bits("0110", 1, 4);
  try {
    weight_vector(u);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMalformedSignature);
  }
  // (2 + 3) * 100 / 4
  EXPECT_DOUBLE_EQ(weight_vector(u, BlockRule::kSummed)[0], 125.0);
}

TEST(Union, Examples) {
  const Signature a = Signature::from_bits("0100", 1, 4);
  const Signature b = Signature::from_bits("0010", 1, 4);
  EXPECT_EQ(signature_union(a, b), Signature::from_bits("0110", 1, 4));
  EXPECT_EQ(signature_union(a, a), a);
  EXPECT_EQ(signature_union(a, Signature(1, 4)), a);
  EXPECT_THROW(signature_union(a, Signature(1, 5)), Error);
}

TEST(Covers, Examples) {
  const Signature a = Signature::from_bits("0100", 1, 4);
  const Signature b = Signature::from_bits("0010", 1, 4);
  EXPECT_TRUE(covers(a, a));
  EXPECT_TRUE(covers(b, Signature(1, 4)));
  EXPECT_FALSE(covers(a, b));
  try {
    covers(a, Signature(2, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(Layout, FirstBitIsLeastSignificantBitOfFirstByte) {
  Signature s(2, 8);
  s.set(0, 1);
  s.set(1, 8);
  EXPECT_EQ(s.packed_bytes(), (std::vector<std::uint8_t>{0x01, 0x80}));
  EXPECT_EQ(s.to_hex(), "0180");

  ByteWriter w;
  s.serialize(w);
  EXPECT_EQ(w.bytes(), (std::vector<std::uint8_t>{2, 0, 8, 0, 0x01, 0x80}));
}

TEST(Layout, ByteSizeFormulaForAllShapes) {
  for (std::size_t n = 1; n <= 40; ++n) {
    for (std::size_t m = 1; m <= 64; ++m) {
      const Signature s(n, m);
      ASSERT_EQ(s.byte_size(), (n * m + 7) / 8);
      ASSERT_EQ(s.packed_bytes().size(), (n * m + 7) / 8);
    }
  }
  EXPECT_EQ(Signature(16, 8).byte_size(), 16u);
}

TEST(Layout, SerializationRoundTripAndPaddingCheck) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 20;
    const std::size_t m = 1 + rng() % 64;
    Signature s(n, m);
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t p = 1; p <= m; ++p) s.set(j, p, rng() % 2);
    }
    ByteWriter w;
    s.serialize(w);
    ByteReader r(w.bytes());
    ASSERT_EQ(Signature::deserialize(r), s);
  }
  // n = 1, m = 3 leaves five padding bits that must be zero.
  const std::vector<std::uint8_t> bad{1, 0, 3, 0, 0xf0};
  ByteReader r(bad);
  EXPECT_THROW(Signature::deserialize(r), Error);
}

TEST(Shape, Rejected) {
  EXPECT_THROW(Signature(0, 8), Error);
  EXPECT_THROW(Signature(4, 0), Error);
  EXPECT_THROW(Signature(4, 65), Error);
  EXPECT_THROW(Signature::from_bits("0101", 1, 3), Error);
  EXPECT_THROW(Signature::from_bits("01x1", 1, 4), Error);
}

TEST(SignatureProperty, WeightsInvertGridHistograms) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 300; ++t) {
    const std::size_t m = 1 + rng() % 64;
    const std::size_t n = 2 + rng() % 16;
    Histogram h{std::vector<double>(n, 0.0)};
    std::vector<std::size_t> k(n);
    for (std::size_t j = 0; j < n; ++j) {
      k[j] = rng() % (m + 1);
      h.values[j] = static_cast<double>(k[j]) / static_cast<double>(m);
    }
    const auto w = weight_vector(encode(h, m));
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_DOUBLE_EQ(w[j], 100.0 * static_cast<double>(k[j]) / static_cast<double>(m));
    }
  }
}

TEST(SignatureProperty, WeightsWithinOneStepOfHistogram) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t m = 1 + rng() % 64;
    Histogram h{std::vector<double>(16)};
    for (double& v : h.values) v = rng() % 4 == 0 ? 0.0 : u(rng);
    const Signature s = encode(h, m);
    const auto w = weight_vector(s);
    for (std::size_t j = 0; j < 16; ++j) {
      ASSERT_LE(s.block_popcount(j), 1u);
      ASSERT_LE(std::abs(w[j] - 100.0 * h.values[j]), 100.0 / m + 1e-9);
      ASSERT_EQ(w[j] == 0.0, h.values[j] == 0.0);
    }
  }
}

TEST(SignatureProperty, UnionCoversBothOperands) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 500; ++t) {
    const std::size_t m = 1 + rng() % 16;
    const Signature a = testing::random_signature(rng, 16, m);
    const Signature b = testing::random_signature(rng, 16, m);
    const Signature u = signature_union(a, b);
    ASSERT_TRUE(covers(u, a));
    ASSERT_TRUE(covers(u, b));
    ASSERT_EQ(signature_union(a, b), signature_union(b, a));
  }
}

}  // namespace
}  // namespace sigtree
