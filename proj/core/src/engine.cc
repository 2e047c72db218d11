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

#include "sigtree/engine.h"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iterator>
#include <limits>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "sigtree/error.h"

namespace sigtree {
namespace {

constexpr std::uint8_t kMagic[4] = {'S', 'T', 'R', '1'};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    const std::size_t len = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(len));
  }
  return static_cast<std::uint32_t>(crc);
}

void sort_hits(std::vector<RankedHit>& hits, std::size_t k) {
  auto less = [](const RankedHit& a, const RankedHit& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.oid < b.oid);
  };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                      less);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), less);
  }
}

}  // namespace

void IndexConfig::check() const {
  if (bits_per_color < 1 || bits_per_color > Signature::kMaxBitsPerBlock) {
    throw Error(ErrorCode::kInvalidArgument, "bits per color must be in 1..64");
  }
  if (max_node < 2 || max_node > 0xffff) {
    throw Error(ErrorCode::kInvalidArgument, "max node size must be in 2..65535");
  }
  if (min_node < 1 || 2 * min_node > max_node) {
    throw Error(ErrorCode::kInvalidArgument, "min node size must satisfy 1 <= m <= M/2");
  }
  if (!(dominant_threshold >= 0.0 && dominant_threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dominant threshold must be in [0, 1)");
  }
}

STreeParams IndexConfig::tree_params() const {
  return STreeParams{palette.size(), bits_per_color, max_node, min_node};
}

Index::Index(IndexConfig config)
    : config_((config.check(), std::move(config))),
      cost_(cost_matrix(config_.palette)),
      tree_(config_.tree_params(), cost_) {}

Signature Index::encode_image(const RawImage& image) const {
  return encode(histogram(image, config_.palette, config_.dominant_threshold),
                config_.bits_per_color);
}

Oid Index::add(std::string path, const RawImage& image) {
  Histogram h = histogram(image, config_.palette, config_.dominant_threshold);
  Signature sig = encode(h, config_.bits_per_color);
  const Oid oid = records_.size();
  tree_.insert(sig, oid);
  records_.push_back(CorpusRecord{oid, std::move(path), std::move(h), std::move(sig)});
  return oid;
}

QueryResult Index::query(const RawImage& image, std::size_t k) const {
  return query(image, k, SearchOptions{config_.mode, config_.strict_coverage});
}

QueryResult Index::query(const RawImage& image, std::size_t k, SearchOptions options) const {
  const auto start = Clock::now();
  QueryResult r = query_signature(encode_image(image), k, options);
  r.wall_ms = elapsed_ms(start);
  return r;
}

QueryResult Index::query_signature(const Signature& sig, std::size_t k,
                                   SearchOptions options) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  const auto start = Clock::now();
  SearchResult found = tree_.search(sig, options);
  QueryResult r;
  r.candidate_count = found.hits.size();
  r.emd_evaluations = found.stats.emd_evaluations;
  r.coverage_tests = found.stats.coverage_tests;
  r.hits.reserve(found.hits.size());
  // The tree only filters; candidates are re-ranked by exact EMD.
  for (const LeafHit& hit : found.hits) {
    const double d = emd_signatures(sig, hit.sig, cost_);
    ++r.emd_evaluations;
    r.hits.push_back(RankedHit{hit.oid, d, records_.at(hit.oid).path});
  }
  sort_hits(r.hits, k);
  r.wall_ms = elapsed_ms(start);
  return r;
}

QueryResult Index::linear_scan(const RawImage& image, std::size_t k) const {
  const auto start = Clock::now();
  QueryResult r = linear_scan_signature(encode_image(image), k);
  r.wall_ms = elapsed_ms(start);
  return r;
}

QueryResult Index::linear_scan_signature(const Signature& sig, std::size_t k) const {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be at least 1");
  require_same_shape(sig, Signature(config_.palette.size(), config_.bits_per_color));
  const auto start = Clock::now();
  QueryResult r;
  r.candidate_count = records_.size();
  r.hits.reserve(records_.size());
  for (const CorpusRecord& rec : records_) {
    r.hits.push_back(RankedHit{rec.oid, emd_signatures(sig, rec.signature, cost_), rec.path});
    ++r.emd_evaluations;
  }
  sort_hits(r.hits, k);
  r.wall_ms = elapsed_ms(start);
  return r;
}

std::vector<std::uint8_t> Index::serialize() const {
  ByteWriter out;
  out.raw(kMagic);
  out.u32(kIndexFormatVersion);

  out.u16(static_cast<std::uint16_t>(config_.bits_per_color));
  out.u16(static_cast<std::uint16_t>(config_.max_node));
  out.u16(static_cast<std::uint16_t>(config_.min_node));
  out.f64(config_.dominant_threshold);
  out.u8(config_.mode == SearchMode::kSinglePath ? 0 : 1);
  out.u8(config_.strict_coverage ? 1 : 0);
  out.u64(config_.seed);

  const Palette& palette = config_.palette;
  out.u16(static_cast<std::uint16_t>(palette.size()));
  for (const PaletteColor& c : palette.colors()) {
    out.str16(c.name);
    out.u8(c.rgb.r);
    out.u8(c.rgb.g);
    out.u8(c.rgb.b);
  }

  out.u64(records_.size());
  for (const CorpusRecord& rec : records_) {
    out.u64(rec.oid);
    out.str32(rec.path);
    for (double v : rec.histogram.values) out.f64(v);
  }

  ByteWriter tree;
  tree_.serialize(tree);
  out.u64(tree.size());
  out.raw(tree.bytes());

  out.u32(crc32_of(out.bytes()));
  return std::move(out).take();
}

Index Index::deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw Error(ErrorCode::kCorruptIndex, "missing STR1 magic");
  }
  ByteReader in(bytes.first(bytes.size() - 4));
  in.raw(4);
  const std::uint32_t version = in.u32();
  if (version != kIndexFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch, "index format version " + std::to_string(version) +
                                                 ", expected " +
                                                 std::to_string(kIndexFormatVersion));
  }
  ByteReader trailer(bytes.last(4));
  if (trailer.u32() != crc32_of(bytes.first(bytes.size() - 4))) {
    throw Error(ErrorCode::kCorruptIndex, "checksum mismatch");
  }

  IndexConfig config;
  config.bits_per_color = in.u16();
  config.max_node = in.u16();
  config.min_node = in.u16();
  config.dominant_threshold = in.f64();
  const std::uint8_t mode = in.u8();
  if (mode > 1) throw Error(ErrorCode::kCorruptIndex, "bad search mode");
  config.mode = mode == 0 ? SearchMode::kSinglePath : SearchMode::kMultiPath;
  config.strict_coverage = in.u8() != 0;
  config.seed = in.u64();

  std::vector<PaletteColor> colors(in.u16());
  for (PaletteColor& c : colors) {
    c.name = in.str16();
    c.rgb.r = in.u8();
    c.rgb.g = in.u8();
    c.rgb.b = in.u8();
  }
  try {
    config.palette = Palette(std::move(colors));
    config.check();
  } catch (const Error& e) {
    throw Error(ErrorCode::kCorruptIndex, std::string("bad config block: ") + e.what());
  }

  Index index(std::move(config));
  const std::size_t bins = index.config_.palette.size();
  const std::uint64_t count = in.u64();
  if (count > in.remaining()) throw Error(ErrorCode::kCorruptIndex, "record count too large");
  index.records_.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    CorpusRecord& rec = index.records_[i];
    rec.oid = in.u64();
    if (rec.oid != i) throw Error(ErrorCode::kCorruptIndex, "oids are not sequential");
    rec.path = in.str32();
    rec.histogram.values.resize(bins);
    for (double& v : rec.histogram.values) v = in.f64();
  }

  const std::uint64_t tree_len = in.u64();
  if (tree_len != in.remaining()) throw Error(ErrorCode::kCorruptIndex, "tree length mismatch");
  index.tree_ = STree::deserialize(in.raw(tree_len), index.config_.tree_params(), index.cost_);
  if (index.tree_.size() != count) {
    throw Error(ErrorCode::kCorruptIndex, "tree and path table disagree on image count");
  }
  for (LeafHit& hit : index.tree_.leaf_entries()) {
    if (hit.oid >= count) throw Error(ErrorCode::kCorruptIndex, "leaf oid outside path table");
    index.records_[hit.oid].signature = std::move(hit.sig);
  }
  return index;
}

bool operator==(const Index& a, const Index& b) {
  if (!(a.config_ == b.config_) || !(a.records_ == b.records_)) return false;
  ByteWriter ta;
  ByteWriter tb;
  a.tree_.serialize(ta);
  b.tree_.serialize(tb);
  return ta.bytes() == tb.bytes();
}

void save_index(const Index& index, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = index.serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

Index load_index(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kIndexNotFound, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoError, "read failed for " + path.string());
  return Index::deserialize(bytes);
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && has_image_extension(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

BuildResult build_index(std::vector<std::filesystem::path> paths, const IndexConfig& config) {
  const auto start = Clock::now();
  std::sort(paths.begin(), paths.end());
  BuildResult result{Index(config), {}};
  for (const auto& p : paths) {
    try {
      result.index.add(p.string(), decode_image(p));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDecodeError && e.code() != ErrorCode::kIoError &&
          e.code() != ErrorCode::kEmptyImage) {
        throw;
      }
      spdlog::warn("skipping {}: {}", p.string(), e.what());
      ++result.report.skipped;
    }
  }
  if (result.index.size() == 0) {
    throw Error(ErrorCode::kNoValidImages, "none of " + std::to_string(paths.size()) +
                                               " inputs could be decoded");
  }
  result.report.indexed = result.index.size();
  result.report.emd_comparisons = result.index.tree().build_emd_evaluations();
  result.report.build_ms = elapsed_ms(start);
  spdlog::info("indexed {} images ({} skipped), {} EMD comparisons, {:.1f} ms",
               result.report.indexed, result.report.skipped, result.report.emd_comparisons,
               result.report.build_ms);
  return result;
}

BuildResult build_index(std::span<const NamedImage> images, const IndexConfig& config) {
  if (images.empty()) throw Error(ErrorCode::kNoValidImages, "no images given");
  const auto start = Clock::now();
  BuildResult result{Index(config), {}};
  for (const NamedImage& img : images) result.index.add(img.path, img.image);
  result.report.indexed = result.index.size();
  result.report.emd_comparisons = result.index.tree().build_emd_evaluations();
  result.report.build_ms = elapsed_ms(start);
  return result;
}

}  // namespace sigtree
