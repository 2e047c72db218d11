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

#include "sigtree/binary_io.h"

#include <limits>

namespace sigtree {

void ByteWriter::str16(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "string too long for u16 length prefix");
  }
  u16(static_cast<std::uint16_t>(s.size()));
  raw({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

void ByteWriter::str32(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::kInvalidArgument, "string too long for u32 length prefix");
  }
  u32(static_cast<std::uint32_t>(s.size()));
  raw({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::string ByteReader::str16() {
  auto bytes = raw(u16());
  return {bytes.begin(), bytes.end()};
}

std::string ByteReader::str32() {
  auto bytes = raw(u32());
  return {bytes.begin(), bytes.end()};
}

}  // namespace sigtree
