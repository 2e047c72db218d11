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

#include "sigtree/error.h"

namespace sigtree {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyImage: return "EmptyImage";
    case ErrorCode::kDecodeError: return "DecodeError";
    case ErrorCode::kMalformedSignature: return "MalformedSignature";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kZeroMass: return "ZeroMass";
    case ErrorCode::kDuplicateOid: return "DuplicateOid";
    case ErrorCode::kNotOverfull: return "NotOverfull";
    case ErrorCode::kIndexNotFound: return "IndexNotFound";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kCorruptIndex: return "CorruptIndex";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kNoValidImages: return "NoValidImages";
  }
  return "Unknown";
}

}  // namespace sigtree
