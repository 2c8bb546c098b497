// Copyright 2026 The dlsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsm/types.h"

#include <cinttypes>
#include <cstdio>

namespace dlsm {

Status ValidateKey(std::string_view key) {
  if (key.empty()) return InvalidArgumentError("empty key");
  if (key.size() > kMaxKeyBytes) return InvalidArgumentError("key too long");
  return Status::OK();
}

Status ValidateValue(std::string_view value) {
  if (value.size() > kMaxValueBytes) {
    return InvalidArgumentError("value too long");
  }
  return Status::OK();
}

std::string ObjectId::ToString() const {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%" PRIu32 "-%" PRIu64, range_id, file_no);
  return buf;
}

std::string EscapeBytes(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (unsigned char c : bytes) {
    if (c >= 0x20 && c < 0x7f && c != '\\') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "\\x%02x", c);
      out += buf;
    }
  }
  return out;
}

}  // namespace dlsm
