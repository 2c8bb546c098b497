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

#include "common/coding.h"

#include <zlib.h>

#include <algorithm>

namespace dlsm {

namespace {
Status Truncated() { return CorruptionError("truncated input"); }
}  // namespace

Status Decoder::GetFixed8(uint8_t* v) {
  if (in_.size() < 1) return Truncated();
  *v = static_cast<uint8_t>(in_[0]);
  in_.remove_prefix(1);
  return Status::OK();
}

Status Decoder::GetFixed16(uint16_t* v) {
  if (in_.size() < 2) return Truncated();
  *v = DecodeFixed16(in_.data());
  in_.remove_prefix(2);
  return Status::OK();
}

Status Decoder::GetFixed32(uint32_t* v) {
  if (in_.size() < 4) return Truncated();
  *v = DecodeFixed32(in_.data());
  in_.remove_prefix(4);
  return Status::OK();
}

Status Decoder::GetFixed64(uint64_t* v) {
  if (in_.size() < 8) return Truncated();
  *v = DecodeFixed64(in_.data());
  in_.remove_prefix(8);
  return Status::OK();
}

Status Decoder::GetBool(bool* v) {
  uint8_t b = 0;
  DLSM_RETURN_IF_ERROR(GetFixed8(&b));
  if (b > 1) return CorruptionError("bad bool");
  *v = b == 1;
  return Status::OK();
}

Status Decoder::GetRaw(size_t n, std::string_view* v) {
  if (in_.size() < n) return Truncated();
  *v = in_.substr(0, n);
  in_.remove_prefix(n);
  return Status::OK();
}

Status Decoder::GetBytes(std::string_view* v) {
  uint32_t len = 0;
  DLSM_RETURN_IF_ERROR(GetFixed32(&len));
  return GetRaw(len, v);
}

Status Decoder::GetBytes(std::string* v) {
  std::string_view view;
  DLSM_RETURN_IF_ERROR(GetBytes(&view));
  v->assign(view.data(), view.size());
  return Status::OK();
}

uint32_t Crc32(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  const auto* p = reinterpret_cast<const Bytef*>(data.data());
  size_t left = data.size();
  while (left > 0) {
    uInt n = static_cast<uInt>(std::min<size_t>(left, 1u << 30));
    crc = crc32(crc, p, n);
    p += n;
    left -= n;
  }
  return static_cast<uint32_t>(crc);
}

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Hash64(std::string_view data, uint64_t seed) {
  // MurmurHash64A.
  constexpr uint64_t m = 0xc6a4a7935bd1e995ULL;
  constexpr int r = 47;
  uint64_t h = seed ^ (data.size() * m);
  const char* p = data.data();
  size_t n = data.size();
  while (n >= 8) {
    uint64_t k = DecodeFixed64(p);
    k *= m;
    k ^= k >> r;
    k *= m;
    h ^= k;
    h *= m;
    p += 8;
    n -= 8;
  }
  const auto* tail = reinterpret_cast<const unsigned char*>(p);
  switch (n) {
    case 7: h ^= uint64_t{tail[6]} << 48; [[fallthrough]];
    case 6: h ^= uint64_t{tail[5]} << 40; [[fallthrough]];
    case 5: h ^= uint64_t{tail[4]} << 32; [[fallthrough]];
    case 4: h ^= uint64_t{tail[3]} << 24; [[fallthrough]];
    case 3: h ^= uint64_t{tail[2]} << 16; [[fallthrough]];
    case 2: h ^= uint64_t{tail[1]} << 8; [[fallthrough]];
    case 1:
      h ^= uint64_t{tail[0]};
      h *= m;
  }
  h ^= h >> r;
  h *= m;
  h ^= h >> r;
  return h;
}

}  // namespace dlsm
