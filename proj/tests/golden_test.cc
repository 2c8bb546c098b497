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

#include <gtest/gtest.h>

#include <fstream>

#include "cluster/config.h"
#include "golden_fixtures.h"

namespace dlsm {
namespace {

std::string Path(const std::string& name) {
  return std::string(DLSM_GOLDEN_DIR) + "/" + name;
}

// Returns the checked-in bytes; DLSM_UPDATE_GOLDEN=1 rewrites them first.
std::string Golden(const std::string& name, const std::string& fresh) {
  if (GetEnv("DLSM_UPDATE_GOLDEN")) {
    std::ofstream(Path(name), std::ios::binary) << fresh;
  }
  std::string bytes = golden::ReadFile(Path(name));
  EXPECT_FALSE(bytes.empty()) << "missing golden file " << name;
  return bytes;
}

TEST(GoldenTest, SstableLayout) {
  auto entries = golden::TableEntries();
  auto encoded = EncodeSst(entries, golden::TableOptions());
  ASSERT_TRUE(encoded.ok());
  std::string bytes = Golden("sst_v1.bin", encoded->bytes);
  EXPECT_EQ(bytes, encoded->bytes);

  auto decoded = DecodeSst(bytes);
  ASSERT_TRUE(decoded.ok()) << decoded.status().ToString();
  EXPECT_EQ(decoded->entries, entries);
  EXPECT_EQ(decoded->footer.format_version, kSstFormatVersion);
  EXPECT_EQ(decoded->footer.min_seq, 1u);
  EXPECT_EQ(decoded->footer.max_seq, 5u);
  EXPECT_EQ(decoded->footer.entry_count, 4u);
  EXPECT_EQ(decoded->max_key, "cherry");
  EXPECT_EQ(decoded->index.front().first_key, "apple");
  EXPECT_EQ(decoded->index.front().offset, 0u);
  // Footer: last 64 bytes, magic in the final four.
  uint32_t magic = 0;
  Decoder tail(std::string_view(bytes).substr(bytes.size() - 4));
  ASSERT_TRUE(tail.GetFixed32(&magic).ok());
  EXPECT_EQ(magic, kSstMagic);
}

TEST(GoldenTest, RequestFrameLayout) {
  Frame f = golden::PutRequest();
  std::string bytes = Golden("frame_put.bin", *EncodeFrame(f));
  ASSERT_EQ(bytes.size(), kFrameHeaderSize + 4 + 3 + 4 + 5);
  auto decoded = DecodeFrame(bytes);
  ASSERT_TRUE(decoded.ok());
  EXPECT_EQ(*decoded, f);
  EXPECT_EQ(*EncodeFrame(*decoded), bytes);
}

TEST(GoldenTest, ErrorResponseLayout) {
  Frame f = golden::NotOwnerResponse();
  std::string bytes = Golden("frame_not_owner.bin", *EncodeFrame(f));
  auto decoded = DecodeFrame(bytes);
  ASSERT_TRUE(decoded.ok());
  EXPECT_EQ(*decoded, f);
  EXPECT_EQ(decoded->kind, static_cast<uint16_t>(Opcode::kPut) | kResponseBit);
  auto body = ParseResponse(*decoded);
  EXPECT_TRUE(body.status().Is(Code::kNotOwner));
}

TEST(GoldenTest, ManifestLayout) {
  RangeManifest m = golden::Manifest();
  std::string bytes = Golden("manifest_v1.bin", m.Encode());
  auto decoded = RangeManifest::Decode(bytes);
  ASSERT_TRUE(decoded.ok()) << decoded.status().ToString();
  EXPECT_EQ(*decoded, m);
  EXPECT_EQ(decoded->Encode(), bytes);
}

TEST(GoldenTest, ViewLayout) {
  ClusterView v = golden::View();
  std::string bytes = Golden("view_v1.bin", v.Encode());
  auto decoded = ClusterView::Decode(bytes);
  ASSERT_TRUE(decoded.ok());
  EXPECT_EQ(*decoded, v);
  EXPECT_EQ(decoded->Encode(), bytes);
}

}  // namespace
}  // namespace dlsm
