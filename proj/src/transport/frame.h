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

#ifndef DLSM_TRANSPORT_FRAME_H_
#define DLSM_TRANSPORT_FRAME_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "common/status.h"

namespace dlsm {

// Frame layout (little-endian, see docs/protocol.md):
//
//   u32 magic | u32 frame_len | u64 request_id | u16 kind | u64 epoch |
//   payload[frame_len - 26]
//
// frame_len counts the header and the payload.
inline constexpr uint32_t kFrameMagic = 0x4E564C53;
inline constexpr size_t kFrameHeaderSize = 26;
inline constexpr size_t kMaxFrameBytes = 8u << 20;
inline constexpr uint16_t kResponseBit = 0x8000;

enum class Opcode : uint16_t {
  kEcho = 0x0001,
  kPing = 0x0002,

  kPutObject = 0x0100,
  kGetObject = 0x0101,
  kDeleteObject = 0x0102,
  kListObjects = 0x0103,
  kAppendLog = 0x0104,
  kReadLog = 0x0105,
  kTruncateLog = 0x0106,
  kStocStats = 0x0107,
  kObjectSize = 0x0108,

  kPut = 0x0200,
  kGet = 0x0201,
  kDelete = 0x0202,
  kScan = 0x0203,
  kAdoptRange = 0x0204,
  kReleaseRange = 0x0205,
  kLtcStats = 0x0206,
  kFlush = 0x0207,
  kQuiesce = 0x0208,

  kCompact = 0x0300,
  kWorkerStats = 0x0301,

  kGetView = 0x0400,
  kReportLoad = 0x0401,
  kAddLtc = 0x0402,
  kRemoveLtc = 0x0403,
  kHeartbeat = 0x0404,

  // Response to a request whose opcode the server does not know.
  kError = 0xFFFF,
};

bool IsKnownOpcode(uint16_t kind);
const char* OpcodeName(uint16_t kind);

struct Frame {
  uint64_t request_id = 0;
  uint16_t kind = 0;
  uint64_t epoch = 0;
  std::string payload;

  bool is_response() const {
    return kind == static_cast<uint16_t>(Opcode::kError) ||
           (kind & kResponseBit) != 0;
  }

  friend bool operator==(const Frame&, const Frame&) = default;
};

size_t EncodedFrameSize(const Frame& f);

// Fails with Oversize when the frame would exceed kMaxFrameBytes.
Result<std::string> EncodeFrame(const Frame& f);

// Validates magic and length from the first 8 bytes of a frame and returns
// frame_len.
Result<uint32_t> DecodeFrameLength(std::string_view prefix);

// Decodes one complete frame. Unknown request opcodes are accepted here;
// servers reject them with a kError response.
Result<Frame> DecodeFrame(std::string_view bytes);

// Response payload: u16 status | u32 msg_len | msg | body.
Frame MakeResponse(const Frame& request, const Status& status,
                   std::string_view body = {});
// Splits a response into its status and body. A non-OK status is returned
// as the error.
Result<std::string> ParseResponse(const Frame& response);

}  // namespace dlsm

#endif  // DLSM_TRANSPORT_FRAME_H_
