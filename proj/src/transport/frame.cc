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

#include "transport/frame.h"

#include "common/coding.h"

namespace dlsm {

bool IsKnownOpcode(uint16_t kind) {
  switch (static_cast<Opcode>(kind)) {
    case Opcode::kEcho:
    case Opcode::kPing:
    case Opcode::kPutObject:
    case Opcode::kGetObject:
    case Opcode::kDeleteObject:
    case Opcode::kListObjects:
    case Opcode::kAppendLog:
    case Opcode::kReadLog:
    case Opcode::kTruncateLog:
    case Opcode::kStocStats:
    case Opcode::kObjectSize:
    case Opcode::kPut:
    case Opcode::kGet:
    case Opcode::kDelete:
    case Opcode::kScan:
    case Opcode::kAdoptRange:
    case Opcode::kReleaseRange:
    case Opcode::kLtcStats:
    case Opcode::kFlush:
    case Opcode::kQuiesce:
    case Opcode::kCompact:
    case Opcode::kWorkerStats:
    case Opcode::kGetView:
    case Opcode::kReportLoad:
    case Opcode::kAddLtc:
    case Opcode::kRemoveLtc:
    case Opcode::kHeartbeat:
      return true;
    case Opcode::kError:
      return false;
  }
  return false;
}

const char* OpcodeName(uint16_t kind) {
  switch (static_cast<Opcode>(kind & ~kResponseBit)) {
    case Opcode::kEcho: return "ECHO";
    case Opcode::kPing: return "PING";
    case Opcode::kPutObject: return "PUT_OBJECT";
    case Opcode::kGetObject: return "GET_OBJECT";
    case Opcode::kDeleteObject: return "DELETE_OBJECT";
    case Opcode::kListObjects: return "LIST_OBJECTS";
    case Opcode::kAppendLog: return "APPEND_LOG";
    case Opcode::kReadLog: return "READ_LOG";
    case Opcode::kTruncateLog: return "TRUNCATE_LOG";
    case Opcode::kStocStats: return "STOC_STATS";
    case Opcode::kObjectSize: return "OBJECT_SIZE";
    case Opcode::kPut: return "PUT";
    case Opcode::kGet: return "GET";
    case Opcode::kDelete: return "DELETE";
    case Opcode::kScan: return "SCAN";
    case Opcode::kAdoptRange: return "ADOPT_RANGE";
    case Opcode::kReleaseRange: return "RELEASE_RANGE";
    case Opcode::kLtcStats: return "LTC_STATS";
    case Opcode::kFlush: return "FLUSH";
    case Opcode::kQuiesce: return "QUIESCE";
    case Opcode::kCompact: return "COMPACT";
    case Opcode::kWorkerStats: return "WORKER_STATS";
    case Opcode::kGetView: return "GET_VIEW";
    case Opcode::kReportLoad: return "REPORT_LOAD";
    case Opcode::kAddLtc: return "ADD_LTC";
    case Opcode::kRemoveLtc: return "REMOVE_LTC";
    case Opcode::kHeartbeat: return "HEARTBEAT";
    default: break;
  }
  return kind == static_cast<uint16_t>(Opcode::kError) ? "ERROR" : "UNKNOWN";
}

size_t EncodedFrameSize(const Frame& f) {
  return kFrameHeaderSize + f.payload.size();
}

Result<std::string> EncodeFrame(const Frame& f) {
  size_t len = EncodedFrameSize(f);
  if (len > kMaxFrameBytes) {
    return Status(Code::kOversize, "frame of " + std::to_string(len) +
                                       " bytes exceeds limit");
  }
  std::string out;
  out.reserve(len);
  PutFixed32(&out, kFrameMagic);
  PutFixed32(&out, static_cast<uint32_t>(len));
  PutFixed64(&out, f.request_id);
  PutFixed16(&out, f.kind);
  PutFixed64(&out, f.epoch);
  out.append(f.payload);
  return out;
}

Result<uint32_t> DecodeFrameLength(std::string_view prefix) {
  if (prefix.size() < 8) return CorruptionError("short frame prefix");
  if (DecodeFixed32(prefix.data()) != kFrameMagic) {
    return CorruptionError("bad frame magic");
  }
  uint32_t len = DecodeFixed32(prefix.data() + 4);
  if (len < kFrameHeaderSize) return CorruptionError("frame_len below header");
  if (len > kMaxFrameBytes) {
    return Status(Code::kOversize, "incoming frame exceeds limit");
  }
  return len;
}

Result<Frame> DecodeFrame(std::string_view bytes) {
  DLSM_ASSIGN_OR_RETURN(uint32_t len, DecodeFrameLength(bytes));
  if (len != bytes.size()) return CorruptionError("frame_len mismatch");
  Frame f;
  f.request_id = DecodeFixed64(bytes.data() + 8);
  f.kind = DecodeFixed16(bytes.data() + 16);
  f.epoch = DecodeFixed64(bytes.data() + 18);
  f.payload.assign(bytes.substr(kFrameHeaderSize));
  return f;
}

Frame MakeResponse(const Frame& request, const Status& status,
                   std::string_view body) {
  Frame r;
  r.request_id = request.request_id;
  r.kind = IsKnownOpcode(request.kind)
               ? static_cast<uint16_t>(request.kind | kResponseBit)
               : static_cast<uint16_t>(Opcode::kError);
  r.epoch = request.epoch;
  PutFixed16(&r.payload, static_cast<uint16_t>(status.code()));
  PutBytes(&r.payload, status.message());
  r.payload.append(body);
  return r;
}

Result<std::string> ParseResponse(const Frame& response) {
  Decoder d(response.payload);
  uint16_t code = 0;
  std::string msg;
  DLSM_RETURN_IF_ERROR(d.GetFixed16(&code));
  DLSM_RETURN_IF_ERROR(d.GetBytes(&msg));
  if (code != 0) return Status(static_cast<Code>(code), std::move(msg));
  return std::string(d.rest());
}

}  // namespace dlsm
