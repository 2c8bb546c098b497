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

#include "common/status.h"

namespace dlsm {

const char* CodeName(Code code) {
  switch (code) {
    case Code::kOk: return "OK";
    case Code::kNotFound: return "NotFound";
    case Code::kAlreadyExists: return "AlreadyExists";
    case Code::kInvalidArgument: return "InvalidArgument";
    case Code::kCorruption: return "Corruption";
    case Code::kChecksumMismatch: return "ChecksumMismatch";
    case Code::kIoError: return "IoError";
    case Code::kOutOfSpace: return "OutOfSpace";
    case Code::kOutOfRange: return "OutOfRange";
    case Code::kNotOwner: return "NotOwner";
    case Code::kUnavailable: return "Unavailable";
    case Code::kTimeout: return "Timeout";
    case Code::kConnectionFailed: return "ConnectionFailed";
    case Code::kOversize: return "Oversize";
    case Code::kStaleEpoch: return "StaleEpoch";
    case Code::kUnknownJob: return "UnknownJob";
    case Code::kImmutableMemtable: return "ImmutableMemtable";
    case Code::kSeqRegression: return "SeqRegression";
    case Code::kEmptyMemtable: return "EmptyMemtable";
    case Code::kNoCandidates: return "NoCandidates";
    case Code::kAlreadyMember: return "AlreadyMember";
    case Code::kLastLtc: return "LastLtc";
    case Code::kUnknownLtc: return "UnknownLtc";
    case Code::kConfigError: return "ConfigError";
    case Code::kBusy: return "Busy";
    case Code::kRecoveryFailed: return "RecoveryFailed";
    case Code::kFetchFailed: return "FetchFailed";
    case Code::kWriteFailed: return "WriteFailed";
    case Code::kStorageRead: return "StorageRead";
    case Code::kStorageWrite: return "StorageWrite";
    case Code::kRealBackend: return "RealBackend";
    case Code::kMemtableFull: return "MemtableFull";
    case Code::kUnknownOpcode: return "UnknownOpcode";
    case Code::kInternal: return "Internal";
  }
  return "Unknown";
}

Status Status::Annotate(std::string_view context) const {
  if (ok()) return *this;
  std::string msg(context);
  if (!msg_.empty()) {
    msg += ": ";
    msg += msg_;
  }
  return Status(code_, std::move(msg));
}

std::string Status::ToString() const {
  if (ok()) return "OK";
  std::string out = CodeName(code_);
  if (!msg_.empty()) {
    out += ": ";
    out += msg_;
  }
  return out;
}

}  // namespace dlsm
