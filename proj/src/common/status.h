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

#ifndef DLSM_COMMON_STATUS_H_
#define DLSM_COMMON_STATUS_H_

#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace dlsm {

// Error codes shared by every component. The numeric values travel on the
// wire and through the C API, so existing values must never be renumbered.
enum class Code : uint16_t {
  kOk = 0,
  kNotFound = 1,
  kAlreadyExists = 2,
  kInvalidArgument = 3,
  kCorruption = 4,
  kChecksumMismatch = 5,
  kIoError = 6,
  kOutOfSpace = 7,
  kOutOfRange = 8,
  kNotOwner = 9,
  kUnavailable = 10,
  kTimeout = 11,
  kConnectionFailed = 12,
  kOversize = 13,
  kStaleEpoch = 14,
  kUnknownJob = 15,
  kImmutableMemtable = 16,
  kSeqRegression = 17,
  kEmptyMemtable = 18,
  kNoCandidates = 19,
  kAlreadyMember = 20,
  kLastLtc = 21,
  kUnknownLtc = 22,
  kConfigError = 23,
  kBusy = 24,
  kRecoveryFailed = 25,
  kFetchFailed = 26,
  kWriteFailed = 27,
  kStorageRead = 28,
  kStorageWrite = 29,
  kRealBackend = 30,
  kMemtableFull = 31,
  kUnknownOpcode = 32,
  kInternal = 33,
};

const char* CodeName(Code code);

class Status {
 public:
  Status() = default;
  Status(Code code, std::string msg) : code_(code), msg_(std::move(msg)) {}

  static Status OK() { return Status(); }

  bool ok() const { return code_ == Code::kOk; }
  Code code() const { return code_; }
  const std::string& message() const { return msg_; }

  bool Is(Code c) const { return code_ == c; }

  // Prefixes the message with additional context, keeping the code.
  Status Annotate(std::string_view context) const;

  std::string ToString() const;

  friend bool operator==(const Status& a, const Status& b) {
    return a.code_ == b.code_ && a.msg_ == b.msg_;
  }

 private:
  Code code_ = Code::kOk;
  std::string msg_;
};

#define DLSM_STATUS_CTOR(Name, CodeValue)                      \
  inline Status Name(std::string msg = {}) {                   \
    return Status(Code::CodeValue, std::move(msg));            \
  }

DLSM_STATUS_CTOR(NotFoundError, kNotFound)
DLSM_STATUS_CTOR(AlreadyExistsError, kAlreadyExists)
DLSM_STATUS_CTOR(InvalidArgumentError, kInvalidArgument)
DLSM_STATUS_CTOR(CorruptionError, kCorruption)
DLSM_STATUS_CTOR(ChecksumMismatchError, kChecksumMismatch)
DLSM_STATUS_CTOR(IoError, kIoError)
DLSM_STATUS_CTOR(OutOfRangeError, kOutOfRange)
DLSM_STATUS_CTOR(UnavailableError, kUnavailable)
DLSM_STATUS_CTOR(InternalError, kInternal)

#undef DLSM_STATUS_CTOR

// Either a value or a non-OK Status.
template <typename T>
class [[nodiscard]] Result {
 public:
  Result(T value) : rep_(std::move(value)) {}  // NOLINT
  Result(Status status) : rep_(std::move(status)) {  // NOLINT
    assert(!std::get<Status>(rep_).ok());
  }

  bool ok() const { return std::holds_alternative<T>(rep_); }

  const Status& status() const {
    static const Status kOkStatus;
    return ok() ? kOkStatus : std::get<Status>(rep_);
  }

  T& value() & { return std::get<T>(rep_); }
  const T& value() const& { return std::get<T>(rep_); }
  T&& value() && { return std::get<T>(std::move(rep_)); }

  T& operator*() & { return value(); }
  const T& operator*() const& { return value(); }
  T&& operator*() && { return std::move(*this).value(); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

 private:
  std::variant<T, Status> rep_;
};

#define DLSM_CONCAT_INNER_(a, b) a##b
#define DLSM_CONCAT_(a, b) DLSM_CONCAT_INNER_(a, b)

#define DLSM_RETURN_IF_ERROR(expr)        \
  do {                                    \
    ::dlsm::Status _st = (expr);          \
    if (!_st.ok()) return _st;            \
  } while (0)

#define DLSM_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                                \
  if (!tmp.ok()) return tmp.status();               \
  lhs = std::move(tmp).value()

#define DLSM_ASSIGN_OR_RETURN(lhs, expr) \
  DLSM_ASSIGN_OR_RETURN_IMPL_(DLSM_CONCAT_(_result_, __LINE__), lhs, expr)

}  // namespace dlsm

#endif  // DLSM_COMMON_STATUS_H_
