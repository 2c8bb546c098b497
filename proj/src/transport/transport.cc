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

#include "transport/transport.h"

namespace dlsm {

Result<std::string> CallBody(Transport& t, const std::string& to, Opcode op,
                             uint64_t epoch, std::string payload,
                             std::chrono::milliseconds timeout) {
  Frame req;
  req.kind = static_cast<uint16_t>(op);
  req.epoch = epoch;
  req.payload = std::move(payload);
  DLSM_ASSIGN_OR_RETURN(Frame resp, t.Call(to, std::move(req), timeout));
  return ParseResponse(resp);
}

Frame Dispatcher::Handle(const Frame& request) const {
  if (!IsKnownOpcode(request.kind)) {
    return MakeResponse(request,
                        Status(Code::kUnknownOpcode,
                               "unknown opcode " + std::to_string(request.kind)));
  }
  auto it = methods_.find(request.kind);
  if (it == methods_.end()) {
    return MakeResponse(request, Status(Code::kUnknownOpcode,
                                        std::string("opcode not served: ") +
                                            OpcodeName(request.kind)));
  }
  Result<std::string> r = it->second(request);
  if (!r.ok()) return MakeResponse(request, r.status());
  Frame resp = MakeResponse(request, Status::OK(), *r);
  if (EncodedFrameSize(resp) > kMaxFrameBytes) {
    return MakeResponse(request,
                        Status(Code::kOversize, "response exceeds frame limit"));
  }
  return resp;
}

}  // namespace dlsm
