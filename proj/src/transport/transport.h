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

#ifndef DLSM_TRANSPORT_TRANSPORT_H_
#define DLSM_TRANSPORT_TRANSPORT_H_

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "transport/frame.h"

namespace dlsm {

// Serves one request. Runs on a transport-owned thread; may block and may
// issue nested calls.
using Handler = std::function<Frame(const Frame& request)>;

// A node's view of the network. Each component owns one Transport; its
// identity is the source side of every call it makes.
class Transport {
 public:
  virtual ~Transport() = default;

  // Sends request to `to` and waits for the response with the same
  // request_id. request_id is assigned by the transport.
  virtual Result<Frame> Call(const std::string& to, Frame request,
                             std::chrono::milliseconds timeout) = 0;

  // Starts serving `address`. For sockets, "host:0" binds an ephemeral
  // port; the actual address is written to *bound.
  virtual Status Listen(const std::string& address, Handler handler,
                        std::string* bound) = 0;

  // Stops serving. Calls in progress finish; new calls fail with
  // ConnectionFailed.
  virtual void Unlisten(const std::string& address) = 0;

  virtual std::string name() const = 0;
};

// Convenience wrapper: Call + ParseResponse.
Result<std::string> CallBody(Transport& t, const std::string& to, Opcode op,
                             uint64_t epoch, std::string payload,
                             std::chrono::milliseconds timeout);

// Routes requests by opcode. Unknown or unregistered opcodes get a kError
// response carrying UnknownOpcode.
class Dispatcher {
 public:
  using Method = std::function<Result<std::string>(const Frame& request)>;

  void Register(Opcode op, Method m) {
    methods_[static_cast<uint16_t>(op)] = std::move(m);
  }

  Frame Handle(const Frame& request) const;

  Handler AsHandler() const {
    return [this](const Frame& f) { return Handle(f); };
  }

 private:
  std::map<uint16_t, Method> methods_;
};

}  // namespace dlsm

#endif  // DLSM_TRANSPORT_TRANSPORT_H_
