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

#ifndef DLSM_TRANSPORT_TCP_TRANSPORT_H_
#define DLSM_TRANSPORT_TCP_TRANSPORT_H_

#include <memory>
#include <string>

#include "transport/transport.h"

namespace dlsm {

// Stream-socket backing. Outgoing calls to one address share a single
// connection; responses are matched to callers by request_id. Each incoming
// request is served on its own thread so a slow handler never blocks other
// requests on the same connection.
std::shared_ptr<Transport> NewTcpTransport(std::string name);

// Splits "host:port".
Status ParseHostPort(const std::string& address, std::string* host,
                     uint16_t* port);

}  // namespace dlsm

#endif  // DLSM_TRANSPORT_TCP_TRANSPORT_H_
