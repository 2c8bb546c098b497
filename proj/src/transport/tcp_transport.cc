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

#include "transport/tcp_transport.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <condition_variable>
#include <cstring>
#include <future>
#include <map>
#include <mutex>
#include <thread>
#include <vector>

namespace dlsm {

Status ParseHostPort(const std::string& address, std::string* host,
                     uint16_t* port) {
  size_t colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    return InvalidArgumentError("expected host:port, got '" + address + "'");
  }
  *host = address.substr(0, colon);
  char* end = nullptr;
  unsigned long p = std::strtoul(address.c_str() + colon + 1, &end, 10);
  if (end == address.c_str() + colon + 1 || *end != '\0' || p > 65535) {
    return InvalidArgumentError("bad port in '" + address + "'");
  }
  *port = static_cast<uint16_t>(p);
  return Status::OK();
}

namespace {

Status ErrnoStatus(Code code, const std::string& what) {
  return Status(code, what + ": " + std::strerror(errno));
}

bool WriteAll(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<size_t>(n));
  }
  return true;
}

bool ReadAll(int fd, char* buf, size_t len) {
  while (len > 0) {
    ssize_t n = ::recv(fd, buf, len, 0);
    if (n == 0) return false;
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    buf += n;
    len -= static_cast<size_t>(n);
  }
  return true;
}

// Reads one frame. Returns an error on EOF or a malformed stream.
Result<Frame> ReadFrame(int fd) {
  char prefix[8];
  if (!ReadAll(fd, prefix, sizeof(prefix))) {
    return Status(Code::kConnectionFailed, "connection closed");
  }
  DLSM_ASSIGN_OR_RETURN(uint32_t len,
                        DecodeFrameLength(std::string_view(prefix, 8)));
  std::string buf(len, '\0');
  std::memcpy(buf.data(), prefix, 8);
  if (!ReadAll(fd, buf.data() + 8, len - 8)) {
    return Status(Code::kConnectionFailed, "connection closed mid-frame");
  }
  return DecodeFrame(buf);
}

void SetNoDelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

Result<int> Connect(const std::string& address) {
  std::string host;
  uint16_t port = 0;
  DLSM_RETURN_IF_ERROR(ParseHostPort(address, &host, &port));
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  std::string port_str = std::to_string(port);
  if (::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &res) != 0 ||
      res == nullptr) {
    return Status(Code::kConnectionFailed, "cannot resolve " + address);
  }
  int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    ::freeaddrinfo(res);
    return ErrnoStatus(Code::kConnectionFailed, "socket");
  }
  int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) {
    Status s = ErrnoStatus(Code::kConnectionFailed, "connect " + address);
    ::close(fd);
    return s;
  }
  SetNoDelay(fd);
  return fd;
}

// Counts detached worker threads so shutdown can wait for them.
class ThreadTracker {
 public:
  void Enter() {
    std::lock_guard<std::mutex> l(mu_);
    ++active_;
  }
  void Exit() {
    std::lock_guard<std::mutex> l(mu_);
    if (--active_ == 0) cv_.notify_all();
  }
  void WaitIdle() {
    std::unique_lock<std::mutex> l(mu_);
    cv_.wait(l, [&] { return active_ == 0; });
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int active_ = 0;
};

// Outgoing multiplexed connection.
class ClientConnection : public std::enable_shared_from_this<ClientConnection> {
 public:
  explicit ClientConnection(int fd) : fd_(fd) {}
  ~ClientConnection() {
    if (reader_.joinable()) {
      Shutdown();
      if (reader_.get_id() == std::this_thread::get_id()) {
        reader_.detach();
      } else {
        reader_.join();
      }
    }
    ::close(fd_);
  }

  void Start() {
    reader_ = std::thread([self = weak_from_this(), fd = fd_] {
      for (;;) {
        Result<Frame> f = ReadFrame(fd);
        auto conn = self.lock();
        if (!conn) return;
        if (!f.ok()) {
          conn->FailAll(Status(Code::kConnectionFailed, f.status().message()));
          return;
        }
        conn->Complete(std::move(*f));
      }
    });
  }

  bool broken() const { return broken_.load(); }

  Result<Frame> Call(const Frame& request, std::chrono::milliseconds timeout) {
    DLSM_ASSIGN_OR_RETURN(std::string wire, EncodeFrame(request));
    auto promise = std::make_shared<std::promise<Result<Frame>>>();
    auto future = promise->get_future();
    {
      std::lock_guard<std::mutex> l(mu_);
      if (broken_) return Status(Code::kConnectionFailed, "connection broken");
      pending_[request.request_id] = promise;
    }
    bool sent;
    {
      std::lock_guard<std::mutex> l(write_mu_);
      sent = WriteAll(fd_, wire);
    }
    if (!sent) {
      Shutdown();
      std::lock_guard<std::mutex> l(mu_);
      pending_.erase(request.request_id);
      return Status(Code::kConnectionFailed, "send failed");
    }
    if (future.wait_for(timeout) != std::future_status::ready) {
      std::lock_guard<std::mutex> l(mu_);
      pending_.erase(request.request_id);
      return Status(Code::kTimeout, "call timed out");
    }
    return future.get();
  }

  void Shutdown() {
    broken_ = true;
    ::shutdown(fd_, SHUT_RDWR);
  }

 private:
  void Complete(Frame f) {
    std::shared_ptr<std::promise<Result<Frame>>> p;
    {
      std::lock_guard<std::mutex> l(mu_);
      auto it = pending_.find(f.request_id);
      if (it == pending_.end()) return;  // caller gave up
      p = std::move(it->second);
      pending_.erase(it);
    }
    p->set_value(std::move(f));
  }

  void FailAll(const Status& s) {
    std::map<uint64_t, std::shared_ptr<std::promise<Result<Frame>>>> pending;
    {
      std::lock_guard<std::mutex> l(mu_);
      broken_ = true;
      pending.swap(pending_);
    }
    for (auto& [id, p] : pending) p->set_value(s);
  }

  int fd_;
  std::thread reader_;
  std::atomic<bool> broken_{false};
  std::mutex mu_;
  std::mutex write_mu_;
  std::map<uint64_t, std::shared_ptr<std::promise<Result<Frame>>>> pending_;
};

// Incoming connection state shared with request threads.
struct ServerConnection {
  int fd;
  std::mutex write_mu;
  ~ServerConnection() { ::close(fd); }
};

class Listener {
 public:
  Listener(int fd, Handler handler)
      : fd_(fd), handler_(std::make_shared<Handler>(std::move(handler))) {}

  void Start() {
    accept_thread_ = std::thread([this] { AcceptLoop(); });
  }

  void Stop() {
    stopping_ = true;
    ::shutdown(fd_, SHUT_RDWR);
    ::close(fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    {
      std::lock_guard<std::mutex> l(mu_);
      for (auto& c : conns_) ::shutdown(c->fd, SHUT_RDWR);
    }
    for (auto& t : readers_) t.join();
    tracker_.WaitIdle();
  }

 private:
  void AcceptLoop() {
    while (!stopping_) {
      pollfd p{fd_, POLLIN, 0};
      int rc = ::poll(&p, 1, 100);
      if (rc <= 0) continue;
      int cfd = ::accept(fd_, nullptr, nullptr);
      if (cfd < 0) continue;
      SetNoDelay(cfd);
      auto conn = std::make_shared<ServerConnection>();
      conn->fd = cfd;
      std::lock_guard<std::mutex> l(mu_);
      if (stopping_) {
        ::shutdown(cfd, SHUT_RDWR);
        continue;
      }
      conns_.push_back(conn);
      readers_.emplace_back([this, conn] { ReadLoop(conn); });
    }
  }

  void ReadLoop(std::shared_ptr<ServerConnection> conn) {
    for (;;) {
      Result<Frame> f = ReadFrame(conn->fd);
      if (!f.ok()) break;
      tracker_.Enter();
      std::thread([this, conn, handler = handler_, req = std::move(*f)] {
        Frame resp = (*handler)(req);
        Result<std::string> wire = EncodeFrame(resp);
        if (!wire.ok()) wire = EncodeFrame(MakeResponse(req, wire.status()));
        if (wire.ok()) {
          std::lock_guard<std::mutex> l(conn->write_mu);
          WriteAll(conn->fd, *wire);
        }
        tracker_.Exit();
      }).detach();
    }
    ::shutdown(conn->fd, SHUT_RDWR);
  }

  int fd_;
  std::shared_ptr<Handler> handler_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<std::shared_ptr<ServerConnection>> conns_;
  std::vector<std::thread> readers_;
  ThreadTracker tracker_;
};

class TcpTransport : public Transport {
 public:
  explicit TcpTransport(std::string name) : name_(std::move(name)) {}

  ~TcpTransport() override {
    std::map<std::string, std::unique_ptr<Listener>> listeners;
    {
      std::lock_guard<std::mutex> l(mu_);
      listeners.swap(listeners_);
      for (auto& [addr, c] : conns_) c->Shutdown();
      conns_.clear();
    }
    for (auto& [addr, lis] : listeners) lis->Stop();
  }

  Result<Frame> Call(const std::string& to, Frame request,
                     std::chrono::milliseconds timeout) override {
    request.request_id = next_id_.fetch_add(1) + 1;
    if (EncodedFrameSize(request) > kMaxFrameBytes) {
      return Status(Code::kOversize, "request exceeds frame limit");
    }
    DLSM_ASSIGN_OR_RETURN(std::shared_ptr<ClientConnection> conn,
                          Connection(to));
    Result<Frame> r = conn->Call(request, timeout);
    if (!r.ok() && r.status().code() == Code::kConnectionFailed) {
      Drop(to, conn);
    }
    return r;
  }

  Status Listen(const std::string& address, Handler handler,
                std::string* bound) override {
    std::string host;
    uint16_t port = 0;
    DLSM_RETURN_IF_ERROR(ParseHostPort(address, &host, &port));
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) return ErrnoStatus(Code::kIoError, "socket");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host == "localhost" ? "127.0.0.1" : host.c_str(),
                    &addr.sin_addr) != 1) {
      ::close(fd);
      return InvalidArgumentError("bad listen host " + host);
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
        ::listen(fd, 512) != 0) {
      Status s = ErrnoStatus(Code::kIoError, "bind " + address);
      ::close(fd);
      return s;
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    std::string actual = host + ":" + std::to_string(ntohs(addr.sin_port));
    auto lis = std::make_unique<Listener>(fd, std::move(handler));
    lis->Start();
    {
      std::lock_guard<std::mutex> l(mu_);
      listeners_[actual] = std::move(lis);
    }
    if (bound != nullptr) *bound = actual;
    return Status::OK();
  }

  void Unlisten(const std::string& address) override {
    std::unique_ptr<Listener> lis;
    {
      std::lock_guard<std::mutex> l(mu_);
      auto it = listeners_.find(address);
      if (it == listeners_.end()) return;
      lis = std::move(it->second);
      listeners_.erase(it);
    }
    lis->Stop();
  }

  std::string name() const override { return name_; }

 private:
  Result<std::shared_ptr<ClientConnection>> Connection(const std::string& to) {
    std::lock_guard<std::mutex> l(connect_mu_);
    {
      std::lock_guard<std::mutex> g(mu_);
      auto it = conns_.find(to);
      if (it != conns_.end() && !it->second->broken()) return it->second;
    }
    DLSM_ASSIGN_OR_RETURN(int fd, Connect(to));
    auto conn = std::make_shared<ClientConnection>(fd);
    conn->Start();
    std::lock_guard<std::mutex> g(mu_);
    conns_[to] = conn;
    return conn;
  }

  void Drop(const std::string& to,
            const std::shared_ptr<ClientConnection>& conn) {
    std::lock_guard<std::mutex> l(mu_);
    auto it = conns_.find(to);
    if (it != conns_.end() && it->second == conn) conns_.erase(it);
  }

  std::string name_;
  std::atomic<uint64_t> next_id_{0};
  std::mutex connect_mu_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<ClientConnection>> conns_;
  std::map<std::string, std::unique_ptr<Listener>> listeners_;
};

}  // namespace

std::shared_ptr<Transport> NewTcpTransport(std::string name) {
  return std::make_shared<TcpTransport>(std::move(name));
}

}  // namespace dlsm
