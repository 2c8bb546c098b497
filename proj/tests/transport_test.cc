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

#include <atomic>
#include <thread>

#include "common/coding.h"
#include "transport/sim_network.h"
#include "transport/tcp_transport.h"

namespace dlsm {
namespace {

using std::chrono::milliseconds;

Handler EchoHandler() {
  return [](const Frame& req) -> Frame {
    if (req.kind == static_cast<uint16_t>(Opcode::kEcho)) {
      return MakeResponse(req, Status::OK(), req.payload);
    }
    if (req.kind == static_cast<uint16_t>(Opcode::kPing)) {
      // Reply with a body far over the frame limit.
      return MakeResponse(req, Status::OK(), std::string(kMaxFrameBytes, 'x'));
    }
    return MakeResponse(req, Status(Code::kUnknownOpcode, "unknown"));
  };
}

TEST(FrameTest, RoundTrip) {
  Frame f{42, static_cast<uint16_t>(Opcode::kPut), 7, "payload"};
  auto wire = EncodeFrame(f);
  ASSERT_TRUE(wire.ok());
  EXPECT_EQ(wire->size(), kFrameHeaderSize + 7);
  EXPECT_EQ(DecodeFixed32(wire->data()), kFrameMagic);
  EXPECT_EQ(DecodeFixed32(wire->data() + 4), wire->size());
  auto back = DecodeFrame(*wire);
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(*back, f);
}

TEST(FrameTest, BadMagicAndLength) {
  Frame f{1, 1, 0, "x"};
  std::string wire = *EncodeFrame(f);
  std::string bad = wire;
  bad[0] ^= 1;
  EXPECT_EQ(DecodeFrame(bad).status().code(), Code::kCorruption);
  EXPECT_EQ(DecodeFrame(wire.substr(0, wire.size() - 1)).status().code(),
            Code::kCorruption);
}

TEST(FrameTest, OversizeRejected) {
  Frame f{1, 1, 0, std::string(kMaxFrameBytes - kFrameHeaderSize, 'a')};
  EXPECT_TRUE(EncodeFrame(f).ok());
  f.payload.push_back('a');
  EXPECT_EQ(EncodeFrame(f).status().code(), Code::kOversize);
}

TEST(FrameTest, UnknownOpcodeRejectedByDispatcher) {
  Dispatcher d;
  d.Register(Opcode::kEcho, [](const Frame& f) -> Result<std::string> {
    return f.payload;
  });
  Frame req{9, 0x7777, 0, ""};
  Frame resp = d.Handle(req);
  EXPECT_EQ(resp.kind, static_cast<uint16_t>(Opcode::kError));
  EXPECT_EQ(ParseResponse(resp).status().code(), Code::kUnknownOpcode);
  Frame ok = d.Handle(Frame{10, static_cast<uint16_t>(Opcode::kEcho), 0, "hi"});
  EXPECT_EQ(ok.kind, static_cast<uint16_t>(Opcode::kEcho) | kResponseBit);
  EXPECT_EQ(*ParseResponse(ok), "hi");
}

TEST(FrameTest, ErrorResponseCarriesMessage) {
  Frame req{3, static_cast<uint16_t>(Opcode::kGet), 5, ""};
  Frame resp = MakeResponse(req, Status(Code::kNotOwner, "range 4 owner ltc-1"));
  EXPECT_EQ(resp.request_id, 3u);
  EXPECT_EQ(resp.epoch, 5u);
  auto r = ParseResponse(resp);
  EXPECT_EQ(r.status().code(), Code::kNotOwner);
  EXPECT_EQ(r.status().message(), "range 4 owner ltc-1");
}

// Tests run against both backings.
class TransportTest : public ::testing::TestWithParam<bool> {
 protected:
  void SetUp() override {
    if (GetParam()) {
      server_ = NewTcpTransport("server");
      client_ = NewTcpTransport("client");
      ASSERT_TRUE(server_->Listen("127.0.0.1:0", EchoHandler(), &addr_).ok());
    } else {
      net_ = SimNetwork::Create();
      server_ = net_->Endpoint("server");
      client_ = net_->Endpoint("client");
      ASSERT_TRUE(server_->Listen("server", EchoHandler(), &addr_).ok());
    }
  }

  std::shared_ptr<SimNetwork> net_;
  std::shared_ptr<Transport> server_;
  std::shared_ptr<Transport> client_;
  std::string addr_;
};

TEST_P(TransportTest, Echo) {
  auto r = CallBody(*client_, addr_, Opcode::kEcho, 3, "hello", milliseconds(2000));
  ASSERT_TRUE(r.ok()) << r.status().ToString();
  EXPECT_EQ(*r, "hello");
}

TEST_P(TransportTest, UnknownOpcodeGetsErrorFrame) {
  Frame f;
  f.kind = 0x0999;
  auto r = client_->Call(addr_, f, milliseconds(2000));
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->kind, static_cast<uint16_t>(Opcode::kError));
}

TEST_P(TransportTest, OversizeRequestFailsConnectionSurvives) {
  std::string big(kMaxFrameBytes, 'z');
  auto r = CallBody(*client_, addr_, Opcode::kEcho, 0, big, milliseconds(2000));
  EXPECT_EQ(r.status().code(), Code::kOversize);
  auto ok = CallBody(*client_, addr_, Opcode::kEcho, 0, "still", milliseconds(2000));
  ASSERT_TRUE(ok.ok()) << ok.status().ToString();
  EXPECT_EQ(*ok, "still");
}

TEST_P(TransportTest, OversizeResponseBecomesError) {
  auto r = CallBody(*client_, addr_, Opcode::kPing, 0, "", milliseconds(5000));
  EXPECT_EQ(r.status().code(), Code::kOversize);
  auto ok = CallBody(*client_, addr_, Opcode::kEcho, 0, "after", milliseconds(2000));
  ASSERT_TRUE(ok.ok());
}

TEST_P(TransportTest, NoListenerIsConnectionFailed) {
  std::string to = GetParam() ? "127.0.0.1:1" : "nobody";
  auto r = CallBody(*client_, to, Opcode::kEcho, 0, "x", milliseconds(500));
  EXPECT_EQ(r.status().code(), Code::kConnectionFailed);
}

TEST_P(TransportTest, ConcurrentCallsNeverMismatch) {
  constexpr int kThreads = 50;
  constexpr int kPerThread = 200;  // 10^4 calls in total
  std::atomic<int> mismatches{0};
  std::atomic<int> failures{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < kPerThread; ++i) {
        std::string body = std::to_string(t) + ":" + std::to_string(i);
        auto r = CallBody(*client_, addr_, Opcode::kEcho, 0, body,
                          milliseconds(10000));
        if (!r.ok()) {
          ++failures;
        } else if (*r != body) {
          ++mismatches;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(mismatches.load(), 0);
  EXPECT_EQ(failures.load(), 0);
}

INSTANTIATE_TEST_SUITE_P(Backings, TransportTest, ::testing::Values(false, true),
                         [](const auto& info) {
                           return info.param ? "Tcp" : "Sim";
                         });

TEST(SimNetworkTest, InjectedLatencyBoundsRtt) {
  auto net = SimNetwork::Create();
  auto server = net->Endpoint("server");
  auto client = net->Endpoint("client");
  ASSERT_TRUE(server->Listen("server", EchoHandler(), nullptr).ok());
  net->SetEdgeLatency("client", "server", std::chrono::microseconds(5000),
                      std::chrono::microseconds(0));
  for (int i = 0; i < 5; ++i) {
    auto start = std::chrono::steady_clock::now();
    ASSERT_TRUE(CallBody(*client, "server", Opcode::kEcho, 0, "x",
                         milliseconds(1000)).ok());
    auto rtt = std::chrono::steady_clock::now() - start;
    EXPECT_GE(rtt, milliseconds(5));
  }
}

TEST(SimNetworkTest, TimeoutWhenLatencyExceedsBudget) {
  auto net = SimNetwork::Create();
  auto server = net->Endpoint("server");
  auto client = net->Endpoint("client");
  ASSERT_TRUE(server->Listen("server", EchoHandler(), nullptr).ok());
  net->SetEdgeLatency("server", "client", std::chrono::microseconds(50000),
                      std::chrono::microseconds(0));
  auto r = CallBody(*client, "server", Opcode::kEcho, 0, "x", milliseconds(10));
  EXPECT_EQ(r.status().code(), Code::kTimeout);
}

TEST(SimNetworkTest, PartitionFailsThenHeals) {
  auto net = SimNetwork::Create();
  auto server = net->Endpoint("server");
  auto a = net->Endpoint("a");
  auto b = net->Endpoint("b");
  ASSERT_TRUE(server->Listen("server", EchoHandler(), nullptr).ok());
  net->Partition("a", "server", milliseconds(100));
  EXPECT_EQ(CallBody(*a, "server", Opcode::kEcho, 0, "x", milliseconds(100))
                .status()
                .code(),
            Code::kConnectionFailed);
  // Unrelated pair unaffected.
  EXPECT_TRUE(CallBody(*b, "server", Opcode::kEcho, 0, "x", milliseconds(100)).ok());
  std::this_thread::sleep_for(milliseconds(120));
  EXPECT_TRUE(CallBody(*a, "server", Opcode::kEcho, 0, "x", milliseconds(100)).ok());
}

TEST(SimNetworkTest, ZeroDurationPartitionIsNoop) {
  auto net = SimNetwork::Create();
  auto server = net->Endpoint("server");
  auto a = net->Endpoint("a");
  ASSERT_TRUE(server->Listen("server", EchoHandler(), nullptr).ok());
  net->Partition("a", "server", milliseconds(0));
  EXPECT_TRUE(CallBody(*a, "server", Opcode::kEcho, 0, "x", milliseconds(100)).ok());
}

TEST(SimNetworkTest, LatencyScheduleDeterministicUnderSeed) {
  auto run = [](uint64_t seed) {
    SimOptions opts;
    opts.seed = seed;
    opts.jitter_mean = std::chrono::microseconds(200);
    auto net = SimNetwork::Create(opts);
    auto server = net->Endpoint("server");
    auto client = net->Endpoint("client");
    std::vector<int64_t> seen;
    EXPECT_TRUE(server->Listen("server", EchoHandler(), nullptr).ok());
    for (int i = 0; i < 20; ++i) {
      auto start = std::chrono::steady_clock::now();
      EXPECT_TRUE(CallBody(*client, "server", Opcode::kEcho, 0, "x",
                           milliseconds(1000)).ok());
      seen.push_back(std::chrono::duration_cast<std::chrono::microseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count());
    }
    return seen;
  };
  // Real sleeps add scheduling noise, so compare the ordering of delays,
  // which is driven by the seeded draws once jitter dominates.
  auto a = run(11), b = run(11);
  int agree = 0;
  for (size_t i = 1; i < a.size(); ++i) {
    agree += (a[i] > a[i - 1]) == (b[i] > b[i - 1]);
  }
  EXPECT_GE(agree, 15);
}

}  // namespace
}  // namespace dlsm
