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

#include "bench/workload.h"

#include <set>

#include <nlohmann/json.hpp>

#include "common/coding.h"

namespace dlsm {

using nlohmann::json;

Status WorkloadSpec::Validate() const {
  auto bad = [](const std::string& m) {
    return Status(Code::kConfigError, "workload: " + m);
  };
  for (double f : {read_fraction, scan_fraction, delete_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) return bad("fractions must be in [0, 1]");
  }
  if (read_fraction + scan_fraction + delete_fraction > 1.0 + 1e-12) {
    return bad("fractions must sum to at most 1");
  }
  if (key_count == 0) return bad("key_count must be positive");
  if (distribution == Distribution::kZipfian && !(theta > 0.0 && theta < 1.0)) {
    return bad("theta must be in (0, 1)");
  }
  if (client_threads < 1) return bad("client_threads must be positive");
  if (ops == 0 && !(duration_s > 0)) {
    return bad("either ops or duration_s must be positive");
  }
  if (verify && key_count < static_cast<uint64_t>(client_threads)) {
    return bad("verify mode needs key_count >= client_threads");
  }
  return Status::OK();
}

std::string WorkloadSpec::ToJson() const {
  json j = {
      {"read_fraction", read_fraction},
      {"scan_fraction", scan_fraction},
      {"delete_fraction", delete_fraction},
      {"key_count", key_count},
      {"value_size_bytes", value_size_bytes},
      {"distribution",
       distribution == Distribution::kZipfian ? "zipfian" : "uniform"},
      {"theta", theta},
      {"duration_s", duration_s},
      {"ops", ops},
      {"client_threads", client_threads},
      {"scan_length", scan_length},
      {"seed", seed},
      {"verify", verify},
  };
  return j.dump(2) + "\n";
}

Result<WorkloadSpec> WorkloadSpec::FromJson(std::string_view text) {
  WorkloadSpec s;
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("expected an object");
    static const std::set<std::string> known = {
        "read_fraction", "scan_fraction", "delete_fraction", "key_count",
        "value_size_bytes", "distribution", "theta", "duration_s", "ops",
        "client_threads", "scan_length", "seed", "verify"};
    for (const auto& [k, _] : j.items()) {
      if (known.count(k) == 0) throw std::invalid_argument("unknown field " + k);
    }
    auto get = [&](const char* k, auto& field) {
      if (j.contains(k)) j.at(k).get_to(field);
    };
    get("read_fraction", s.read_fraction);
    get("scan_fraction", s.scan_fraction);
    get("delete_fraction", s.delete_fraction);
    get("key_count", s.key_count);
    get("value_size_bytes", s.value_size_bytes);
    get("theta", s.theta);
    get("duration_s", s.duration_s);
    get("ops", s.ops);
    get("client_threads", s.client_threads);
    get("scan_length", s.scan_length);
    get("seed", s.seed);
    get("verify", s.verify);
    if (j.contains("distribution")) {
      std::string d = j.at("distribution").get<std::string>();
      if (d == "uniform") {
        s.distribution = Distribution::kUniform;
      } else if (d == "zipfian") {
        s.distribution = Distribution::kZipfian;
      } else {
        throw std::invalid_argument("distribution must be uniform or zipfian");
      }
    }
  } catch (const std::exception& e) {
    return Status(Code::kConfigError, std::string("workload: ") + e.what());
  }
  DLSM_RETURN_IF_ERROR(s.Validate());
  return s;
}

std::shared_ptr<const ZipfianGenerator> MakeSampler(const WorkloadSpec& spec) {
  if (spec.distribution != Distribution::kZipfian) return nullptr;
  return std::make_shared<const ZipfianGenerator>(spec.key_count, spec.theta);
}

OpGenerator::OpGenerator(const WorkloadSpec& spec, int thread,
                         std::shared_ptr<const ZipfianGenerator> zipf)
    : spec_(spec),
      thread_(thread),
      zipf_(zipf ? std::move(zipf) : MakeSampler(spec)),
      rng_(Mix64(spec.seed * 0x9E3779B97F4A7C15ull + thread + 1)) {}

uint64_t OpGenerator::NextItem() {
  uint64_t x = zipf_ ? zipf_->Next(rng_) : rng_() % spec_.key_count;
  if (!spec_.verify) return x;
  auto t = static_cast<uint64_t>(spec_.client_threads);
  uint64_t item = x - x % t + static_cast<uint64_t>(thread_);
  if (item >= spec_.key_count) item -= t;
  return item;
}

Op OpGenerator::Next() {
  Op op;
  double u = UnitDouble(rng_);
  if (u < spec_.read_fraction) {
    op.type = OpType::kRead;
  } else if (u < spec_.read_fraction + spec_.scan_fraction) {
    op.type = OpType::kScan;
  } else if (u < spec_.read_fraction + spec_.scan_fraction +
                     spec_.delete_fraction) {
    op.type = OpType::kDelete;
  } else {
    op.type = OpType::kWrite;
  }
  op.item = NextItem();
  if (op.type == OpType::kWrite) {
    op.value.resize(spec_.value_size_bytes);
    uint64_t bits = 0;
    for (size_t i = 0; i < op.value.size(); ++i) {
      if (i % 10 == 0) bits = rng_();
      op.value[i] = static_cast<char>('a' + bits % 26);
      bits /= 26;
    }
  }
  return op;
}

}  // namespace dlsm
