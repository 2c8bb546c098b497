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

#include "cluster/config.h"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dlsm {

using nlohmann::json;

template <typename F>
void Visit(ClusterConfig::Latency& c, F&& f) {
  f("base_us", c.base_us);
  f("jitter_us", c.jitter_us);
  f("stoc_us", c.stoc_us);
}

template <typename F>
void Visit(ClusterConfig::Ltc& c, F&& f) {
  f("memtable_bytes", c.memtable_bytes);
  f("max_immutables", c.max_immutables);
  f("max_output_bytes", c.max_output_bytes);
  f("block_size_bytes", c.block_size_bytes);
  f("l0_trigger", c.l0_trigger);
  f("level1_target_bytes", c.level1_target_bytes);
  f("size_ratio", c.size_ratio);
  f("local_compaction", c.local_compaction);
  f("cpu_cost_us", c.cpu_cost_us);
  f("cpu_cores", c.cpu_cores);
  f("report_interval_ms", c.report_interval_ms);
}

template <typename F>
void Visit(ClusterConfig::Worker& c, F&& f) {
  f("max_concurrent", c.max_concurrent);
  f("job_fixed_cost_us", c.job_fixed_cost_us);
  f("job_cost_us_per_kib", c.job_cost_us_per_kib);
}

template <typename F>
void Visit(ClusterConfig& c, F&& f) {
  f("transport", c.transport);
  f("coordinator", c.coordinator);
  f("stocs", c.stocs);
  f("ltcs", c.ltcs);
  f("workers", c.workers);
  f("n_ranges", c.n_ranges);
  f("d", c.d);
  f("r", c.r);
  f("tier", c.tier);
  f("data_dir", c.data_dir);
  f("seed", c.seed);
  f("latency", c.latency);
  f("ltc", c.ltc);
  f("worker", c.worker);
  f("heartbeat_ms", c.heartbeat_ms);
  f("missed_heartbeats", c.missed_heartbeats);
  f("rpc_timeout_ms", c.rpc_timeout_ms);
}

template <typename T>
void WriteJson(json& j, const T& c) {
  j = json::object();
  Visit(const_cast<T&>(c), [&](const char* name, auto& field) {
    j[name] = field;
  });
}

template <typename T>
void ReadJson(const json& j, T& c) {
  if (!j.is_object()) throw std::invalid_argument("expected an object");
  std::set<std::string> known;
  Visit(c, [&](const char* name, auto& field) {
    known.insert(name);
    if (j.contains(name)) j.at(name).get_to(field);
  });
  for (const auto& [k, _] : j.items()) {
    if (known.count(k) == 0) throw std::invalid_argument("unknown field " + k);
  }
}

void to_json(json& j, const ClusterConfig::Latency& c) { WriteJson(j, c); }
void to_json(json& j, const ClusterConfig::Ltc& c) { WriteJson(j, c); }
void to_json(json& j, const ClusterConfig::Worker& c) { WriteJson(j, c); }
void from_json(const json& j, ClusterConfig::Latency& c) { ReadJson(j, c); }
void from_json(const json& j, ClusterConfig::Ltc& c) { ReadJson(j, c); }
void from_json(const json& j, ClusterConfig::Worker& c) { ReadJson(j, c); }

namespace {

Status ConfigError(const std::string& msg) {
  return Status(Code::kConfigError, msg);
}

std::string EnvName(const std::string& path) {
  std::string out = "DLSM_";
  for (char c : path) {
    out += c == '/' ? '_' : static_cast<char>(std::toupper(c));
  }
  return out;
}

Status ApplyOverride(json& leaf, const std::string& var,
                     const std::string& text) {
  try {
    if (leaf.is_boolean()) {
      if (text == "1" || text == "true") {
        leaf = true;
      } else if (text == "0" || text == "false") {
        leaf = false;
      } else {
        return ConfigError(var + ": expected a boolean");
      }
    } else if (leaf.is_number_unsigned()) {
      if (!text.empty() && text[0] == '-') {
        return ConfigError(var + ": expected a non-negative integer");
      }
      size_t used = 0;
      leaf = std::stoull(text, &used);
      if (used != text.size()) return ConfigError(var + ": not an integer");
    } else if (leaf.is_number_integer()) {
      size_t used = 0;
      leaf = std::stoll(text, &used);
      if (used != text.size()) return ConfigError(var + ": not an integer");
    } else if (leaf.is_array()) {
      json list = json::array();
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) list.push_back(item);
      }
      leaf = std::move(list);
    } else {
      leaf = text;
    }
  } catch (const std::exception&) {
    return ConfigError(var + ": cannot parse '" + text + "'");
  }
  return Status::OK();
}

Status ApplyEnv(json& node, const std::string& path, const EnvLookup& env) {
  if (node.is_object()) {
    for (auto& [k, v] : node.items()) {
      DLSM_RETURN_IF_ERROR(
          ApplyEnv(v, path.empty() ? k : path + "/" + k, env));
    }
    return Status::OK();
  }
  std::string var = EnvName(path);
  if (auto text = env(var)) return ApplyOverride(node, var, *text);
  return Status::OK();
}

bool Unique(const std::vector<std::string>& all) {
  return std::set<std::string>(all.begin(), all.end()).size() == all.size();
}

}  // namespace

Status ClusterConfig::Validate() const {
  if (transport != "sim" && transport != "tcp") {
    return ConfigError("transport must be \"sim\" or \"tcp\"");
  }
  if (tier != "memory" && tier != "disk") {
    return ConfigError("tier must be \"memory\" or \"disk\"");
  }
  if (tier == "disk" && data_dir.empty()) {
    return ConfigError("the disk tier needs data_dir");
  }
  if (stocs.empty()) return ConfigError("at least one StoC is required");
  if (ltcs.empty()) return ConfigError("at least one LTC is required");
  if (coordinator.empty()) return ConfigError("coordinator address is empty");
  std::vector<std::string> all = stocs;
  all.insert(all.end(), ltcs.begin(), ltcs.end());
  all.insert(all.end(), workers.begin(), workers.end());
  all.push_back(coordinator);
  for (const auto& a : all) {
    if (a.empty()) return ConfigError("empty component address");
  }
  // Port 0 asks the kernel for a fresh port, so repeats are fine.
  if (transport == "tcp") {
    std::erase_if(all, [](const std::string& a) { return a.ends_with(":0"); });
  }
  if (!Unique(all)) return ConfigError("component addresses must be unique");
  if (n_ranges < static_cast<int>(ltcs.size()) || n_ranges > 65536) {
    return ConfigError("n_ranges must be in [number of LTCs, 65536]");
  }
  if (d < 1 || d > static_cast<int>(stocs.size())) {
    return ConfigError("d must be in [1, number of StoCs]");
  }
  if (r < 1 || r > static_cast<int>(stocs.size())) {
    return ConfigError("r must be in [1, number of StoCs]");
  }
  if (ltc.memtable_bytes < 1024) {
    return ConfigError("ltc.memtable_bytes must be at least 1024");
  }
  if (ltc.max_immutables < 1) {
    return ConfigError("ltc.max_immutables must be positive");
  }
  if (ltc.block_size_bytes < 64) {
    return ConfigError("ltc.block_size_bytes must be at least 64");
  }
  if (ltc.max_output_bytes < ltc.block_size_bytes) {
    return ConfigError("ltc.max_output_bytes must be at least one block");
  }
  if (ltc.l0_trigger < 1 || ltc.size_ratio < 2) {
    return ConfigError("ltc.l0_trigger >= 1 and ltc.size_ratio >= 2");
  }
  if (ltc.cpu_cores < 1) return ConfigError("ltc.cpu_cores must be positive");
  if (!ltc.local_compaction && workers.empty()) {
    return ConfigError("ltc.local_compaction=false needs at least one worker");
  }
  if (worker.max_concurrent < 1) {
    return ConfigError("worker.max_concurrent must be positive");
  }
  if (heartbeat_ms == 0 || missed_heartbeats < 1 || rpc_timeout_ms == 0) {
    return ConfigError("heartbeat_ms, missed_heartbeats, rpc_timeout_ms > 0");
  }
  return Status::OK();
}

std::string ClusterConfig::ToJson() const {
  json j;
  WriteJson(j, *this);
  return j.dump(2) + "\n";
}

Result<ClusterConfig> ClusterConfig::FromJson(std::string_view text) {
  ClusterConfig c;
  try {
    json j = json::parse(text);
    ReadJson(j, c);
  } catch (const std::exception& e) {
    return ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ClusterConfig MakeConfig(int n_stocs, int n_ltcs, int n_workers,
                         const std::string& transport, int base_port) {
  ClusterConfig c;
  c.transport = transport;
  int port = base_port;
  auto name = [&](const std::string& kind, int i) {
    if (transport == "tcp") return "127.0.0.1:" + std::to_string(port++);
    return kind + "-" + std::to_string(i);
  };
  c.coordinator = transport == "tcp" ? name("coord", 0) : "coord";
  c.stocs.clear();
  c.ltcs.clear();
  for (int i = 0; i < n_stocs; ++i) c.stocs.push_back(name("stoc", i));
  for (int i = 0; i < n_ltcs; ++i) c.ltcs.push_back(name("ltc", i));
  for (int i = 0; i < n_workers; ++i) c.workers.push_back(name("worker", i));
  c.d = std::min(c.d, std::max(n_stocs, 1));
  return c;
}

std::optional<std::string> GetEnv(const std::string& name) {
  const char* v = std::getenv(name.c_str());
  if (v == nullptr) return std::nullopt;
  return std::string(v);
}

Result<ClusterConfig> LoadConfig(std::string_view text, const EnvLookup& env) {
  ClusterConfig base;
  if (!text.empty()) {
    DLSM_ASSIGN_OR_RETURN(base, ClusterConfig::FromJson(text));
  }
  json j = json::parse(base.ToJson());
  DLSM_RETURN_IF_ERROR(ApplyEnv(j, "", env));
  DLSM_ASSIGN_OR_RETURN(ClusterConfig c, ClusterConfig::FromJson(j.dump()));
  DLSM_RETURN_IF_ERROR(c.Validate());
  return c;
}

Result<ClusterConfig> LoadConfigFile(const std::string& path,
                                     const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) return ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return LoadConfig(ss.str(), env);
}

}  // namespace dlsm
