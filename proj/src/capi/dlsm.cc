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

#include "dlsm/dlsm.h"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "bench/elasticity.h"
#include "bench/runner.h"
#include "client/client.h"
#include "cluster/config.h"
#include "cluster/devcluster.h"
#include "cluster/status.h"
#include "coord/coordinator.h"
#include "ltc/ltc.h"
#include "stoc/stoc.h"
#include "transport/tcp_transport.h"
#include "worker/worker.h"

struct dlsm_config {
  dlsm::ClusterConfig config;
};

struct dlsm_server {
  std::string address;
  std::unique_ptr<dlsm::StocServer> stoc;
  std::unique_ptr<dlsm::Ltc> ltc;
  std::unique_ptr<dlsm::WorkerServer> worker;
  std::unique_ptr<dlsm::Coordinator> coordinator;
};

struct dlsm_cluster {
  std::unique_ptr<dlsm::DevCluster> cluster;
};

struct dlsm_client {
  std::unique_ptr<dlsm::Client> client;
};

namespace {

using dlsm::Code;
using dlsm::Status;

char* CopyString(std::string_view s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) return nullptr;
  std::memcpy(out, s.data(), s.size());
  out[s.size()] = '\0';
  return out;
}

int Fail(const Status& s, char** err) {
  if (err != nullptr) *err = CopyString(s.ToString());
  return static_cast<int>(s.code());
}

int Done(const Status& s, char** err) {
  return s.ok() ? DLSM_OK : Fail(s, err);
}

int Invalid(const char* what, char** err) {
  return Fail(dlsm::InvalidArgumentError(what), err);
}

template <typename F>
int Guard(char** err, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return Fail(dlsm::InternalError(e.what()), err);
  }
}

std::chrono::milliseconds Timeout(const dlsm::ClusterConfig& c) {
  return std::chrono::milliseconds(c.rpc_timeout_ms);
}

}  // namespace

extern "C" {

void dlsm_free(void* p) { std::free(p); }

const char* dlsm_code_name(int code) {
  return dlsm::CodeName(static_cast<Code>(code));
}

int dlsm_config_load(const char* path, dlsm_config** out, char** err) {
  if (out == nullptr) return Invalid("out is null", err);
  return Guard(err, [&]() -> int {
    auto c = path == nullptr ? dlsm::LoadConfig("") : dlsm::LoadConfigFile(path);
    if (!c.ok()) return Fail(c.status(), err);
    *out = new dlsm_config{std::move(c).value()};
    return DLSM_OK;
  });
}

int dlsm_config_parse(const char* json, dlsm_config** out, char** err) {
  if (json == nullptr || out == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    auto c = dlsm::LoadConfig(json, [](const std::string&) {
      return std::optional<std::string>();
    });
    if (!c.ok()) return Fail(c.status(), err);
    *out = new dlsm_config{std::move(c).value()};
    return DLSM_OK;
  });
}

char* dlsm_config_render(const dlsm_config* config) {
  if (config == nullptr) return nullptr;
  return CopyString(config->config.ToJson());
}

void dlsm_config_destroy(dlsm_config* config) { delete config; }

int dlsm_server_start(const dlsm_config* config, const char* role, int index,
                      dlsm_server** out, char** err) {
  if (config == nullptr || role == nullptr || out == nullptr) {
    return Invalid("null argument", err);
  }
  return Guard(err, [&]() -> int {
    const dlsm::ClusterConfig& c = config->config;
    std::string r = role;
    auto pick = [&](const std::vector<std::string>& list) -> const std::string* {
      if (index < 0 || static_cast<size_t>(index) >= list.size()) return nullptr;
      return &list[index];
    };
    auto server = std::make_unique<dlsm_server>();
    Status s;
    if (r == "stoc") {
      const std::string* addr = pick(c.stocs);
      if (addr == nullptr) return Fail(Status(Code::kConfigError, "no such StoC index"), err);
      dlsm::StocOptions o = dlsm::StocOptionsFor(c, index);
      if (o.store.tier == dlsm::Tier::kDisk) {
        std::error_code ec;
        std::filesystem::create_directories(o.store.dir, ec);
      }
      auto stoc = dlsm::StocServer::Open(o, dlsm::NewTcpTransport(*addr));
      if (!stoc.ok()) return Fail(stoc.status(), err);
      server->stoc = std::move(stoc).value();
      s = server->stoc->Start(*addr, &server->address);
    } else if (r == "ltc") {
      const std::string* addr = pick(c.ltcs);
      if (addr == nullptr) return Fail(Status(Code::kConfigError, "no such LTC index"), err);
      server->ltc = std::make_unique<dlsm::Ltc>(dlsm::LtcOptionsFor(c, *addr),
                                                dlsm::NewTcpTransport(*addr));
      s = server->ltc->Start(*addr, &server->address);
    } else if (r == "compactor") {
      const std::string* addr = pick(c.workers);
      if (addr == nullptr) return Fail(Status(Code::kConfigError, "no such worker index"), err);
      server->worker = std::make_unique<dlsm::WorkerServer>(
          dlsm::WorkerOptionsFor(c, index), dlsm::NewTcpTransport(*addr));
      s = server->worker->Start(*addr, &server->address);
    } else if (r == "coord") {
      server->coordinator = std::make_unique<dlsm::Coordinator>(
          dlsm::CoordinatorOptionsFor(c), dlsm::NewTcpTransport(c.coordinator));
      s = server->coordinator->Start(c.coordinator, &server->address);
    } else {
      return Fail(Status(Code::kConfigError, "unknown role " + r), err);
    }
    if (!s.ok()) return Fail(s, err);
    *out = server.release();
    return DLSM_OK;
  });
}

const char* dlsm_server_address(const dlsm_server* server) {
  return server == nullptr ? "" : server->address.c_str();
}

void dlsm_server_stop(dlsm_server* server) {
  if (server == nullptr) return;
  if (server->coordinator) server->coordinator->Stop();
  if (server->ltc) server->ltc->Stop();
  if (server->worker) server->worker->Stop();
  if (server->stoc) server->stoc->Stop();
  delete server;
}

int dlsm_devcluster_start(const dlsm_config* config, dlsm_cluster** out,
                          char** err) {
  if (out == nullptr) return Invalid("out is null", err);
  return Guard(err, [&]() -> int {
    dlsm::ClusterConfig c = config ? config->config : dlsm::ClusterConfig{};
    auto dc = dlsm::DevCluster::Start(c);
    if (!dc.ok()) return Fail(dc.status(), err);
    *out = new dlsm_cluster{std::move(dc).value()};
    return DLSM_OK;
  });
}

int dlsm_devcluster_kill(dlsm_cluster* cluster, const char* component,
                         char** err) {
  if (cluster == nullptr || component == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    auto& dc = *cluster->cluster;
    const auto& c = dc.config();
    std::string name = component;
    for (size_t i = 0; i < c.stocs.size(); ++i) {
      if (c.stocs[i] == name) return Done(dc.KillStoc(i), err);
    }
    for (size_t i = 0; i < c.workers.size(); ++i) {
      if (c.workers[i] == name) return Done(dc.KillWorker(i), err);
    }
    return Done(dc.KillLtc(name), err);
  });
}

int dlsm_devcluster_restart(dlsm_cluster* cluster, const char* component,
                            char** err) {
  if (cluster == nullptr || component == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    auto& dc = *cluster->cluster;
    const auto& c = dc.config();
    std::string name = component;
    for (size_t i = 0; i < c.stocs.size(); ++i) {
      if (c.stocs[i] == name) return Done(dc.RestartStoc(i), err);
    }
    for (size_t i = 0; i < c.workers.size(); ++i) {
      if (c.workers[i] == name) return Done(dc.RestartWorker(i), err);
    }
    return Done(dc.RestartLtc(name), err);
  });
}

int dlsm_devcluster_add_ltc(dlsm_cluster* cluster, char** address, char** err) {
  if (cluster == nullptr) return Invalid("null cluster", err);
  return Guard(err, [&]() -> int {
    auto a = cluster->cluster->AddLtc();
    if (!a.ok()) return Fail(a.status(), err);
    if (address != nullptr) *address = CopyString(*a);
    return DLSM_OK;
  });
}

int dlsm_devcluster_remove_ltc(dlsm_cluster* cluster, const char* address,
                               char** err) {
  if (cluster == nullptr || address == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    return Done(cluster->cluster->RemoveLtc(address), err);
  });
}

int dlsm_devcluster_status(dlsm_cluster* cluster, char** text, char** err) {
  if (cluster == nullptr || text == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    auto& dc = *cluster->cluster;
    auto st = dlsm::CollectStatus(dc.NewTransport("status"),
                                  dc.config().coordinator,
                                  Timeout(dc.config()));
    if (!st.ok()) return Fail(st.status(), err);
    *text = CopyString(dlsm::FormatStatus(*st));
    return DLSM_OK;
  });
}

void dlsm_devcluster_stop(dlsm_cluster* cluster) {
  if (cluster == nullptr) return;
  cluster->cluster->Shutdown();
  delete cluster;
}

int dlsm_client_open(const char* coordinator, dlsm_client** out, char** err) {
  if (coordinator == nullptr || out == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    auto client = std::make_unique<dlsm::Client>(
        dlsm::NewTcpTransport("client"), coordinator);
    Status s = client->Refresh();
    if (!s.ok()) return Fail(s, err);
    *out = new dlsm_client{std::move(client)};
    return DLSM_OK;
  });
}

int dlsm_devcluster_client(dlsm_cluster* cluster, dlsm_client** out,
                           char** err) {
  if (cluster == nullptr || out == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    static std::atomic<int> next{0};
    auto client = cluster->cluster->NewClient("capi-client-" +
                                              std::to_string(next++));
    *out = new dlsm_client{std::move(client)};
    return DLSM_OK;
  });
}

int dlsm_put(dlsm_client* client, const char* key, size_t key_len,
             const char* value, size_t value_len, char** err) {
  if (client == nullptr || (key == nullptr && key_len > 0) ||
      (value == nullptr && value_len > 0)) {
    return Invalid("null argument", err);
  }
  return Guard(err, [&]() -> int {
    return Done(client->client
                    ->Put(std::string_view(key, key_len),
                          std::string_view(value, value_len))
                    .status(),
                err);
  });
}

int dlsm_delete(dlsm_client* client, const char* key, size_t key_len,
                char** err) {
  if (client == nullptr || (key == nullptr && key_len > 0)) {
    return Invalid("null argument", err);
  }
  return Guard(err, [&]() -> int {
    return Done(client->client->Delete(std::string_view(key, key_len)).status(),
                err);
  });
}

int dlsm_get(dlsm_client* client, const char* key, size_t key_len,
             char** value, size_t* value_len, int* found, char** err) {
  if (client == nullptr || (key == nullptr && key_len > 0) || value == nullptr ||
      value_len == nullptr || found == nullptr) {
    return Invalid("null argument", err);
  }
  return Guard(err, [&]() -> int {
    auto r = client->client->Get(std::string_view(key, key_len));
    if (!r.ok()) return Fail(r.status(), err);
    *found = r->has_value() ? 1 : 0;
    *value = nullptr;
    *value_len = 0;
    if (r->has_value()) {
      *value = CopyString(**r);
      *value_len = (*r)->size();
    }
    return DLSM_OK;
  });
}

int dlsm_add_ltc(dlsm_client* client, const char* address, char** err) {
  if (client == nullptr || address == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int { return Done(client->client->AddLtc(address), err); });
}

int dlsm_remove_ltc(dlsm_client* client, const char* address, char** err) {
  if (client == nullptr || address == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    return Done(client->client->RemoveLtc(address), err);
  });
}

void dlsm_client_close(dlsm_client* client) { delete client; }

int dlsm_cluster_status(const char* coordinator, char** text, char** err) {
  if (coordinator == nullptr || text == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    auto st = dlsm::CollectStatus(dlsm::NewTcpTransport("status"), coordinator,
                                  std::chrono::seconds(5));
    if (!st.ok()) return Fail(st.status(), err);
    *text = CopyString(dlsm::FormatStatus(*st));
    return DLSM_OK;
  });
}

int dlsm_bench_run(const char* spec_json, const dlsm_config* config,
                   const char* coordinator, const char* out_dir,
                   char** summary, char** err) {
  if (spec_json == nullptr || out_dir == nullptr) return Invalid("null argument", err);
  return Guard(err, [&]() -> int {
    auto spec = dlsm::WorkloadSpec::FromJson(spec_json);
    if (!spec.ok()) return Fail(spec.status(), err);
    std::unique_ptr<dlsm::DevCluster> dc;
    dlsm::ClientFactory factory;
    if (coordinator == nullptr) {
      auto started = dlsm::DevCluster::Start(config ? config->config
                                                    : dlsm::ClusterConfig{});
      if (!started.ok()) return Fail(started.status(), err);
      dc = std::move(started).value();
      factory = [&dc](int t) {
        return dc->NewClient("bench-" + std::to_string(t));
      };
    } else {
      std::string coord = coordinator;
      factory = [coord](int t) {
        return std::make_unique<dlsm::Client>(
            dlsm::NewTcpTransport("bench-" + std::to_string(t)), coord);
      };
    }
    auto probe = dlsm::ProbeViaClient(factory(-2));
    auto m = dlsm::RunWorkload(*spec, factory, probe);
    if (dc) dc->Shutdown();
    if (!m.ok()) return Fail(m.status(), err);
    Status s = dlsm::EmitReport(*m, out_dir);
    if (!s.ok()) return Fail(s, err);
    if (summary != nullptr) {
      *summary = CopyString(dlsm::SummaryMarkdown(*m, "dlsm benchmark"));
    }
    if (m->mismatches > 0) {
      return Fail(dlsm::CorruptionError(std::to_string(m->mismatches) +
                                        " oracle mismatches"),
                  err);
    }
    return DLSM_OK;
  });
}

int dlsm_bench_elasticity(const char* options_json, const char* out_dir,
                          char** summary, char** err) {
  if (out_dir == nullptr) return Invalid("null out_dir", err);
  return Guard(err, [&]() -> int {
    dlsm::ElasticityOptions o;
    if (options_json != nullptr) {
      try {
        auto j = nlohmann::json::parse(options_json);
        auto get = [&](const char* k, auto& field) {
          if (j.contains(k)) j.at(k).get_to(field);
        };
        get("start_ltcs", o.start_ltcs);
        get("max_ltcs", o.max_ltcs);
        get("stocs", o.stocs);
        get("n_ranges", o.n_ranges);
        get("transport", o.transport);
        get("cpu_cost_us", o.cpu_cost_us);
        get("clients_per_ltc", o.clients_per_ltc);
        get("write_fraction", o.write_fraction);
        get("key_count", o.key_count);
        get("value_size_bytes", o.value_size_bytes);
        get("saturation_factor", o.saturation_factor);
        get("sustain_s", o.sustain_s);
        get("unloaded_s", o.unloaded_s);
        get("measure_s", o.measure_s);
        get("max_phase_s", o.max_phase_s);
        get("seed", o.seed);
      } catch (const std::exception& e) {
        return Fail(Status(Code::kConfigError, e.what()), err);
      }
    }
    auto r = dlsm::RunElasticity(o);
    if (!r.ok()) return Fail(r.status(), err);
    Status s = dlsm::EmitElasticityReport(*r, out_dir);
    if (!s.ok()) return Fail(s, err);
    if (summary != nullptr) *summary = CopyString(dlsm::ElasticitySummary(*r));
    return DLSM_OK;
  });
}

}  // extern "C"
