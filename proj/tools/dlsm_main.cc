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

// dlsm: launches cluster components, a single-process devcluster, the
// benchmarks, and operator commands. Exit status: 0 ok, 2 configuration
// error, 3 runtime failure.

#include <signal.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "dlsm/dlsm.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

using Json = nlohmann::json;

int ExitFor(int code) {
  switch (code) {
    case DLSM_OK:
      return kExitOk;
    case DLSM_CONFIG_ERROR:
    case DLSM_INVALID_ARGUMENT:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

int Report(int code, char* err) {
  if (code != DLSM_OK) {
    std::fprintf(stderr, "dlsm: %s\n", err != nullptr ? err : dlsm_code_name(code));
  }
  dlsm_free(err);
  return ExitFor(code);
}

std::string TakeString(char* s) {
  std::string out = s != nullptr ? s : "";
  dlsm_free(s);
  return out;
}

class Config {
 public:
  Config() = default;
  Config(const Config&) = delete;
  Config& operator=(const Config&) = delete;
  ~Config() { dlsm_config_destroy(config_); }

  int Load(const std::string& path, char** err) {
    return dlsm_config_load(path.empty() ? nullptr : path.c_str(), &config_,
                            err);
  }

  // Applies `patch` on top of the current config and revalidates.
  int Patch(const Json& patch, char** err) {
    Json j = Json::parse(TakeString(dlsm_config_render(config_)));
    j.merge_patch(patch);
    dlsm_config* next = nullptr;
    int rc = dlsm_config_parse(j.dump().c_str(), &next, err);
    if (rc != DLSM_OK) return rc;
    dlsm_config_destroy(config_);
    config_ = next;
    return DLSM_OK;
  }

  Json AsJson() const {
    return Json::parse(TakeString(dlsm_config_render(config_)));
  }

  const dlsm_config* get() const { return config_; }

 private:
  dlsm_config* config_ = nullptr;
};

std::vector<std::string> Split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Blocks until SIGINT or SIGTERM, or until `duration_s` elapses when it is
// positive. Signals must already be blocked in every thread.
void WaitForShutdown(double duration_s) {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  if (duration_s > 0) {
    timespec ts;
    ts.tv_sec = static_cast<time_t>(duration_s);
    ts.tv_nsec = static_cast<long>((duration_s - ts.tv_sec) * 1e9);
    sigtimedwait(&set, nullptr, &ts);
  } else {
    int sig = 0;
    sigwait(&set, &sig);
  }
}

void BlockShutdownSignals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

struct ServerFlags {
  std::string config_path;
  int index = 0;
  std::string listen;
  // stoc
  std::string dir;
  std::string tier;
  std::optional<uint64_t> inject_latency_us;
  // ltc
  std::string coordinator;
  std::string stocs;
  std::string workers;
  std::optional<int> d;
  std::optional<int> log_replicas;
  // compactor
  std::optional<int> max_concurrent;
  // coord
  std::optional<int> ranges;
  std::string ltcs;
};

const char* ListFor(const std::string& role) {
  if (role == "stoc") return "stocs";
  if (role == "ltc") return "ltcs";
  if (role == "compactor") return "workers";
  return nullptr;
}

int RunServer(const std::string& role, const ServerFlags& f) {
  Config config;
  char* err = nullptr;
  int rc = config.Load(f.config_path, &err);
  if (rc != DLSM_OK) return Report(rc, err);

  Json patch = {{"transport", "tcp"}};
  Json current = config.AsJson();
  if (!f.listen.empty()) {
    if (const char* list = ListFor(role)) {
      Json addrs = current[list];
      if (f.index < 0) return Report(DLSM_CONFIG_ERROR, nullptr);
      while (addrs.size() <= static_cast<size_t>(f.index)) {
        addrs.push_back("");
      }
      addrs[f.index] = f.listen;
      patch[list] = addrs;
    } else {
      patch["coordinator"] = f.listen;
    }
  }
  if (!f.dir.empty()) patch["data_dir"] = f.dir;
  if (!f.tier.empty()) patch["tier"] = f.tier == "mem" ? "memory" : f.tier;
  if (f.inject_latency_us) patch["latency"]["stoc_us"] = *f.inject_latency_us;
  if (!f.coordinator.empty()) patch["coordinator"] = f.coordinator;
  if (!f.stocs.empty()) patch["stocs"] = Split(f.stocs);
  if (!f.workers.empty()) patch["workers"] = Split(f.workers);
  if (!f.ltcs.empty()) patch["ltcs"] = Split(f.ltcs);
  if (f.d) patch["d"] = *f.d;
  if (f.log_replicas) patch["r"] = *f.log_replicas;
  if (f.max_concurrent) patch["worker"]["max_concurrent"] = *f.max_concurrent;
  if (f.ranges) patch["n_ranges"] = *f.ranges;
  rc = config.Patch(patch, &err);
  if (rc != DLSM_OK) return Report(rc, err);

  BlockShutdownSignals();
  dlsm_server* server = nullptr;
  rc = dlsm_server_start(config.get(), role.c_str(), f.index, &server, &err);
  if (rc != DLSM_OK) return Report(rc, err);
  std::printf("%s listening on %s\n", role.c_str(),
              dlsm_server_address(server));
  std::fflush(stdout);
  WaitForShutdown(0);
  dlsm_server_stop(server);
  return kExitOk;
}

void AddServerCommand(CLI::App& app, const std::string& role,
                      const std::string& description, ServerFlags& f,
                      int& exit_code) {
  CLI::App* cmd = app.add_subcommand(role, description);
  cmd->add_option("--config", f.config_path, "JSON config file");
  cmd->add_option("--index", f.index,
                  "Entry of the config's address list to serve");
  cmd->add_option("--listen", f.listen, "Listen address host:port");
  if (role == "stoc") {
    cmd->add_option("--dir", f.dir, "Data directory for the disk tier");
    cmd->add_option("--tier", f.tier, "Storage tier")
        ->check(CLI::IsMember({"disk", "mem", "memory"}));
    cmd->add_option("--inject-latency-us", f.inject_latency_us,
                    "Latency added to every request");
  } else if (role == "ltc") {
    cmd->add_option("--coordinator", f.coordinator, "Coordinator address");
    cmd->add_option("--stocs", f.stocs, "Comma-separated StoC addresses");
    cmd->add_option("--workers", f.workers,
                    "Comma-separated compaction worker addresses");
    cmd->add_option("--d", f.d, "Power-of-d placement choices");
    cmd->add_option("--log-replicas", f.log_replicas, "Log replicas");
  } else if (role == "compactor") {
    cmd->add_option("--max-concurrent", f.max_concurrent,
                    "Jobs executed concurrently");
  } else {
    cmd->add_option("--ranges", f.ranges, "Number of ranges");
    cmd->add_option("--ltcs", f.ltcs, "Comma-separated LTC addresses");
    cmd->add_option("--stocs", f.stocs, "Comma-separated StoC addresses");
  }
  cmd->callback([&, role] { exit_code = RunServer(role, f); });
}

int RunDevcluster(const std::string& config_path, double duration_s) {
  Config config;
  char* err = nullptr;
  int rc = config.Load(config_path, &err);
  if (rc != DLSM_OK) return Report(rc, err);
  BlockShutdownSignals();
  dlsm_cluster* cluster = nullptr;
  rc = dlsm_devcluster_start(config.get(), &cluster, &err);
  if (rc != DLSM_OK) return Report(rc, err);
  char* text = nullptr;
  rc = dlsm_devcluster_status(cluster, &text, &err);
  if (rc != DLSM_OK) {
    dlsm_devcluster_stop(cluster);
    return Report(rc, err);
  }
  std::printf("devcluster running, coordinator %s\n%s",
              config.AsJson()["coordinator"].get<std::string>().c_str(),
              TakeString(text).c_str());
  std::fflush(stdout);
  WaitForShutdown(duration_s);
  dlsm_devcluster_stop(cluster);
  return kExitOk;
}

int RunStatus(const std::string& coordinator, const std::string& config_path) {
  std::string coord = coordinator;
  char* err = nullptr;
  if (coord.empty()) {
    Config config;
    int rc = config.Load(config_path, &err);
    if (rc != DLSM_OK) return Report(rc, err);
    coord = config.AsJson()["coordinator"].get<std::string>();
  }
  char* text = nullptr;
  int rc = dlsm_cluster_status(coord.c_str(), &text, &err);
  if (rc != DLSM_OK) return Report(rc, err);
  std::fputs(TakeString(text).c_str(), stdout);
  return kExitOk;
}

int RunBench(const std::string& spec_path, const std::string& out,
             const std::string& config_path, const std::string& coordinator) {
  std::ifstream in(spec_path);
  if (!in) {
    std::fprintf(stderr, "dlsm: cannot read spec %s\n", spec_path.c_str());
    return kExitConfig;
  }
  std::stringstream spec;
  spec << in.rdbuf();
  Config config;
  char* err = nullptr;
  int rc = config.Load(config_path, &err);
  if (rc != DLSM_OK) return Report(rc, err);
  char* summary = nullptr;
  rc = dlsm_bench_run(spec.str().c_str(), config.get(),
                      coordinator.empty() ? nullptr : coordinator.c_str(),
                      out.c_str(), &summary, &err);
  std::fputs(TakeString(summary).c_str(), stdout);
  return Report(rc, err);
}

int RunElasticity(const Json& options, const std::string& out) {
  char* err = nullptr;
  char* summary = nullptr;
  int rc = dlsm_bench_elasticity(options.dump().c_str(), out.c_str(), &summary,
                                 &err);
  std::fputs(TakeString(summary).c_str(), stdout);
  return Report(rc, err);
}

int ShowConfig(const std::string& config_path) {
  Config config;
  char* err = nullptr;
  int rc = config.Load(config_path, &err);
  if (rc != DLSM_OK) return Report(rc, err);
  std::fputs(TakeString(dlsm_config_render(config.get())).c_str(), stdout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dlsm: disaggregated LSM key-value store"};
  app.require_subcommand(1);
  int exit_code = kExitOk;

  ServerFlags stoc_flags, ltc_flags, compactor_flags, coord_flags;
  AddServerCommand(app, "stoc", "Run a storage component", stoc_flags,
                   exit_code);
  AddServerCommand(app, "ltc", "Run an LSM-tree component", ltc_flags,
                   exit_code);
  AddServerCommand(app, "compactor", "Run a compaction worker",
                   compactor_flags, exit_code);
  AddServerCommand(app, "coord", "Run the coordinator", coord_flags,
                   exit_code);

  std::string dev_config;
  double dev_duration = 0;
  CLI::App* dev = app.add_subcommand(
      "devcluster", "Run every component in one process");
  dev->add_option("--config", dev_config, "JSON config file");
  dev->add_option("--duration", dev_duration,
                  "Seconds to run; 0 waits for a signal");
  dev->callback([&] { exit_code = RunDevcluster(dev_config, dev_duration); });

  CLI::App* cluster = app.add_subcommand("cluster", "Operator commands");
  cluster->require_subcommand(1);
  std::string status_coord, status_config;
  CLI::App* status =
      cluster->add_subcommand("status", "Print the assignment table");
  auto* coord_opt =
      status->add_option("--coordinator", status_coord, "Coordinator host:port");
  status->add_option("--config", status_config, "JSON config file")
      ->excludes(coord_opt);
  status->callback(
      [&] { exit_code = RunStatus(status_coord, status_config); });

  CLI::App* bench = app.add_subcommand("bench", "Benchmarks");
  bench->require_subcommand(1);
  std::string spec_path, run_out = "bench-out", run_config, run_coord;
  CLI::App* run = bench->add_subcommand("run", "Run a workload spec");
  run->add_option("--spec", spec_path, "Workload spec JSON file")->required();
  run->add_option("--out", run_out, "Output directory");
  run->add_option("--config", run_config,
                  "Devcluster config used when --coordinator is absent");
  run->add_option("--coordinator", run_coord,
                  "Coordinator host:port of a running cluster");
  run->callback(
      [&] { exit_code = RunBench(spec_path, run_out, run_config, run_coord); });

  std::string el_out = "elasticity-out", el_transport = "sim";
  int el_max = 4, el_stocs = 4, el_start = 1, el_ranges = 64,
      el_clients = 10;
  uint64_t el_cpu = 400, el_seed = 1;
  CLI::App* el = bench->add_subcommand(
      "elasticity", "Grow and shrink LTCs as load rises and falls");
  el->add_option("--max-ltcs", el_max, "Largest LTC count");
  el->add_option("--stocs", el_stocs, "StoC count");
  el->add_option("--start-ltcs", el_start, "Initial LTC count");
  el->add_option("--ranges", el_ranges, "Number of ranges");
  el->add_option("--clients-per-ltc", el_clients,
                 "Client threads added per LTC of load");
  el->add_option("--cpu-cost-us", el_cpu, "LTC compute per operation");
  el->add_option("--transport", el_transport, "sim or tcp")
      ->check(CLI::IsMember({"sim", "tcp"}));
  el->add_option("--seed", el_seed, "Seed");
  el->add_option("--out", el_out, "Output directory");
  el->callback([&] {
    Json o = {{"max_ltcs", el_max},       {"stocs", el_stocs},
              {"start_ltcs", el_start},   {"n_ranges", el_ranges},
              {"clients_per_ltc", el_clients}, {"cpu_cost_us", el_cpu},
              {"transport", el_transport}, {"seed", el_seed}};
    exit_code = RunElasticity(o, el_out);
  });

  std::string show_config;
  CLI::App* cfg = app.add_subcommand("config", "Configuration helpers");
  cfg->require_subcommand(1);
  CLI::App* show = cfg->add_subcommand(
      "show", "Print the effective config after environment overrides");
  show->add_option("--config", show_config, "JSON config file");
  show->callback([&] { exit_code = ShowConfig(show_config); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "dlsm: %s\n", e.what());
    return kExitRuntime;
  }
  return exit_code;
}
