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

#ifndef DLSM_DLSM_H_
#define DLSM_DLSM_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DLSM_EXPORT __declspec(dllexport)
#else
#define DLSM_EXPORT __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Result codes. Values are stable and match the status field of error
   responses on the wire (docs/protocol.md). */
enum {
  DLSM_OK = 0,
  DLSM_NOT_FOUND = 1,
  DLSM_ALREADY_EXISTS = 2,
  DLSM_INVALID_ARGUMENT = 3,
  DLSM_CORRUPTION = 4,
  DLSM_CHECKSUM_MISMATCH = 5,
  DLSM_IO_ERROR = 6,
  DLSM_OUT_OF_SPACE = 7,
  DLSM_OUT_OF_RANGE = 8,
  DLSM_NOT_OWNER = 9,
  DLSM_UNAVAILABLE = 10,
  DLSM_TIMEOUT = 11,
  DLSM_CONNECTION_FAILED = 12,
  DLSM_OVERSIZE = 13,
  DLSM_STALE_EPOCH = 14,
  DLSM_ALREADY_MEMBER = 20,
  DLSM_LAST_LTC = 21,
  DLSM_UNKNOWN_LTC = 22,
  DLSM_CONFIG_ERROR = 23,
  DLSM_BUSY = 24,
  DLSM_INTERNAL = 33
};

/* Every fallible call returns a result code. When it is not DLSM_OK and
   `err` is non-null, *err receives a message owned by the caller. Strings
   and buffers returned by the library are released with dlsm_free. */
DLSM_EXPORT void dlsm_free(void* p);
DLSM_EXPORT const char* dlsm_code_name(int code);

/* Configuration. */
typedef struct dlsm_config dlsm_config;

/* Reads a JSON config file (path may be NULL for defaults) and applies
   DLSM_<FIELD> environment overrides, then validates. */
DLSM_EXPORT int dlsm_config_load(const char* path, dlsm_config** out,
                                 char** err);
/* Parses JSON text with the same rules, without environment overrides. */
DLSM_EXPORT int dlsm_config_parse(const char* json, dlsm_config** out,
                                  char** err);
DLSM_EXPORT char* dlsm_config_render(const dlsm_config* config);
DLSM_EXPORT void dlsm_config_destroy(dlsm_config* config);

/* A single component serving on the address the config assigns it.
   role is "stoc", "ltc", "compactor" or "coord"; index selects the entry
   in the corresponding address list and is ignored for "coord". */
typedef struct dlsm_server dlsm_server;

DLSM_EXPORT int dlsm_server_start(const dlsm_config* config, const char* role,
                                  int index, dlsm_server** out, char** err);
DLSM_EXPORT const char* dlsm_server_address(const dlsm_server* server);
/* Stops the component and releases the handle. */
DLSM_EXPORT void dlsm_server_stop(dlsm_server* server);

/* Every component in one process. */
typedef struct dlsm_cluster dlsm_cluster;

DLSM_EXPORT int dlsm_devcluster_start(const dlsm_config* config,
                                      dlsm_cluster** out, char** err);
/* component is a StoC, LTC or worker address from the config. */
DLSM_EXPORT int dlsm_devcluster_kill(dlsm_cluster* cluster,
                                     const char* component, char** err);
DLSM_EXPORT int dlsm_devcluster_restart(dlsm_cluster* cluster,
                                        const char* component, char** err);
DLSM_EXPORT int dlsm_devcluster_add_ltc(dlsm_cluster* cluster,
                                        char** address, char** err);
DLSM_EXPORT int dlsm_devcluster_remove_ltc(dlsm_cluster* cluster,
                                           const char* address, char** err);
DLSM_EXPORT int dlsm_devcluster_status(dlsm_cluster* cluster, char** text,
                                       char** err);
DLSM_EXPORT void dlsm_devcluster_stop(dlsm_cluster* cluster);

/* Key-value client. */
typedef struct dlsm_client dlsm_client;

/* Connects over sockets to the coordinator at "host:port". */
DLSM_EXPORT int dlsm_client_open(const char* coordinator, dlsm_client** out,
                                 char** err);
DLSM_EXPORT int dlsm_devcluster_client(dlsm_cluster* cluster,
                                       dlsm_client** out, char** err);
DLSM_EXPORT int dlsm_put(dlsm_client* client, const char* key, size_t key_len,
                         const char* value, size_t value_len, char** err);
DLSM_EXPORT int dlsm_delete(dlsm_client* client, const char* key,
                            size_t key_len, char** err);
/* *found is 0 when the key is absent; otherwise *value (length *value_len)
   must be released with dlsm_free. */
DLSM_EXPORT int dlsm_get(dlsm_client* client, const char* key, size_t key_len,
                         char** value, size_t* value_len, int* found,
                         char** err);
DLSM_EXPORT int dlsm_add_ltc(dlsm_client* client, const char* address,
                             char** err);
DLSM_EXPORT int dlsm_remove_ltc(dlsm_client* client, const char* address,
                                char** err);
DLSM_EXPORT void dlsm_client_close(dlsm_client* client);

/* Formatted cluster status from the coordinator at "host:port". */
DLSM_EXPORT int dlsm_cluster_status(const char* coordinator, char** text,
                                    char** err);

/* Benchmarks. Both write metrics.csv, plot.gp and summary.md to out_dir
   and return a short summary in *summary.
   dlsm_bench_run drives the workload in spec_json against the coordinator
   at `coordinator`, or, when it is NULL, against a devcluster started from
   `config` (NULL = defaults). In verify mode a mismatch is DLSM_CORRUPTION.
   dlsm_bench_elasticity takes a JSON object of scenario options (NULL =
   defaults): start_ltcs, max_ltcs, stocs, n_ranges, transport, cpu_cost_us,
   clients_per_ltc, write_fraction, key_count, value_size_bytes,
   saturation_factor, sustain_s, unloaded_s, measure_s, max_phase_s,
   seed. */
DLSM_EXPORT int dlsm_bench_run(const char* spec_json, const dlsm_config* config,
                               const char* coordinator, const char* out_dir,
                               char** summary, char** err);
DLSM_EXPORT int dlsm_bench_elasticity(const char* options_json,
                                      const char* out_dir, char** summary,
                                      char** err);

#ifdef __cplusplus
}
#endif

#endif /* DLSM_DLSM_H_ */
