/*
 * Copyright 2026 The blecc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BLECC_BLECC_H
#define BLECC_BLECC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BLECC_API __declspec(dllexport)
#else
#define BLECC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum blecc_status {
  BLECC_OK = 0,
  BLECC_ERR_CONFIG = 1,
  BLECC_ERR_SIMULATION = 2,
  BLECC_ERR_INVALID_ARGUMENT = 3,
  BLECC_ERR_PARSE = 4,
  BLECC_ERR_CAPACITY = 5,
  BLECC_ERR_INTERNAL = 6
} blecc_status;

typedef enum blecc_pdu_kind {
  BLECC_PDU_LEGACY = 0,
  BLECC_PDU_EXTENDED = 1
} blecc_pdu_kind;

typedef struct blecc_scenario blecc_scenario;

typedef struct blecc_run_options {
  const char* out_dir;
  int trace;
  int dump_pdus;
  int require_complete;
  unsigned threads; /* 0 = one per core */
} blecc_run_options;

typedef struct blecc_run_summary {
  size_t runs;
  size_t complete;
} blecc_run_summary;

/* Message of the last failed call on this thread; never NULL. */
BLECC_API const char* blecc_last_error(void);
BLECC_API const char* blecc_version(void);

BLECC_API blecc_status blecc_scenario_load(const char* path, blecc_scenario** out);
/* Replaces the seed list with a single seed. */
BLECC_API blecc_status blecc_scenario_override_seed(blecc_scenario* scenario, uint64_t seed);
BLECC_API blecc_status blecc_scenario_run_count(const blecc_scenario* scenario, size_t* out);
/* summary may be NULL. On BLECC_ERR_SIMULATION the output files may still
   have been written. */
BLECC_API blecc_status blecc_scenario_run(const blecc_scenario* scenario, const blecc_run_options* options,
                                          blecc_run_summary* summary);
BLECC_API void blecc_scenario_free(blecc_scenario* scenario);

BLECC_API blecc_status blecc_segment_count(size_t payload_length, size_t z, size_t* out);

/* Builds and serializes one advertising frame carrying `data` as service
   data. madl is ignored for legacy PDUs. */
BLECC_API blecc_status blecc_pdu_encode(blecc_pdu_kind kind, size_t madl, const uint8_t address[6],
                                        const uint8_t uuid[16], const uint8_t* data, size_t data_len,
                                        uint8_t* out, size_t out_cap, size_t* out_len);

/* Parses a frame and extracts its service data and UUID. */
BLECC_API blecc_status blecc_pdu_decode(const uint8_t* frame, size_t frame_len, uint8_t uuid[16], uint8_t* data,
                                        size_t data_cap, size_t* data_len);

#ifdef __cplusplus
}
#endif

#endif /* BLECC_BLECC_H */
