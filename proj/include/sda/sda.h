/* Copyright 2026 The SDA Authors.
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

/* C interface to the sda library.
 *
 * All functions returning sda_status report failure with a nonzero code and
 * leave a message retrievable with sda_last_error() on the calling thread.
 * Output handles are only written on success. Strings returned by accessor
 * functions are owned by the handle and stay valid until it is freed (or,
 * for sda_config_json, until the config is next modified). Config keys and
 * command semantics are documented in the README.
 */

#ifndef SDA_SDA_H_
#define SDA_SDA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SDA_API __declspec(dllexport)
#else
#define SDA_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sda_status {
  SDA_OK = 0,
  SDA_ERR_INVALID_ARGUMENT = 1,
  SDA_ERR_SHAPE_MISMATCH = 2,
  SDA_ERR_NUMERIC = 3,
  SDA_ERR_CONVERGENCE = 4,
  SDA_ERR_PARSE = 5,
  SDA_ERR_IO = 6,
  SDA_ERR_STATE = 7,
  SDA_ERR_INTERNAL = 8
} sda_status;

SDA_API const char* sda_version(void);
/* Stable lower-case name, e.g. "invalid_argument". */
SDA_API const char* sda_status_name(sda_status status);
/* Message of the last failed call on this thread; "" if none. */
SDA_API const char* sda_last_error(void);

/* Run configuration. */
typedef struct sda_config sda_config;

SDA_API sda_status sda_config_new(sda_config** out);
SDA_API sda_status sda_config_parse(const char* text, sda_config** out);
SDA_API sda_status sda_config_load(const char* path, sda_config** out);
SDA_API sda_status sda_config_from_json(const char* json, sda_config** out);
SDA_API sda_status sda_config_set(sda_config* config, const char* key, const char* value);
SDA_API sda_status sda_config_validate(const sda_config* config);
/* Resolved configuration as a flat JSON object; NULL on a NULL handle. */
SDA_API const char* sda_config_json(const sda_config* config);
SDA_API void sda_config_free(sda_config* config);

SDA_API size_t sda_config_key_count(void);
SDA_API const char* sda_config_key(size_t index);

/* Commands: train, eval, sweep-lambda, probe, export, gen-synth. */
SDA_API size_t sda_command_count(void);
SDA_API const char* sda_command_name(size_t index);

/* Outcome of a command: results JSON, report text, artifacts, manifest. */
typedef struct sda_result sda_result;

SDA_API sda_status sda_run(const char* command, const sda_config* config, sda_result** out);
/* output_dir may be NULL or "" to reuse the manifest's directory. */
SDA_API sda_status sda_rerun(const char* manifest_path, const char* output_dir,
                             sda_result** out);
SDA_API sda_status sda_summarize(const char* const* manifest_paths, size_t count,
                                 const char* output_dir, sda_result** out);

SDA_API const char* sda_result_command(const sda_result* result);
SDA_API const char* sda_result_json(const sda_result* result);
SDA_API const char* sda_result_report(const sda_result* result);
SDA_API const char* sda_result_manifest_path(const sda_result* result);
SDA_API size_t sda_result_artifact_count(const sda_result* result);
SDA_API const char* sda_result_artifact(const sda_result* result, size_t index);
SDA_API void sda_result_free(sda_result* result);

/* Trained model. */
typedef struct sda_model sda_model;

SDA_API sda_status sda_model_load(const char* dir, sda_model** out);
SDA_API size_t sda_model_num_labels(const sda_model* model);
SDA_API const char* sda_model_label(const sda_model* model, size_t index);
SDA_API const char* sda_model_manifest_json(const sda_model* model);
/* Predicts one document. `strategy` is an inference strategy name or NULL
 * for prior-sample. `probs` receives num_labels values when non-NULL and
 * probs_len is large enough; otherwise SDA_ERR_INVALID_ARGUMENT. */
SDA_API sda_status sda_model_predict(const sda_model* model, const char* text,
                                     const char* strategy, size_t m, uint64_t seed,
                                     int* label, double* probs, size_t probs_len);
SDA_API void sda_model_free(sda_model* model);

#ifdef __cplusplus
}
#endif

#endif /* SDA_SDA_H_ */
