// Copyright 2026 The SDA Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "sda/sda.h"

#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "sda/error.hpp"
#include "sda/inference.hpp"
#include "sda/model.hpp"
#include "sda/run.hpp"

struct sda_config {
  sda::RunConfig config;
  mutable std::string json;
};

struct sda_result {
  sda::RunOutcome outcome;
};

struct sda_model {
  sda::Model model;
  std::string manifest;
};

namespace {

thread_local std::string g_last_error;

sda_status Fail(sda_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename Fn>
sda_status Guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return SDA_OK;
  } catch (const sda::Error& e) {
    return Fail(static_cast<sda_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return Fail(SDA_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return Fail(SDA_ERR_INTERNAL, e.what());
  } catch (...) {
    return Fail(SDA_ERR_INTERNAL, "unknown error");
  }
}

void NotNull(const void* p, const char* what) {
  if (!p) sda::Fail(sda::ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

const std::vector<std::string>& Keys() {
  static const std::vector<std::string> keys = sda::RunConfigKeys();
  return keys;
}

const std::vector<std::string>& Commands() {
  static const std::vector<std::string> commands = sda::RunCommands();
  return commands;
}

sda_status Wrap(sda::RunConfig config, sda_config** out) {
  auto handle = std::make_unique<sda_config>();
  handle->config = std::move(config);
  *out = handle.release();
  return SDA_OK;
}

}  // namespace

extern "C" {

const char* sda_version(void) { return SDA_VERSION; }

const char* sda_status_name(sda_status status) {
  switch (status) {
    case SDA_OK:
      return "ok";
    case SDA_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case SDA_ERR_SHAPE_MISMATCH:
      return "shape_mismatch";
    case SDA_ERR_NUMERIC:
      return "numeric";
    case SDA_ERR_CONVERGENCE:
      return "convergence";
    case SDA_ERR_PARSE:
      return "parse";
    case SDA_ERR_IO:
      return "io";
    case SDA_ERR_STATE:
      return "state";
    case SDA_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* sda_last_error(void) { return g_last_error.c_str(); }

sda_status sda_config_new(sda_config** out) {
  return Guard([&] {
    NotNull(out, "out");
    Wrap(sda::RunConfig{}, out);
  });
}

sda_status sda_config_parse(const char* text, sda_config** out) {
  return Guard([&] {
    NotNull(text, "text");
    NotNull(out, "out");
    Wrap(sda::ParseRunConfig(text), out);
  });
}

sda_status sda_config_load(const char* path, sda_config** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    Wrap(sda::LoadRunConfig(path), out);
  });
}

sda_status sda_config_from_json(const char* json, sda_config** out) {
  return Guard([&] {
    NotNull(json, "json");
    NotNull(out, "out");
    Wrap(sda::RunConfigFromJson(json), out);
  });
}

sda_status sda_config_set(sda_config* config, const char* key, const char* value) {
  return Guard([&] {
    NotNull(config, "config");
    NotNull(key, "key");
    NotNull(value, "value");
    config->config.Set(key, value);
  });
}

sda_status sda_config_validate(const sda_config* config) {
  return Guard([&] {
    NotNull(config, "config");
    config->config.Validate();
  });
}

const char* sda_config_json(const sda_config* config) {
  if (!config) return nullptr;
  config->json = config->config.ToJson();
  return config->json.c_str();
}

void sda_config_free(sda_config* config) { delete config; }

size_t sda_config_key_count(void) { return Keys().size(); }

const char* sda_config_key(size_t index) {
  return index < Keys().size() ? Keys()[index].c_str() : nullptr;
}

size_t sda_command_count(void) { return Commands().size(); }

const char* sda_command_name(size_t index) {
  return index < Commands().size() ? Commands()[index].c_str() : nullptr;
}

sda_status sda_run(const char* command, const sda_config* config, sda_result** out) {
  return Guard([&] {
    NotNull(command, "command");
    NotNull(config, "config");
    NotNull(out, "out");
    auto r = std::make_unique<sda_result>();
    r->outcome = sda::Run(command, config->config);
    *out = r.release();
  });
}

sda_status sda_rerun(const char* manifest_path, const char* output_dir, sda_result** out) {
  return Guard([&] {
    NotNull(manifest_path, "manifest_path");
    NotNull(out, "out");
    auto r = std::make_unique<sda_result>();
    r->outcome = sda::Rerun(manifest_path, output_dir ? output_dir : "");
    *out = r.release();
  });
}

sda_status sda_summarize(const char* const* manifest_paths, size_t count,
                         const char* output_dir, sda_result** out) {
  return Guard([&] {
    NotNull(out, "out");
    if (count > 0) NotNull(manifest_paths, "manifest_paths");
    std::vector<std::string> paths;
    for (size_t i = 0; i < count; ++i) {
      NotNull(manifest_paths[i], "manifest path");
      paths.emplace_back(manifest_paths[i]);
    }
    auto r = std::make_unique<sda_result>();
    r->outcome = sda::Summarize(paths, output_dir ? output_dir : "");
    *out = r.release();
  });
}

const char* sda_result_command(const sda_result* result) {
  return result ? result->outcome.command.c_str() : nullptr;
}

const char* sda_result_json(const sda_result* result) {
  return result ? result->outcome.results_json.c_str() : nullptr;
}

const char* sda_result_report(const sda_result* result) {
  return result ? result->outcome.report.c_str() : nullptr;
}

const char* sda_result_manifest_path(const sda_result* result) {
  return result ? result->outcome.manifest_path.c_str() : nullptr;
}

size_t sda_result_artifact_count(const sda_result* result) {
  return result ? result->outcome.artifacts.size() : 0;
}

const char* sda_result_artifact(const sda_result* result, size_t index) {
  if (!result || index >= result->outcome.artifacts.size()) return nullptr;
  return result->outcome.artifacts[index].c_str();
}

void sda_result_free(sda_result* result) { delete result; }

sda_status sda_model_load(const char* dir, sda_model** out) {
  return Guard([&] {
    NotNull(dir, "dir");
    NotNull(out, "out");
    auto m = std::make_unique<sda_model>(sda_model{sda::Model::Load(dir), ""});
    m->manifest = m->model.ManifestJson();
    *out = m.release();
  });
}

size_t sda_model_num_labels(const sda_model* model) {
  return model ? model->model.num_labels() : 0;
}

const char* sda_model_label(const sda_model* model, size_t index) {
  if (!model || index >= model->model.labels().size()) return nullptr;
  return model->model.labels()[index].c_str();
}

const char* sda_model_manifest_json(const sda_model* model) {
  return model ? model->manifest.c_str() : nullptr;
}

sda_status sda_model_predict(const sda_model* model, const char* text, const char* strategy,
                             size_t m, uint64_t seed, int* label, double* probs,
                             size_t probs_len) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(text, "text");
    sda::InferConfig config;
    if (strategy) config.strategy = sda::ParseStrategy(strategy);
    config.m = m;
    config.seed = seed;
    config.Validate();
    const std::size_t n = model->model.num_labels();
    if (probs && probs_len < n) {
      sda::Fail(sda::ErrorCode::kInvalidArgument,
                "probs holds " + std::to_string(probs_len) + " values, need " + std::to_string(n));
    }
    sda::Document doc;
    doc.text = text;
    const sda::Prediction p = sda::Predict(model->model, model->model.Prepare(doc), config, 0);
    if (label) *label = p.label;
    if (probs) {
      for (std::size_t i = 0; i < n; ++i) probs[i] = p.probs[i];
    }
  });
}

void sda_model_free(sda_model* model) { delete model; }

}  // extern "C"
