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


// Command-line front end over the C interface.
//
// Exit status is 0 on success, the sda_status code (1-8) on a library
// failure and 64 on a usage error. Each failure writes one JSON object to
// stderr: {"event":"error","command":..,"status":..,"code":..,"message":..}.
// Successful runs print a human-readable report on stdout and a
// {"event":"done",..} record on stderr.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sda/sda.h"

namespace {

using json = nlohmann::json;

constexpr int kUsageExit = 64;

struct Options {
  std::string config_path;
  std::vector<std::string> sets;
  std::string output;
  std::vector<std::string> manifests;
  std::string manifest;
  bool keys = false;
};

void Diagnostic(const std::string& command, const std::string& status, int code,
                const std::string& message) {
  json j = {{"event", "error"},
            {"command", command},
            {"status", status},
            {"code", code},
            {"message", message}};
  std::cerr << j.dump() << std::endl;
}

int LibraryFailure(const std::string& command, sda_status s) {
  Diagnostic(command, sda_status_name(s), static_cast<int>(s), sda_last_error());
  return static_cast<int>(s);
}

// Joins a relative output directory onto $SDA_OUTPUT_ROOT when it is set.
std::string UnderOutputRoot(const std::string& dir) {
  const char* root = std::getenv("SDA_OUTPUT_ROOT");
  if (!root || !*root || std::filesystem::path(dir).is_absolute()) return dir;
  return (std::filesystem::path(root) / dir).string();
}

struct ConfigHandle {
  sda_config* ptr = nullptr;
  ~ConfigHandle() { sda_config_free(ptr); }
};

struct ResultHandle {
  sda_result* ptr = nullptr;
  ~ResultHandle() { sda_result_free(ptr); }
};

sda_status BuildConfig(const Options& o, ConfigHandle& cfg) {
  sda_status s = o.config_path.empty() ? sda_config_new(&cfg.ptr)
                                       : sda_config_load(o.config_path.c_str(), &cfg.ptr);
  if (s != SDA_OK) return s;
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    s = sda_config_set(cfg.ptr, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (s != SDA_OK) return s;
  }
  if (!o.output.empty()) {
    s = sda_config_set(cfg.ptr, "output_dir", o.output.c_str());
    if (s != SDA_OK) return s;
  }
  const json resolved = json::parse(sda_config_json(cfg.ptr));
  const std::string out = UnderOutputRoot(resolved.at("output_dir").get<std::string>());
  return sda_config_set(cfg.ptr, "output_dir", out.c_str());
}

int Finish(const std::string& command, const ResultHandle& r) {
  std::cout << sda_result_report(r.ptr) << std::flush;
  json j = {{"event", "done"},
            {"command", command},
            {"manifest", sda_result_manifest_path(r.ptr)},
            {"artifacts", sda_result_artifact_count(r.ptr)}};
  std::cerr << j.dump() << std::endl;
  return 0;
}

int RunCommand(const std::string& command, const Options& o) {
  ConfigHandle cfg;
  if (sda_status s = BuildConfig(o, cfg); s != SDA_OK) return LibraryFailure(command, s);
  ResultHandle r;
  if (sda_status s = sda_run(command.c_str(), cfg.ptr, &r.ptr); s != SDA_OK) {
    return LibraryFailure(command, s);
  }
  return Finish(command, r);
}

int ShowConfig(const Options& o) {
  if (o.keys) {
    for (size_t i = 0; i < sda_config_key_count(); ++i) std::cout << sda_config_key(i) << "\n";
    return 0;
  }
  ConfigHandle cfg;
  sda_status s = BuildConfig(o, cfg);
  if (s == SDA_OK) s = sda_config_validate(cfg.ptr);
  if (s != SDA_OK) return LibraryFailure("config", s);
  std::cout << json::parse(sda_config_json(cfg.ptr)).dump(2) << std::endl;
  return 0;
}

void AddConfigOptions(CLI::App* sub, Options& o) {
  sub->add_option("-c,--config", o.config_path, "Config file of 'key = value' lines")
      ->check(CLI::ExistingFile);
  sub->add_option("-s,--set", o.sets, "Override one key: KEY=VALUE (repeatable)")
      ->check(CLI::Validator(
          [](std::string& kv) {
            return kv.find('=') == std::string::npos ? "expected KEY=VALUE, got '" + kv + "'"
                                                     : std::string();
          },
          "KEY=VALUE"));
  sub->add_option("-o,--output", o.output,
                  "Output directory (relative paths go under $SDA_OUTPUT_ROOT)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic domain adaptation text classifiers.\n"
               "Config keys: run 'sda config --keys'; see README for their meaning.\n"
               "Environment: SDA_OUTPUT_ROOT prefixes relative output directories."};
  app.set_version_flag("--version", std::string(sda_version()));
  app.require_subcommand(1);
  Options o;

  struct Spec {
    const char* name;
    const char* help;
  };
  const Spec run_specs[] = {
      {"train", "Train a model (needs train_path, dev_path); writes model/, train_log.jsonl"},
      {"eval", "Evaluate model_dir on eval_path; writes per-domain tables and predictions"},
      {"sweep-lambda", "Train once per lambda_grid value; writes sweep.tsv and sweep.txt"},
      {"probe", "Linear probes of z for label and domain over model_dir or sweep_dir"},
      {"export", "Export gated hidden vectors or gates of eval_path to export.tsv"},
      {"gen-synth", "Generate the synthetic corpus: train/dev/test JSONL"},
  };
  std::vector<std::pair<std::string, CLI::App*>> runs;
  for (const auto& s : run_specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    AddConfigOptions(sub, o);
    runs.emplace_back(s.name, sub);
  }
  CLI::App* config = app.add_subcommand("config", "Print the resolved, validated config as JSON");
  AddConfigOptions(config, o);
  config->add_flag("--keys", o.keys, "List the accepted config keys");
  CLI::App* summarize =
      app.add_subcommand("summarize", "Mean and standard deviation of results across manifests");
  summarize->add_option("manifests", o.manifests, "Run manifest files")->required()
      ->check(CLI::ExistingFile);
  summarize->add_option("-o,--output", o.output, "Output directory")->required();
  CLI::App* rerun = app.add_subcommand("rerun", "Re-execute the run recorded in a manifest");
  rerun->add_option("manifest", o.manifest, "Run manifest file")->required()
      ->check(CLI::ExistingFile);
  rerun->add_option("-o,--output", o.output, "Output directory (default: the original one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    Diagnostic(argc > 1 ? argv[1] : "", "usage", kUsageExit, e.what());
    return kUsageExit;
  }

  for (const auto& [name, sub] : runs) {
    if (sub->parsed()) return RunCommand(name, o);
  }
  if (config->parsed()) return ShowConfig(o);
  if (summarize->parsed()) {
    std::vector<const char*> paths;
    for (const auto& p : o.manifests) paths.push_back(p.c_str());
    ResultHandle r;
    const std::string out = UnderOutputRoot(o.output);
    if (sda_status s = sda_summarize(paths.data(), paths.size(), out.c_str(), &r.ptr);
        s != SDA_OK) {
      return LibraryFailure("summarize", s);
    }
    return Finish("summarize", r);
  }
  ResultHandle r;
  const std::string out = o.output.empty() ? "" : UnderOutputRoot(o.output);
  if (sda_status s = sda_rerun(o.manifest.c_str(), out.c_str(), &r.ptr); s != SDA_OK) {
    return LibraryFailure("rerun", s);
  }
  return Finish("rerun", r);
}
