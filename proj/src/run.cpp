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


#include "sda/run.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"
#include "sda/error.hpp"

namespace sda {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

constexpr int kRunManifestVersion = 1;

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void BadValue(std::string_view key, std::string_view value, const char* expected) {
  Fail(ErrorCode::kInvalidArgument, "key '" + std::string(key) + "': expected " + expected +
                                        ", got '" + std::string(value) + "'");
}

double ToDouble(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out)) {
    BadValue(key, v, "a finite number");
  }
  return out;
}

std::uint64_t ToU64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
    BadValue(key, v, "a non-negative integer");
  }
  return out;
}

std::vector<std::string> SplitList(std::string_view v) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto end = std::min(v.find(',', start), v.size());
    const std::string item = Trim(v.substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    start = end + 1;
  }
  return out;
}

std::vector<double> ToDoubles(std::string_view key, std::string_view v) {
  std::vector<double> out;
  for (const auto& s : SplitList(v)) out.push_back(ToDouble(key, s));
  return out;
}

std::vector<std::size_t> ToSizes(std::string_view key, std::string_view v) {
  std::vector<std::size_t> out;
  for (const auto& s : SplitList(v)) out.push_back(static_cast<std::size_t>(ToU64(key, s)));
  return out;
}

template <typename T>
T Parsed(std::string_view key, std::string_view v, T (*parse)(std::string_view)) {
  try {
    return parse(v);
  } catch (const Error& e) {
    Fail(ErrorCode::kInvalidArgument, "key '" + std::string(key) + "': " + e.what());
  }
}

ExportKind ParseExportKind(std::string_view v) {
  if (v == "hidden") return ExportKind::kHidden;
  if (v == "gate") return ExportKind::kGate;
  Fail(ErrorCode::kInvalidArgument, "unknown export kind '" + std::string(v) +
                                        "' (expected hidden or gate)");
}

const char* ExportKindName(ExportKind k) { return k == ExportKind::kHidden ? "hidden" : "gate"; }

struct Field {
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<json(const RunConfig&)> get;
};

#define SDA_SIZE_FIELD(name, member)                                                       \
  Field{name,                                                                              \
        [](RunConfig& c, std::string_view v) {                                             \
          c.member = static_cast<std::size_t>(ToU64(name, v));                             \
        },                                                                                 \
        [](const RunConfig& c) { return json(c.member); }}
#define SDA_DOUBLE_FIELD(name, member)                                                     \
  Field{name, [](RunConfig& c, std::string_view v) { c.member = ToDouble(name, v); },      \
        [](const RunConfig& c) { return json(c.member); }}
#define SDA_U64_FIELD(name, member)                                                        \
  Field{name, [](RunConfig& c, std::string_view v) { c.member = ToU64(name, v); },         \
        [](const RunConfig& c) { return json(c.member); }}
#define SDA_STRING_FIELD(name, member)                                                     \
  Field{name, [](RunConfig& c, std::string_view v) { c.member = std::string(v); },         \
        [](const RunConfig& c) { return json(c.member); }}

const std::vector<Field>& Fields() {
  static const std::vector<Field> fields = {
      Field{"model",
            [](RunConfig& c, std::string_view v) {
              c.model.family = Parsed("model", v, &ParseFamily);
            },
            [](const RunConfig& c) { return json(FamilyName(c.model.family)); }},
      Field{"k",
            [](RunConfig& c, std::string_view v) {
              c.k = static_cast<std::size_t>(ToU64("k", v));
            },
            [](const RunConfig& c) { return json(c.ResolvedK()); }},
      SDA_DOUBLE_FIELD("lambda", train.lambda),
      Field{"lambda_schedule",
            [](RunConfig& c, std::string_view v) {
              c.train.schedule = Parsed("lambda_schedule", v, &ParseSchedule);
            },
            [](const RunConfig& c) { return json(ScheduleName(c.train.schedule)); }},
      SDA_SIZE_FIELD("anneal_steps", train.anneal_steps),
      Field{"lambda_grid",
            [](RunConfig& c, std::string_view v) { c.lambda_grid = ToDoubles("lambda_grid", v); },
            [](const RunConfig& c) { return json(c.lambda_grid); }},
      Field{"regime",
            [](RunConfig& c, std::string_view v) { c.regime = Parsed("regime", v, &ParseRegime); },
            [](const RunConfig& c) { return json(RegimeName(c.regime)); }},
      Field{"mode",
            [](RunConfig& c, std::string_view v) {
              c.model.mode = Parsed("mode", v, &ParseTokenMode);
            },
            [](const RunConfig& c) { return json(TokenModeName(c.model.mode)); }},
      SDA_STRING_FIELD("train_path", train_path),
      SDA_STRING_FIELD("dev_path", dev_path),
      SDA_STRING_FIELD("eval_path", eval_path),
      SDA_STRING_FIELD("model_dir", model_dir),
      SDA_STRING_FIELD("sweep_dir", sweep_dir),
      SDA_STRING_FIELD("output_dir", output_dir),
      SDA_SIZE_FIELD("min_count", min_count),
      SDA_SIZE_FIELD("max_vocab", max_vocab),
      SDA_SIZE_FIELD("embed_dim", model.encoder.embed_dim),
      SDA_SIZE_FIELD("filters", model.encoder.filters),
      Field{"windows",
            [](RunConfig& c, std::string_view v) { c.model.encoder.windows = ToSizes("windows", v); },
            [](const RunConfig& c) { return json(c.model.encoder.windows); }},
      SDA_DOUBLE_FIELD("dropout", model.encoder.dropout),
      SDA_SIZE_FIELD("hidden", model.hidden),
      SDA_SIZE_FIELD("label_embed", model.label_embed),
      SDA_SIZE_FIELD("domain_embed", model.domain_embed),
      SDA_DOUBLE_FIELD("w_dom", model.w_dom),
      SDA_DOUBLE_FIELD("learning_rate", train.learning_rate),
      SDA_SIZE_FIELD("batch_size", train.batch_size),
      SDA_SIZE_FIELD("max_epochs", train.max_epochs),
      SDA_SIZE_FIELD("patience", train.patience),
      SDA_SIZE_FIELD("evals_per_epoch", train.evals_per_epoch),
      SDA_U64_FIELD("seed", train.seed),
      Field{"infer_strategy",
            [](RunConfig& c, std::string_view v) {
              c.infer.strategy = Parsed("infer_strategy", v, &ParseStrategy);
            },
            [](const RunConfig& c) { return json(StrategyName(c.infer.strategy)); }},
      SDA_SIZE_FIELD("infer_m", infer.m),
      SDA_U64_FIELD("infer_seed", infer.seed),
      SDA_SIZE_FIELD("probe_runs", probe_runs),
      Field{"export_kind",
            [](RunConfig& c, std::string_view v) {
              c.export_kind = Parsed("export_kind", v, &ParseExportKind);
            },
            [](const RunConfig& c) { return json(ExportKindName(c.export_kind)); }},
      SDA_SIZE_FIELD("synth_domains", synth.domains),
      SDA_SIZE_FIELD("synth_groups", synth.groups),
      Field{"synth_held_out",
            [](RunConfig& c, std::string_view v) { c.synth.held_out = ToSizes("synth_held_out", v); },
            [](const RunConfig& c) { return json(c.synth.held_out); }},
      SDA_SIZE_FIELD("synth_per_domain", synth.per_domain),
      SDA_SIZE_FIELD("synth_doc_length", synth.doc_length),
      SDA_SIZE_FIELD("synth_cues", synth.cues),
      SDA_SIZE_FIELD("synth_filler_vocab", synth.filler_vocab),
      SDA_SIZE_FIELD("synth_group_vocab", synth.group_vocab),
      SDA_SIZE_FIELD("synth_cue_vocab", synth.cue_vocab),
      SDA_DOUBLE_FIELD("synth_overlap", synth.overlap),
      SDA_DOUBLE_FIELD("synth_shared_cue_rate", synth.shared_cue_rate),
      SDA_DOUBLE_FIELD("synth_positive_rate", synth.positive_rate),
      SDA_DOUBLE_FIELD("synth_noise", synth.noise),
      SDA_DOUBLE_FIELD("synth_unlabeled_domain_rate", synth.unlabeled_domain_rate),
      SDA_U64_FIELD("synth_seed", synth.seed),
      SDA_DOUBLE_FIELD("synth_dev_ratio", synth_dev_ratio),
      SDA_DOUBLE_FIELD("synth_test_ratio", synth_test_ratio),
  };
  return fields;
}

#undef SDA_SIZE_FIELD
#undef SDA_DOUBLE_FIELD
#undef SDA_U64_FIELD
#undef SDA_STRING_FIELD

const Field* FindField(std::string_view key) {
  for (const auto& f : Fields()) {
    if (f.key == key) return &f;
  }
  return nullptr;
}

// Flat JSON value back to config text.
std::string ValueText(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ',';
      out += ValueText(item);
    }
    return out;
  }
  return v.dump();
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
  out.close();
  if (!out) Fail(ErrorCode::kIo, "cannot write '" + path.string() + "'");
}

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Shortest(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string PadRight(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

fs::path MakeOutputDir(const RunConfig& c) {
  const fs::path out(c.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) Fail(ErrorCode::kIo, "output_dir '" + c.output_dir + "': " + ec.message());
  return out;
}

Corpus LoadNamed(const std::string& key, const std::string& path, TokenMode mode) {
  if (path.empty()) Fail(ErrorCode::kInvalidArgument, "key '" + key + "' is required");
  if (!fs::exists(path)) Fail(ErrorCode::kIo, "key '" + key + "': no such file '" + path + "'");
  return LoadCorpus(path, mode);
}

Model LoadModelDir(const RunConfig& c) {
  if (c.model_dir.empty()) Fail(ErrorCode::kInvalidArgument, "key 'model_dir' is required");
  if (!fs::exists(c.model_dir)) {
    Fail(ErrorCode::kIo, "key 'model_dir': no such directory '" + c.model_dir + "'");
  }
  return Model::Load(c.model_dir);
}

Corpus ApplyRegime(const Corpus& corpus, DomainRegime regime) {
  switch (regime) {
    case DomainRegime::kSemiSupervised:
      return corpus;
    case DomainRegime::kUnsupervised:
      return DropDomains(corpus, 1.0, 0);
    case DomainRegime::kSupervised: {
      std::vector<Document> keep;
      for (const auto& d : corpus.docs) {
        if (d.domain) keep.push_back(d);
      }
      return MakeCorpus(std::move(keep), corpus.mode);
    }
  }
  return corpus;
}

ModelConfig ResolvedModel(const RunConfig& c) {
  ModelConfig m = c.model;
  m.k = c.ResolvedK();
  return m;
}

// Relative paths become absolute so a manifest replays from any directory.
RunConfig Absolute(RunConfig c) {
  for (std::string* p : {&c.train_path, &c.dev_path, &c.eval_path, &c.model_dir, &c.sweep_dir,
                         &c.output_dir}) {
    if (!p->empty()) *p = fs::absolute(*p).lexically_normal().string();
  }
  return c;
}

struct Artifacts {
  explicit Artifacts(fs::path d) : dir(std::move(d)) {}

  fs::path dir;
  std::vector<std::string> names;

  void Write(const std::string& name, const std::string& contents) {
    WriteFile(dir / name, contents);
    names.push_back(name);
  }
};

RunOutcome Outcome(const char* command) {
  RunOutcome out;
  out.command = command;
  return out;
}

void FinishRun(RunOutcome& out, const RunConfig& c, Artifacts& arts, const json& results) {
  for (const auto& name : arts.names) {
    if (!fs::exists(arts.dir / name)) Fail(ErrorCode::kIo, "artifact missing: " + name);
  }
  json m;
  m["format"] = "sda-run";
  m["version"] = kRunManifestVersion;
  m["command"] = out.command;
  m["code_version"] = SDA_VERSION;
  m["config"] = json::parse(c.ToJson());
  m["seeds"] = {{"train", c.train.seed}, {"infer", c.infer.seed}, {"synth", c.synth.seed}};
  m["artifacts"] = arts.names;
  m["results"] = results;
  const fs::path path = arts.dir / "manifest.json";
  WriteFile(path, m.dump(2) + "\n");
  out.results_json = results.dump();
  out.artifacts = arts.names;
  out.artifacts.push_back("manifest.json");
  out.manifest_path = path.string();
}

// Per-domain table: one column per domain plus the unweighted average.
void WriteEvalTables(Artifacts& arts, const Model& model, const Corpus& corpus,
                     const EvalResult& ev, const std::string& prefix, json& results,
                     std::string& report) {
  double avg = 0.0;
  std::size_t columns = 0;
  std::string head = PadRight("", 10), accs = PadRight("accuracy", 10), ns = PadRight("n", 10);
  std::string tsv = "domain\tn\tcorrect\taccuracy\n";
  json per = json::object();
  for (const auto& d : ev.per_domain) {
    head += PadRight(d.domain, 10);
    accs += PadRight(Fixed(100.0 * d.accuracy, 1), 10);
    ns += PadRight(std::to_string(d.n), 10);
    tsv += d.domain + '\t' + std::to_string(d.n) + '\t' + std::to_string(d.correct) + '\t' +
           Fixed(d.accuracy, 6) + '\n';
    per[d.domain] = d.accuracy;
    if (d.n > 0) {
      avg += d.accuracy;
      ++columns;
    }
  }
  avg = columns ? avg / static_cast<double>(columns) : 0.0;
  head += "Average";
  accs += Fixed(100.0 * avg, 1);
  tsv += "Average\t\t\t" + Fixed(avg, 6) + '\n';
  tsv += "all\t" + std::to_string(ev.n) + '\t' + std::to_string(ev.correct) + '\t' +
         Fixed(ev.accuracy, 6) + '\n';
  const std::string table = head + '\n' + accs + '\n' + ns + '\n' + "micro accuracy " +
                            Fixed(100.0 * ev.accuracy, 2) + " (" + std::to_string(ev.correct) +
                            "/" + std::to_string(ev.n) + ")\n";
  arts.Write(prefix + ".txt", table);
  arts.Write(prefix + ".tsv", tsv);

  std::string preds = "id\tdomain\tgold\tpred";
  for (const auto& l : model.labels()) preds += "\tp_" + l;
  preds += "\tnote\n";
  char buf[32];
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const Document& d = corpus.docs[i];
    const Prediction& p = ev.predictions[i];
    preds += d.id + '\t' + d.domain.value_or("UNK") + '\t' + d.label.value_or("UNK") + '\t' +
             model.labels()[static_cast<std::size_t>(p.label)];
    for (double v : p.probs) {
      std::snprintf(buf, sizeof(buf), "\t%.17g", v);
      preds += buf;
    }
    preds += '\t' + p.note + '\n';
  }
  arts.Write(prefix + "_predictions.tsv", preds);
  results["accuracy"] = ev.accuracy;
  results["average"] = avg;
  results["n"] = ev.n;
  results["per_domain"] = per;
  report += table;
}

RunOutcome RunTrain(const RunConfig& c) {
  RunOutcome out = Outcome("train");
  Artifacts arts{MakeOutputDir(c)};
  const Corpus raw = LoadNamed("train_path", c.train_path, c.model.mode);
  const Corpus train = ApplyRegime(raw, c.regime);
  Require(train.size() > 0, "regime '" + std::string(RegimeName(c.regime)) +
                                "' leaves no training documents");
  const Corpus dev = LoadNamed("dev_path", c.dev_path, c.model.mode);
  std::vector<std::string> texts;
  for (const auto& d : train.docs) texts.push_back(d.text);
  Vocab vocab = c.model.mode == TokenMode::kByte ? Vocab::Bytes()
                                                 : Vocab::Build(texts, c.min_count, c.max_vocab);
  const Model init = Model::Create(ResolvedModel(c), std::move(vocab), train.labels,
                                   train.domains, c.train.seed);
  std::ofstream log(arts.dir / "train_log.jsonl", std::ios::binary | std::ios::trunc);
  if (!log) Fail(ErrorCode::kIo, "cannot write train_log.jsonl");
  TrainResult r = Train(init, train, dev, c.train, &log);
  log.close();
  if (!log) Fail(ErrorCode::kIo, "cannot write train_log.jsonl");
  arts.names.push_back("train_log.jsonl");
  json meta = {{"lambda", c.train.lambda},
               {"lambda_schedule", ScheduleName(c.train.schedule)},
               {"regime", RegimeName(c.regime)},
               {"seed", c.train.seed}};
  r.best.set_metadata(meta.dump());
  r.best.Save((arts.dir / "model").string());
  arts.names.push_back("model/model.ckpt");
  arts.names.push_back("model/vocab.txt");

  json results = {{"best_dev_acc", r.best_dev_acc},
                  {"best_step", r.best_step},
                  {"steps", r.log.steps.size()},
                  {"early_stopped", r.early_stopped},
                  {"train_docs", train.size()},
                  {"dev_docs", dev.size()}};
  out.report = "trained " + std::string(FamilyName(c.model.family)) + " on " +
               std::to_string(train.size()) + " documents: " +
               std::to_string(r.log.steps.size()) + " steps, best dev accuracy " +
               Fixed(100.0 * r.best_dev_acc, 2) + " at step " + std::to_string(r.best_step) +
               "\n";
  if (!c.eval_path.empty()) {
    const Corpus ev_corpus = LoadNamed("eval_path", c.eval_path, c.model.mode);
    json ev;
    WriteEvalTables(arts, r.best, ev_corpus, Evaluate(r.best, ev_corpus, c.infer), "eval", ev,
                    out.report);
    results["eval"] = ev;
  }
  FinishRun(out, c, arts, results);
  return out;
}

RunOutcome RunEval(const RunConfig& c) {
  RunOutcome out = Outcome("eval");
  const Model model = LoadModelDir(c);
  const Corpus corpus = LoadNamed("eval_path", c.eval_path, model.config().mode);
  Artifacts arts{MakeOutputDir(c)};
  json results;
  WriteEvalTables(arts, model, corpus, Evaluate(model, corpus, c.infer), "eval", results,
                  out.report);
  FinishRun(out, c, arts, results);
  return out;
}

RunOutcome RunSweep(const RunConfig& c) {
  RunOutcome out = Outcome("sweep-lambda");
  Artifacts arts{MakeOutputDir(c)};
  json results = {{"lambda", json::array()}, {"best_dev_acc", json::array()}};
  if (!c.eval_path.empty()) results["eval_accuracy"] = json::array();
  std::string tsv = "lambda\tbest_dev_acc\teval_accuracy\trun\n";
  std::string table = PadRight("lambda", 10) + PadRight("dev", 10) + "eval\n";
  for (double lambda : c.lambda_grid) {
    RunConfig sub = c;
    sub.train.lambda = lambda;
    const std::string name = "lambda_" + Shortest(lambda);
    sub.output_dir = (arts.dir / name).string();
    const RunOutcome r = RunTrain(sub);
    const json rj = json::parse(r.results_json);
    const double dev = rj.at("best_dev_acc");
    results["lambda"].push_back(lambda);
    results["best_dev_acc"].push_back(dev);
    std::string eval_text;
    if (rj.contains("eval")) {
      const double acc = rj["eval"].at("accuracy");
      results["eval_accuracy"].push_back(acc);
      eval_text = Fixed(acc, 6);
    }
    tsv += Shortest(lambda) + '\t' + Fixed(dev, 6) + '\t' + eval_text + '\t' + name + '\n';
    table += PadRight(Shortest(lambda), 10) + PadRight(Fixed(100.0 * dev, 1), 10) +
             (eval_text.empty() ? "-" : Fixed(100.0 * std::stod(eval_text), 1)) + '\n';
    for (const auto& a : r.artifacts) arts.names.push_back(name + "/" + a);
  }
  arts.Write("sweep.tsv", tsv);
  arts.Write("sweep.txt", table);
  out.report = table;
  FinishRun(out, c, arts, results);
  return out;
}

RunOutcome RunProbeCommand(const RunConfig& c) {
  RunOutcome out = Outcome("probe");
  std::vector<std::string> dirs;
  if (!c.sweep_dir.empty()) {
    if (!fs::is_directory(c.sweep_dir)) {
      Fail(ErrorCode::kIo, "key 'sweep_dir': no such directory '" + c.sweep_dir + "'");
    }
    for (const auto& e : fs::directory_iterator(c.sweep_dir)) {
      if (e.is_directory() && fs::exists(e.path() / "model" / "model.ckpt")) {
        dirs.push_back((e.path() / "model").string());
      }
    }
    if (dirs.empty()) Fail(ErrorCode::kIo, "key 'sweep_dir': no trained models found");
  } else {
    LoadModelDir(c);
    dirs.push_back(c.model_dir);
  }
  struct Entry {
    double lambda;
    Model model;
  };
  std::vector<Entry> models;
  for (const auto& d : dirs) {
    Model m = Model::Load(d);
    const json meta = json::parse(m.metadata());
    models.push_back({meta.value("lambda", std::nan("")), std::move(m)});
  }
  std::stable_sort(models.begin(), models.end(),
                   [](const Entry& a, const Entry& b) { return a.lambda < b.lambda; });
  const Corpus corpus = LoadNamed("eval_path", c.eval_path, models[0].model.config().mode);
  Artifacts arts{MakeOutputDir(c)};
  std::string tsv = "lambda\ttarget\tmean\tstderr\tchance\ttest_size\truns\n";
  std::string table = PadRight("lambda", 10) + PadRight("y-probe", 18) + "d-probe\n";
  json records = json::array();
  for (const auto& e : models) {
    table += PadRight(Shortest(e.lambda), 10);
    for (ProbeTarget t : {ProbeTarget::kLabel, ProbeTarget::kDomain}) {
      const char* tname = t == ProbeTarget::kLabel ? "label" : "domain";
      const ProbeSummary s = RunProbe(e.model, corpus, t, c.train.seed, c.probe_runs);
      std::string runs;
      for (double v : s.runs) runs += (runs.empty() ? "" : ",") + Fixed(v, 6);
      tsv += Shortest(e.lambda) + '\t' + tname + '\t' + Fixed(s.mean, 6) + '\t' +
             Fixed(s.stderr_, 6) + '\t' + Fixed(s.chance, 6) + '\t' +
             std::to_string(s.test_size) + '\t' + runs + '\n';
      table += PadRight(Fixed(100.0 * s.mean, 1) + " +- " + Fixed(100.0 * s.stderr_, 1), 18);
      records.push_back({{"lambda", e.lambda},
                         {"target", tname},
                         {"mean", s.mean},
                         {"stderr", s.stderr_},
                         {"chance", s.chance},
                         {"test_size", s.test_size},
                         {"runs", s.runs}});
    }
    table += '\n';
  }
  arts.Write("probe.tsv", tsv);
  arts.Write("probe.txt", table);
  out.report = table;
  FinishRun(out, c, arts, {{"records", records}});
  return out;
}

RunOutcome RunExport(const RunConfig& c) {
  RunOutcome out = Outcome("export");
  const Model model = LoadModelDir(c);
  const Corpus corpus = LoadNamed("eval_path", c.eval_path, model.config().mode);
  Artifacts arts{MakeOutputDir(c)};
  const auto rows = ExportRepresentations(model, corpus, c.export_kind, c.infer.seed);
  arts.Write("export.tsv", FormatExport(rows));
  const std::size_t width = rows.empty() ? 0 : rows[0].values.size();
  out.report = "exported " + std::to_string(rows.size()) + " rows of width " +
               std::to_string(width) + "\n";
  FinishRun(out, c, arts, {{"rows", rows.size()}, {"width", width}});
  return out;
}

RunOutcome RunGenSynth(const RunConfig& c) {
  RunOutcome out = Outcome("gen-synth");
  Artifacts arts{MakeOutputDir(c)};
  const Corpus all = GenerateSynthetic(c.synth);
  std::vector<std::string> held;
  for (std::size_t d : c.synth.held_out) held.push_back(SynthDomainName(d));
  auto [train, rest] = SplitHeldOut(all, held);
  arts.Write("train.jsonl", SerializeCorpus(train));
  json results = {{"train_docs", train.size()}};
  out.report = "train.jsonl: " + std::to_string(train.size()) + " documents\n";
  if (!held.empty()) {
    auto [dev, test] = SplitDevTest(rest, c.synth_dev_ratio, c.synth_test_ratio, c.synth.seed);
    arts.Write("dev.jsonl", SerializeCorpus(dev));
    arts.Write("test.jsonl", SerializeCorpus(test));
    results["dev_docs"] = dev.size();
    results["test_docs"] = test.size();
    out.report += "dev.jsonl: " + std::to_string(dev.size()) + " documents\n" +
                  "test.jsonl: " + std::to_string(test.size()) + " documents\n";
  }
  FinishRun(out, c, arts, results);
  return out;
}

void Flatten(const json& v, const std::string& prefix, std::map<std::string, double>& out) {
  if (v.is_number()) {
    out[prefix] = v.get<double>();
  } else if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      Flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
    }
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      Flatten(v[i], prefix + "[" + std::to_string(i) + "]", out);
    }
  }
}

}  // namespace

const char* RegimeName(DomainRegime r) {
  switch (r) {
    case DomainRegime::kSupervised:
      return "supervised";
    case DomainRegime::kSemiSupervised:
      return "semi-supervised";
    case DomainRegime::kUnsupervised:
      return "unsupervised";
  }
  return "?";
}

DomainRegime ParseRegime(std::string_view name) {
  if (name == "supervised") return DomainRegime::kSupervised;
  if (name == "semi-supervised") return DomainRegime::kSemiSupervised;
  if (name == "unsupervised") return DomainRegime::kUnsupervised;
  Fail(ErrorCode::kInvalidArgument,
       "unknown regime '" + std::string(name) +
           "' (expected supervised, semi-supervised or unsupervised)");
}

void RunConfig::Set(std::string_view key, std::string_view value) {
  const Field* f = FindField(key);
  if (!f) Fail(ErrorCode::kInvalidArgument, "unknown key '" + std::string(key) + "'");
  f->set(*this, Trim(value));
}

std::string RunConfig::ToJson() const {
  json j = json::object();
  for (const auto& f : Fields()) j[f.key] = f.get(*this);
  return j.dump();
}

std::size_t RunConfig::ResolvedK() const {
  if (k) return *k;
  return model.family == ModelFamily::kScnn ? 1 : 6;
}

void RunConfig::Validate() const {
  auto check = [](const std::string& key, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const Error& e) {
      Fail(e.code(), "key '" + key + "': " + e.what());
    }
  };
  check("k", [&] {
    Require(ResolvedK() >= 1, "must be >= 1");
    Require(model.family != ModelFamily::kScnn || ResolvedK() == 1,
            "scnn has exactly one channel");
  });
  check("model", [&] { ResolvedModel(*this).Validate(); });
  check("lambda", [&] { train.Validate(); });
  check("infer_strategy", [&] { infer.Validate(); });
  check("lambda_grid", [&] {
    Require(!lambda_grid.empty(), "must list at least one value");
    for (double l : lambda_grid) Require(l >= 0.0, "values must be >= 0");
  });
  check("probe_runs", [&] { Require(probe_runs >= 1, "must be >= 1"); });
  check("output_dir", [&] { Require(!output_dir.empty(), "must not be empty"); });
  check("synth_domains", [&] { synth.Validate(); });
  check("synth_dev_ratio", [&] {
    Require(synth_dev_ratio > 0.0 && synth_test_ratio > 0.0, "split ratios must be > 0");
  });
}

RunConfig ParseRunConfig(std::string_view text) {
  RunConfig c;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    const auto end = std::min(text.find('\n', start), text.size());
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (eq == std::string::npos) {
      Fail(ErrorCode::kParse, where + "expected 'key = value', got '" + trimmed + "'");
    }
    const std::string key = Trim(std::string_view(trimmed).substr(0, eq));
    const std::string value = Trim(std::string_view(trimmed).substr(eq + 1));
    if (auto it = seen.find(key); it != seen.end()) {
      Fail(ErrorCode::kParse, where + "key '" + key + "' already set on line " +
                                  std::to_string(it->second));
    }
    seen[key] = line_no;
    try {
      c.Set(key, value);
    } catch (const Error& e) {
      Fail(e.code(), where + e.what());
    }
  }
  return c;
}

RunConfig LoadRunConfig(const std::string& path) { return ParseRunConfig(ReadFile(path)); }

RunConfig RunConfigFromJson(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, std::string("config JSON: ") + e.what());
  }
  if (!j.is_object()) Fail(ErrorCode::kParse, "config JSON must be an object");
  RunConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) c.Set(it.key(), ValueText(it.value()));
  return c;
}

std::vector<std::string> RunConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& f : Fields()) keys.push_back(f.key);
  return keys;
}

std::vector<std::string> RunCommands() {
  return {"train", "eval", "sweep-lambda", "probe", "export", "gen-synth"};
}

RunOutcome Run(std::string_view command, const RunConfig& config) {
  config.Validate();
  const RunConfig c = Absolute(config);
  if (command == "train") return RunTrain(c);
  if (command == "eval") return RunEval(c);
  if (command == "sweep-lambda") return RunSweep(c);
  if (command == "probe") return RunProbeCommand(c);
  if (command == "export") return RunExport(c);
  if (command == "gen-synth") return RunGenSynth(c);
  Fail(ErrorCode::kInvalidArgument, "unknown command '" + std::string(command) + "'");
}

RunOutcome Rerun(const std::string& manifest_path, const std::string& output_dir) {
  json m;
  try {
    m = json::parse(ReadFile(manifest_path));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kParse, "manifest '" + manifest_path + "': " + e.what());
  }
  if (m.value("format", "") != "sda-run" || !m.contains("config") || !m.contains("command")) {
    Fail(ErrorCode::kParse, "'" + manifest_path + "' is not a run manifest");
  }
  RunConfig c = RunConfigFromJson(m["config"].dump());
  if (!output_dir.empty()) c.output_dir = output_dir;
  return Run(m["command"].get<std::string>(), c);
}

RunOutcome Summarize(const std::vector<std::string>& manifest_paths,
                     const std::string& output_dir) {
  Require(!manifest_paths.empty(), "summarize needs at least one manifest");
  RunOutcome out = Outcome("summarize");
  std::string command;
  std::map<std::string, std::vector<double>> values;
  for (const auto& p : manifest_paths) {
    json m;
    try {
      m = json::parse(ReadFile(p));
    } catch (const json::exception& e) {
      Fail(ErrorCode::kParse, "manifest '" + p + "': " + e.what());
    }
    if (m.value("format", "") != "sda-run") {
      Fail(ErrorCode::kParse, "'" + p + "' is not a run manifest");
    }
    const std::string cmd = m.value("command", "");
    if (command.empty()) command = cmd;
    Require(cmd == command, "manifests mix commands '" + command + "' and '" + cmd + "'");
    std::map<std::string, double> flat;
    Flatten(m.value("results", json::object()), "", flat);
    for (const auto& [k, v] : flat) values[k].push_back(v);
  }
  RunConfig c;
  c.output_dir = fs::absolute(output_dir.empty() ? "." : output_dir).string();
  Artifacts arts{MakeOutputDir(c)};
  std::string tsv = "metric\tn\tmean\tstd\n";
  std::string table;
  json results = json::object();
  for (const auto& [key, xs] : values) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double sd = xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    tsv += key + '\t' + std::to_string(xs.size()) + '\t' + Fixed(mean, 6) + '\t' + Fixed(sd, 6) +
           '\n';
    table += PadRight(key, 32) + Fixed(mean, 4) + " +- " + Fixed(sd, 4) + "  (n=" +
             std::to_string(xs.size()) + ")\n";
    results[key] = {{"n", xs.size()}, {"mean", mean}, {"std", sd}};
  }
  arts.Write("summary.tsv", tsv);
  arts.Write("summary.txt", table);
  out.report = table;
  json m;
  m["format"] = "sda-run";
  m["version"] = kRunManifestVersion;
  m["command"] = "summarize";
  m["code_version"] = SDA_VERSION;
  m["inputs"] = manifest_paths;
  m["summarized_command"] = command;
  m["artifacts"] = arts.names;
  m["results"] = results;
  const fs::path path = arts.dir / "manifest.json";
  WriteFile(path, m.dump(2) + "\n");
  out.results_json = results.dump();
  out.artifacts = arts.names;
  out.artifacts.push_back("manifest.json");
  out.manifest_path = path.string();
  return out;
}

}  // namespace sda
