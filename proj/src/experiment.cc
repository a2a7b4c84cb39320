// Copyright (c) 2026 The stfnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "stf/experiment.h"

#include <cstdio>
#include <filesystem>
#include <ostream>

#include "stf/binary_io.h"
#include "stf/checkpoint.h"
#include "stf/error.h"

namespace stf {

namespace fs = std::filesystem;

namespace {

constexpr const char* kTrialsFile = "trials.txt";
constexpr const char* kModelsFile = "models.txt";
constexpr const char* kAdaptFile = "adapt.txt";
constexpr const char* kInfoFile = "info.json";

void RejectUnknownKeys(const nlohmann::json& given, const nlohmann::json& known,
                       const std::string& where) {
  if (!given.is_object()) throw FormatError(where + ": expected a JSON object");
  for (const auto& [key, value] : given.items()) {
    if (!known.contains(key)) {
      throw FormatError(where + ": unknown field '" + key + "'");
    }
  }
}

nlohmann::json MetricJson(const MetricConfig& m) {
  return {{"p_tar", m.p_tar}, {"c_miss", m.c_miss}, {"c_fa", m.c_fa}};
}

std::string Join(const fs::path& dir, const char* file) {
  return (dir / file).string();
}

// Writes files into <dir>.partial and renames it into place.
void WriteDirectory(const std::string& dir,
                    const std::vector<std::pair<std::string, std::string>>& files) {
  const fs::path target(dir);
  fs::path tmp = target;
  tmp += ".partial";
  fs::remove_all(tmp);
  fs::create_directories(tmp);
  for (const auto& [name, bytes] : files) binary::WriteFile((tmp / name).string(), bytes);
  fs::remove_all(target);
  fs::rename(tmp, target);
}

void RequireOutput(const std::string& path, const char* flag) {
  if (path.empty()) throw ValidationError(std::string("missing output path (") + flag + ")");
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw ValidationError("output directory " + parent.string() + " does not exist");
  }
}

std::string PercentCell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%8.3f", 100.0 * v);
  return buf;
}

}  // namespace

void ExperimentConfig::PropagateSeed() {
  corpus.seed = seed;
  training.seed = seed;
}

void ExperimentConfig::Validate() const {
  corpus.Validate();
  // Training fills the data-dependent sizes from the corpus.
  NetworkConfig net = network;
  net.feature_dim = corpus.feature_dim;
  net.num_phonemes = corpus.num_phonemes;
  net.num_speakers = corpus.n_speakers;
  net.Validate();
  training.Validate();
  metric.Validate();
  ratio.Validate();
  if (modes.empty()) throw ValidationError("experiment config: modes must not be empty");
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json modes = nlohmann::json::array();
  for (ScoringMode m : c.modes) modes.push_back(ScoringModeName(m));
  j = {{"corpus", c.corpus},   {"network", c.network},
       {"training", c.training}, {"metric", MetricJson(c.metric)},
       {"ratio", TrialRatioString(c.ratio)}, {"modes", modes},
       {"out_dir", c.out_dir}, {"seed", c.seed}};
}

ExperimentConfig ParseExperimentConfig(const nlohmann::json& j,
                                       const std::string& name) {
  ExperimentConfig c;
  const nlohmann::json defaults = c;
  RejectUnknownKeys(j, defaults, name);
  try {
    for (const char* section : {"corpus", "network", "training", "metric"}) {
      if (j.contains(section)) {
        RejectUnknownKeys(j[section], defaults[section], name + ": " + section);
      }
    }
    if (j.contains("corpus")) c.corpus = j["corpus"].get<CorpusConfig>();
    if (j.contains("network")) c.network = j["network"].get<NetworkConfig>();
    if (j.contains("training")) c.training = j["training"].get<TrainingConfig>();
    if (j.contains("metric")) {
      const auto& m = j["metric"];
      c.metric.p_tar = m.value("p_tar", c.metric.p_tar);
      c.metric.c_miss = m.value("c_miss", c.metric.c_miss);
      c.metric.c_fa = m.value("c_fa", c.metric.c_fa);
    }
    if (j.contains("ratio")) c.ratio = ParseTrialRatio(j["ratio"].get<std::string>());
    if (j.contains("modes")) {
      c.modes.clear();
      for (const auto& m : j["modes"]) c.modes.push_back(ParseScoringMode(m.get<std::string>()));
    }
    c.out_dir = j.value("out_dir", c.out_dir);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(name + ": " + e.what());
  }
  c.PropagateSeed();
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  if (path.empty()) {
    ExperimentConfig c;
    c.PropagateSeed();
    return c;
  }
  const std::string text = binary::ReadFile(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path + ": " + e.what());
  }
  return ParseExperimentConfig(j, path);
}

void CmdGenCorpus(const ExperimentConfig& config, const std::string& out_dir) {
  RequireOutput(out_dir, "--out");
  config.corpus.Validate();
  WriteCorpus(GenerateCorpus(config.corpus), out_dir);
}

ModelKind ParseModelKind(const std::string& name) {
  if (name == "factorization") return ModelKind::kFactorization;
  if (name == "baseline") return ModelKind::kBaseline;
  throw ValidationError("unknown model '" + name + "' (expected factorization or baseline)");
}

void CmdTrain(const ExperimentConfig& config, const TrainOptions& options,
              std::ostream* progress) {
  RequireOutput(options.checkpoint, "--out");
  config.training.Validate();
  const Corpus corpus = ReadCorpus(options.corpus_dir);
  std::string log;
  auto on_epoch = [&](const EpochLog& e) {
    const std::string line = EpochLogJson(e).dump();
    log += line + '\n';
    if (progress != nullptr) *progress << line << std::endl;
  };
  AnyNet net;
  if (options.model == ModelKind::kFactorization) {
    net = FitFactorization(corpus, config.network, config.training, on_epoch).net;
  } else {
    net = FitBaseline(corpus, config.network, config.training, on_epoch).net;
  }
  SaveCheckpoint(options.checkpoint, net);
  binary::WriteFile(options.log_path.empty() ? options.checkpoint + ".log.jsonl"
                                             : options.log_path,
                    log);
}

void CmdTrials(const ExperimentConfig& config, const TrialsOptions& options) {
  RequireOutput(options.out_dir, "--out");
  const Corpus corpus = ReadCorpus(options.corpus_dir);
  TrialList list;
  nlohmann::json info = {{"condition", options.condition}, {"seed", config.seed}};
  if (options.condition == 1) {
    list = GenerateTrialsCondition1(corpus, config.ratio, config.seed);
    info["ratio"] = TrialRatioString(config.ratio);
  } else if (options.condition == 2) {
    if (options.target_phrase < 0) {
      throw ValidationError("condition 2 needs --target-phrase");
    }
    const TrialRatio ratio{1, 1, 1, 1};
    list = GenerateTrialsCondition2(corpus, options.target_phrase,
                                    options.enroll_mode, config.seed, ratio);
    info["ratio"] = TrialRatioString(ratio);
    info["target_phrase"] = options.target_phrase;
    info["enroll_mode"] = EnrollModeName(options.enroll_mode);
  } else {
    throw ValidationError("condition must be 1 or 2, got " +
                          std::to_string(options.condition));
  }
  if (options.text_independent) RelabelTextIndependent(&list);
  info["text_independent"] = options.text_independent;

  std::vector<std::pair<std::string, std::string>> files = {
      {kTrialsFile, FormatTrials(list.trials)},
      {kModelsFile, FormatModels(list.models)},
      {kInfoFile, info.dump(2) + "\n"}};
  if (!list.adaptation_utt_ids.empty()) {
    files.emplace_back(kAdaptFile, FormatIdList(list.adaptation_utt_ids));
  }
  WriteDirectory(options.out_dir, files);
}

void CmdScore(const ExperimentConfig& config, const ScoreOptions& options) {
  (void)config;
  RequireOutput(options.out, "--out");
  const fs::path dir(options.trials_dir);
  const std::string trials_path = Join(dir, kTrialsFile);
  const std::string models_path = Join(dir, kModelsFile);
  const auto trials = ParseTrials(binary::ReadFile(trials_path), trials_path);
  const auto models = ParseModels(binary::ReadFile(models_path), models_path);
  std::vector<std::string> adapt_ids;
  if (options.mode == ScoringMode::kSpkAdaptText) {
    const std::string adapt_path = Join(dir, kAdaptFile);
    if (!fs::exists(adapt_path)) {
      throw ValidationError("spk_adapt_text scoring needs " + adapt_path +
                            " (condition 2 trials)");
    }
    adapt_ids = ParseIdList(binary::ReadFile(adapt_path));
  }
  const AnyNet net = LoadCheckpoint(options.checkpoint);
  const Corpus corpus = ReadCorpus(options.corpus_dir);
  const int net_dim = std::visit([](const auto& n) { return n.config.feature_dim; }, net);
  if (net_dim != corpus.config.feature_dim) {
    throw ValidationError(options.checkpoint + ": network expects feature_dim " +
                          std::to_string(net_dim) + " but corpus has " +
                          std::to_string(corpus.config.feature_dim));
  }
  const auto scores = ScoreTrials(net, corpus, models, trials, options.mode, adapt_ids);
  binary::WriteFile(options.out, FormatScores(trials, scores));
}

nlohmann::json CmdReport(const ExperimentConfig& config,
                         const std::vector<ReportSystem>& systems,
                         const std::string& out, std::ostream* table) {
  RequireOutput(out, "--out");
  if (systems.empty()) throw ValidationError("report needs at least one score file");
  std::vector<nlohmann::json> rows;
  for (const ReportSystem& s : systems) {
    const std::string trials_path = Join(fs::path(s.trials_dir), kTrialsFile);
    const auto trials = ParseTrials(binary::ReadFile(trials_path), trials_path);
    const auto lines = ParseScores(binary::ReadFile(s.scores), s.scores);
    ScoreReport report =
        BuildReport(trials, AlignScores(trials, lines, s.scores), config.metric);
    nlohmann::json j = {{"name", s.name}};
    j.update(ReportToJson(report));
    rows.push_back(std::move(j));
  }

  nlohmann::json result;
  if (rows.size() == 1) {
    result = rows[0];
  } else {
    double eer = 0.0, dcf = 0.0;
    for (const auto& r : rows) {
      eer += r["eer"].get<double>();
      dcf += r["min_dcf"].get<double>();
    }
    result = {{"systems", rows},
              {"mean", {{"eer", eer / rows.size()}, {"min_dcf", dcf / rows.size()}}}};
  }
  binary::WriteFile(out, result.dump(2) + "\n");

  if (table != nullptr) {
    size_t width = 6;
    for (const auto& r : rows) width = std::max(width, r["name"].get<std::string>().size());
    auto pad = [&](const std::string& s) { return s + std::string(width - s.size(), ' '); };
    *table << pad("system") << "   EER(%)   minDCF    TW(%)    IC(%)    IW(%)\n";
    for (const auto& r : rows) {
      char dcf[32];
      std::snprintf(dcf, sizeof(dcf), "%9.4f", r["min_dcf"].get<double>());
      *table << pad(r["name"].get<std::string>()) << ' ' << PercentCell(r["eer"].get<double>())
             << dcf;
      for (const char* type : {"TW", "IC", "IW"}) {
        const auto& b = r["breakdown"];
        *table << ' ' << (b.contains(type) ? PercentCell(b[type].get<double>()) : "       -");
      }
      *table << '\n';
    }
    if (rows.size() > 1) {
      char dcf[32];
      std::snprintf(dcf, sizeof(dcf), "%9.4f", result["mean"]["min_dcf"].get<double>());
      *table << pad("mean") << ' ' << PercentCell(result["mean"]["eer"].get<double>()) << dcf
             << '\n';
    }
  }
  return result;
}

}  // namespace stf
