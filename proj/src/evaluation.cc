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

#include "stf/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "stf/error.h"

namespace stf {

namespace {

// Runs f(i) for i in [0, n) in parallel. If any call throws, the exception
// of the lowest failing index is rethrown so errors do not depend on
// scheduling.
template <typename F>
void ParallelFor(long n, F&& f) {
  std::exception_ptr error;
  long error_index = std::numeric_limits<long>::max();
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(stf_parallel_error)
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

const FactorizationNet<float>& RequireFactorization(const AnyNet& net,
                                                    const char* what) {
  const auto* f = std::get_if<FactorizationNet<float>>(&net);
  if (f == nullptr) {
    throw ValidationError(std::string(what) +
                          " needs a factorization network; the checkpoint holds a baseline");
  }
  return *f;
}

SpeakerOutput ForwardSpeakerAny(const AnyNet& net, const Matrix<float>& features) {
  return std::visit([&](const auto& n) { return ForwardSpeaker(n, features); }, net);
}

struct UttParts {
  Embedding spk;
  Embedding text;       // empty values for kSpk
  Embedding combined;   // genuine combination, empty values for kSpk
};

UttParts ComputeParts(const AnyNet& net, const Utterance& utt, bool need_text) {
  UttParts parts;
  parts.spk = ForwardSpeakerAny(net, utt.features).embedding;
  if (need_text) {
    const auto& f = RequireFactorization(net, "text embedding extraction");
    parts.text = ForwardText(f, utt.features).embedding;
    parts.combined = ForwardCombined(f, parts.spk, parts.text).combined;
  }
  return parts;
}

Embedding EnrollSide(const AnyNet& net, const UttParts& parts, ScoringMode mode,
                     const std::optional<Embedding>& adaptation) {
  switch (mode) {
    case ScoringMode::kSpk:
      return parts.spk;
    case ScoringMode::kSpkText:
      return parts.combined;
    case ScoringMode::kSpkAdaptText:
      return ForwardCombined(RequireFactorization(net, "adapted scoring"),
                             parts.spk, *adaptation)
          .combined;
  }
  return parts.spk;
}

const Embedding& TestSide(const UttParts& parts, ScoringMode mode) {
  return mode == ScoringMode::kSpk ? parts.spk : parts.combined;
}

void CheckAdaptation(ScoringMode mode, const std::optional<Embedding>& adaptation) {
  if (mode != ScoringMode::kSpkAdaptText) return;
  if (!adaptation.has_value()) {
    throw ValidationError("spk_adapt_text scoring needs an adaptation text embedding");
  }
  if (adaptation->kind != EmbeddingKind::kText) {
    throw ValidationError("adaptation embedding must be of kind text, got " +
                          EmbeddingKindName(adaptation->kind));
  }
}

}  // namespace

const char* ScoringModeName(ScoringMode mode) {
  switch (mode) {
    case ScoringMode::kSpk: return "spk";
    case ScoringMode::kSpkText: return "spk_text";
    case ScoringMode::kSpkAdaptText: return "spk_adapt_text";
  }
  return "spk";
}

ScoringMode ParseScoringMode(const std::string& name) {
  if (name == "spk") return ScoringMode::kSpk;
  if (name == "spk_text") return ScoringMode::kSpkText;
  if (name == "spk_adapt_text") return ScoringMode::kSpkAdaptText;
  throw ValidationError("unknown scoring mode '" + name +
                        "' (expected spk, spk_text or spk_adapt_text)");
}

const char* AdaptationSourceName(AdaptationSource source) {
  switch (source) {
    case AdaptationSource::kNone: return "none";
    case AdaptationSource::kGenuine: return "genuine";
    case AdaptationSource::kAdapted: return "adapted";
  }
  return "none";
}

Embedding ExtractEmbedding(const AnyNet& net, const Utterance& utt,
                           ExtractMode mode) {
  const UttParts parts = ComputeParts(net, utt, mode == ExtractMode::kSpkText);
  return mode == ExtractMode::kSpk ? parts.spk : parts.combined;
}

std::vector<Embedding> ExtractEmbeddings(
    const AnyNet& net, std::span<const Utterance* const> utts, ExtractMode mode) {
  std::vector<Embedding> out(utts.size());
  ParallelFor(static_cast<long>(utts.size()),
              [&](long i) { out[i] = ExtractEmbedding(net, *utts[i], mode); });
  return out;
}

Embedding ExtractTextEmbedding(const FactorizationNet<float>& net,
                               const Utterance& utt) {
  return ForwardText(net, utt.features).embedding;
}

Embedding AdaptationTextEmbedding(const FactorizationNet<float>& net,
                                  std::span<const Utterance* const> utts) {
  if (utts.empty()) throw DomainError("adaptation needs at least one utterance");
  for (const Utterance* u : utts) {
    if (u->phrase_id != utts[0]->phrase_id) {
      throw ValidationError("adaptation utterances mix phrases " +
                            std::to_string(utts[0]->phrase_id) + " (" +
                            utts[0]->utt_id + ") and " +
                            std::to_string(u->phrase_id) + " (" + u->utt_id + ")");
    }
  }
  std::vector<Embedding> texts(utts.size());
  ParallelFor(static_cast<long>(utts.size()),
              [&](long i) { texts[i] = ExtractTextEmbedding(net, *utts[i]); });
  Embedding mean{EmbeddingKind::kText,
                 std::vector<double>(texts[0].values.size(), 0.0)};
  for (const Embedding& t : texts) {
    for (size_t k = 0; k < t.values.size(); ++k) mean.values[k] += t.values[k];
  }
  for (double& v : mean.values) v /= static_cast<double>(texts.size());
  return mean;
}

Embedding MeanNormalized(std::span<const Embedding> embeddings) {
  if (embeddings.empty()) throw DomainError("cannot average zero embeddings");
  Embedding mean{embeddings[0].kind,
                 std::vector<double>(embeddings[0].values.size(), 0.0)};
  for (const Embedding& e : embeddings) {
    if (e.values.size() != mean.values.size() || e.kind != mean.kind) {
      throw ShapeError("embeddings to average differ in kind or length");
    }
    for (size_t k = 0; k < e.values.size(); ++k) mean.values[k] += e.values[k];
  }
  double norm = 0.0;
  for (double& v : mean.values) {
    v /= static_cast<double>(embeddings.size());
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DomainError("mean embedding has zero or non-finite norm");
  }
  for (double& v : mean.values) v /= norm;
  return mean;
}

EnrollmentModel Enroll(const AnyNet& net, const ModelSpec& spec,
                       std::span<const Utterance* const> utts, ScoringMode mode,
                       const std::optional<Embedding>& adaptation) {
  if (utts.empty()) {
    throw DomainError("model '" + spec.model_id + "' has no enrollment utterances");
  }
  CheckAdaptation(mode, adaptation);
  std::vector<Embedding> per_utt;
  for (const Utterance* u : utts) {
    const UttParts parts = ComputeParts(net, *u, mode != ScoringMode::kSpk);
    per_utt.push_back(EnrollSide(net, parts, mode, adaptation));
  }
  EnrollmentModel model;
  model.model_id = spec.model_id;
  model.speaker_id = spec.speaker_id;
  for (const Utterance* u : utts) model.utt_ids.push_back(u->utt_id);
  model.embedding = MeanNormalized(per_utt);
  std::vector<int> phrases;
  for (const Utterance* u : utts) phrases.push_back(u->phrase_id);
  const bool one_text = std::all_of(phrases.begin(), phrases.end(),
                                    [&](int p) { return p == phrases[0]; });
  model.enrollment_mode =
      one_text ? EnrollMode::kTextDependent : EnrollMode::kTextIndependent;
  model.adaptation_source = mode == ScoringMode::kSpk       ? AdaptationSource::kNone
                            : mode == ScoringMode::kSpkText ? AdaptationSource::kGenuine
                                                            : AdaptationSource::kAdapted;
  return model;
}

double CosineScore(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) {
    throw ShapeError("cosine of embeddings with lengths " +
                     std::to_string(a.values.size()) + " and " +
                     std::to_string(b.values.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t k = 0; k < a.values.size(); ++k) {
    dot += a.values[k] * b.values[k];
    na += a.values[k] * a.values[k];
    nb += b.values[k] * b.values[k];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine score of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<double> ScoreTrials(const AnyNet& net, const Corpus& corpus,
                                const std::vector<ModelSpec>& models,
                                const std::vector<Trial>& trials,
                                ScoringMode mode,
                                const std::vector<std::string>& adaptation_utt_ids) {
  std::optional<Embedding> adaptation;
  if (mode == ScoringMode::kSpkAdaptText) {
    const auto& f = RequireFactorization(net, "spk_adapt_text scoring");
    if (adaptation_utt_ids.empty()) {
      throw ValidationError("spk_adapt_text scoring needs adaptation utterance ids");
    }
    std::vector<const Utterance*> adapt_utts;
    for (const auto& id : adaptation_utt_ids) adapt_utts.push_back(&corpus.Find(id));
    adaptation = AdaptationTextEmbedding(f, adapt_utts);
  } else if (mode == ScoringMode::kSpkText) {
    RequireFactorization(net, "spk_text scoring");
  }

  // Resolve everything up front so unknown ids fail before any extraction.
  std::unordered_map<std::string, int> model_index;
  for (size_t m = 0; m < models.size(); ++m) {
    if (!model_index.emplace(models[m].model_id, static_cast<int>(m)).second) {
      throw ValidationError("duplicate model id '" + models[m].model_id + "'");
    }
  }
  std::unordered_map<std::string, int> utt_index;
  std::vector<const Utterance*> utts;
  auto add_utt = [&](const std::string& id) {
    auto [it, inserted] = utt_index.emplace(id, static_cast<int>(utts.size()));
    if (inserted) utts.push_back(&corpus.Find(id));
    return it->second;
  };
  std::vector<std::vector<int>> model_utts(models.size());
  for (size_t m = 0; m < models.size(); ++m) {
    if (models[m].utt_ids.empty()) {
      throw DomainError("model '" + models[m].model_id + "' has no enrollment utterances");
    }
    for (const auto& id : models[m].utt_ids) model_utts[m].push_back(add_utt(id));
  }
  std::vector<std::pair<int, int>> pairs;
  for (const Trial& t : trials) {
    auto it = model_index.find(t.model_id);
    if (it == model_index.end()) {
      throw ValidationError("trial references unknown model '" + t.model_id + "'");
    }
    pairs.emplace_back(it->second, add_utt(t.test_utt_id));
  }

  const bool need_text = mode != ScoringMode::kSpk;
  std::vector<UttParts> parts(utts.size());
  ParallelFor(static_cast<long>(utts.size()),
              [&](long i) { parts[i] = ComputeParts(net, *utts[i], need_text); });

  std::vector<Embedding> model_embeddings(models.size());
  ParallelFor(static_cast<long>(models.size()), [&](long m) {
    std::vector<Embedding> per_utt;
    for (int u : model_utts[m]) per_utt.push_back(EnrollSide(net, parts[u], mode, adaptation));
    model_embeddings[m] = MeanNormalized(per_utt);
  });

  std::vector<double> scores(trials.size());
  ParallelFor(static_cast<long>(trials.size()), [&](long i) {
    scores[i] = CosineScore(model_embeddings[pairs[i].first],
                            TestSide(parts[pairs[i].second], mode));
  });
  return scores;
}

std::map<TrialType, double> BreakdownByCondition(
    const std::vector<Trial>& trials, std::span<const double> scores,
    std::vector<std::string>* notes) {
  if (trials.size() != scores.size()) {
    throw ShapeError("breakdown: " + std::to_string(trials.size()) + " trials but " +
                     std::to_string(scores.size()) + " scores");
  }
  std::vector<ScoredTrial> tc;
  for (size_t i = 0; i < trials.size(); ++i) {
    if (trials[i].type == TrialType::kTC) tc.push_back({scores[i], true});
  }
  if (tc.empty()) throw DomainError("breakdown needs TC trials");
  std::map<TrialType, double> out;
  for (TrialType type : {TrialType::kTW, TrialType::kIC, TrialType::kIW}) {
    std::vector<ScoredTrial> subset = tc;
    for (size_t i = 0; i < trials.size(); ++i) {
      if (trials[i].type == type) subset.push_back({scores[i], false});
    }
    if (subset.size() == tc.size()) {
      if (notes != nullptr) {
        notes->push_back(std::string("no ") + TrialTypeName(type) +
                         " trials; breakdown omitted");
      }
      continue;
    }
    out[type] = ComputeEer(subset).eer;
  }
  return out;
}

ScoreReport BuildReport(const std::vector<Trial>& trials,
                        std::vector<double> scores, const MetricConfig& config) {
  if (trials.size() != scores.size()) {
    throw ShapeError("report: " + std::to_string(trials.size()) + " trials but " +
                     std::to_string(scores.size()) + " scores");
  }
  ScoreReport report;
  std::vector<ScoredTrial> all;
  for (size_t i = 0; i < trials.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw NumericError("non-finite score for trial " + trials[i].model_id + " " +
                         trials[i].test_utt_id);
    }
    all.push_back({scores[i], trials[i].target});
    report.n_trials[trials[i].type] += 1;
  }
  report.eer = ComputeEer(all);
  report.min_dcf = ComputeMinDcf(all, config);
  report.breakdown = BreakdownByCondition(trials, scores, &report.notes);
  report.scores = std::move(scores);
  return report;
}

nlohmann::json ReportToJson(const ScoreReport& report) {
  nlohmann::json j;
  j["eer"] = report.eer.eer;
  j["eer_threshold"] = report.eer.threshold;
  j["min_dcf"] = report.min_dcf.min_dcf;
  // +inf (reject everything) is not representable in JSON.
  if (std::isfinite(report.min_dcf.threshold)) {
    j["min_dcf_threshold"] = report.min_dcf.threshold;
  } else {
    j["min_dcf_threshold"] = nullptr;
  }
  j["breakdown"] = nlohmann::json::object();
  for (const auto& [type, eer] : report.breakdown) j["breakdown"][TrialTypeName(type)] = eer;
  j["n_trials"] = nlohmann::json::object();
  for (int t = 0; t < kNumTrialTypes; ++t) {
    const auto type = static_cast<TrialType>(t);
    auto it = report.n_trials.find(type);
    j["n_trials"][TrialTypeName(type)] = it == report.n_trials.end() ? 0 : it->second;
  }
  if (!report.notes.empty()) j["notes"] = report.notes;
  return j;
}

std::string FormatScores(const std::vector<Trial>& trials,
                         std::span<const double> scores) {
  if (trials.size() != scores.size()) {
    throw ShapeError("score file: " + std::to_string(trials.size()) + " trials but " +
                     std::to_string(scores.size()) + " scores");
  }
  std::string out;
  char buf[64];
  for (size_t i = 0; i < trials.size(); ++i) {
    std::snprintf(buf, sizeof(buf), " %.17g\n", scores[i]);
    out += trials[i].model_id + ' ' + trials[i].test_utt_id + buf;
  }
  return out;
}

std::vector<ScoreLine> ParseScores(const std::string& text, const std::string& name) {
  std::vector<ScoreLine> lines;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ScoreLine s;
    std::string score, extra;
    const std::string where = name + ":" + std::to_string(line_no);
    if (!(fields >> s.model_id >> s.test_utt_id >> score) || (fields >> extra)) {
      throw FormatError(where + ": expected 3 fields 'model_id test_utt_id score'");
    }
    try {
      size_t used = 0;
      s.score = std::stod(score, &used);
      if (used != score.size()) throw std::invalid_argument(score);
    } catch (const std::exception&) {
      throw FormatError(where + ": field 'score' is not a number: '" + score + "'");
    }
    if (!std::isfinite(s.score)) {
      throw FormatError(where + ": field 'score' is not finite");
    }
    lines.push_back(std::move(s));
  }
  return lines;
}

std::vector<double> AlignScores(const std::vector<Trial>& trials,
                                const std::vector<ScoreLine>& lines,
                                const std::string& name) {
  std::unordered_map<std::string, double> by_key;
  for (const ScoreLine& s : lines) {
    if (!by_key.emplace(s.model_id + '\n' + s.test_utt_id, s.score).second) {
      throw ValidationError(name + ": duplicate score for '" + s.model_id + " " +
                            s.test_utt_id + "'");
    }
  }
  std::vector<double> scores;
  for (const Trial& t : trials) {
    auto it = by_key.find(t.model_id + '\n' + t.test_utt_id);
    if (it == by_key.end()) {
      throw ValidationError(name + ": no score for trial '" + t.model_id + " " +
                            t.test_utt_id + "'");
    }
    scores.push_back(it->second);
  }
  return scores;
}

}  // namespace stf
