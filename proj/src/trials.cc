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

#include "stf/trials.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "stf/error.h"
#include "stf/seeding.h"

namespace stf {

namespace {

constexpr uint64_t kTrialSampleStream = 11;
constexpr uint64_t kEnrollStream = 12;
constexpr uint64_t kAdaptStream = 13;

const char* const kTrialTypeNames[kNumTrialTypes] = {"TC", "TW", "IC", "IW"};

std::string ModelId(int speaker, int phrase) {
  char buf[32];
  if (phrase >= 0) {
    std::snprintf(buf, sizeof(buf), "m_s%04d_p%03d", speaker, phrase);
  } else {
    std::snprintf(buf, sizeof(buf), "m_s%04d", speaker);
  }
  return buf;
}

// Eval utterances grouped by speaker then phrase, repeats in order.
using EvalIndex = std::map<int, std::map<int, std::vector<const Utterance*>>>;

EvalIndex IndexEval(const Corpus& corpus) {
  EvalIndex index;
  for (const Utterance* u : corpus.SplitUtterances(Split::kEval)) {
    index[u->speaker_id][u->phrase_id].push_back(u);
  }
  for (auto& [spk, phrases] : index) {
    for (auto& [phrase, utts] : phrases) {
      std::sort(utts.begin(), utts.end(),
                [](const Utterance* a, const Utterance* b) {
                  return a->repeat < b->repeat;
                });
    }
  }
  return index;
}

struct Candidate {
  int model;
  const Utterance* test;
};

// Keeps all TC candidates and samples the other types without replacement
// to exact multiples of the TC count.
std::vector<Trial> SampleTrials(
    const std::vector<ModelSpec>& models,
    const std::vector<Candidate> (&candidates)[kNumTrialTypes],
    const TrialRatio& ratio, uint64_t seed) {
  const long n_tc = static_cast<long>(candidates[0].size());
  if (n_tc == 0) throw DomainError("trial generation: no TC candidates");
  std::vector<Trial> trials;
  for (int t = 0; t < kNumTrialTypes; ++t) {
    const TrialType type = static_cast<TrialType>(t);
    std::vector<Candidate> pool = candidates[t];
    const long scaled = n_tc * ratio[type];
    if (scaled % ratio.tc != 0) {
      throw ValidationError("trial generation: ratio " + TrialRatioString(ratio) +
                            " does not give an integer " + TrialTypeName(type) +
                            " count for " + std::to_string(n_tc) + " TC trials");
    }
    const long want = scaled / ratio.tc;
    if (want > static_cast<long>(pool.size())) {
      const long max_ratio = static_cast<long>(pool.size()) * ratio.tc / n_tc;
      throw DomainError("trial generation: ratio " + TrialRatioString(ratio) +
                        " needs " + std::to_string(want) + " " +
                        TrialTypeName(type) + " trials but only " +
                        std::to_string(pool.size()) +
                        " candidates exist; achievable maximum for " +
                        TrialTypeName(type) + " is " +
                        std::to_string(pool.size()) + " trials (ratio value " +
                        std::to_string(max_ratio) + ")");
    }
    std::mt19937_64 rng(DeriveSeed(seed, kTrialSampleStream, t));
    for (long i = 0; i < want; ++i) {
      std::uniform_int_distribution<long> pick(i, static_cast<long>(pool.size()) - 1);
      std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(want);
    for (const Candidate& c : pool) {
      trials.push_back({models[c.model].model_id, c.test->utt_id,
                        type == TrialType::kTC, type});
    }
  }
  std::sort(trials.begin(), trials.end(), [](const Trial& a, const Trial& b) {
    return std::tie(a.model_id, a.test_utt_id) < std::tie(b.model_id, b.test_utt_id);
  });
  return trials;
}

}  // namespace

const char* TrialTypeName(TrialType type) {
  return kTrialTypeNames[static_cast<int>(type)];
}

TrialType ParseTrialType(const std::string& name) {
  for (int t = 0; t < kNumTrialTypes; ++t) {
    if (name == kTrialTypeNames[t]) return static_cast<TrialType>(t);
  }
  throw FormatError("unknown trial type '" + name + "'");
}

const char* EnrollModeName(EnrollMode mode) {
  return mode == EnrollMode::kTextDependent ? "text_dependent" : "text_independent";
}

EnrollMode ParseEnrollMode(const std::string& name) {
  if (name == "text_dependent") return EnrollMode::kTextDependent;
  if (name == "text_independent") return EnrollMode::kTextIndependent;
  throw ValidationError("unknown enrollment mode '" + name +
                        "' (expected text_dependent or text_independent)");
}

int TrialRatio::operator[](TrialType type) const {
  switch (type) {
    case TrialType::kTC: return tc;
    case TrialType::kTW: return tw;
    case TrialType::kIC: return ic;
    case TrialType::kIW: return iw;
  }
  return 0;
}

void TrialRatio::Validate() const {
  if (tc <= 0 || tw < 0 || ic < 0 || iw < 0) {
    throw ValidationError("trial ratio " + TrialRatioString(*this) +
                          ": TC must be positive and the rest non-negative");
  }
}

TrialRatio ParseTrialRatio(const std::string& text) {
  TrialRatio r;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%d:%d:%d:%d%c", &r.tc, &r.tw, &r.ic, &r.iw,
                  &tail) != 4) {
    throw ValidationError("trial ratio '" + text + "' is not of the form TC:TW:IC:IW");
  }
  r.Validate();
  return r;
}

std::string TrialRatioString(const TrialRatio& r) {
  return std::to_string(r.tc) + ":" + std::to_string(r.tw) + ":" +
         std::to_string(r.ic) + ":" + std::to_string(r.iw);
}

TrialList GenerateTrialsCondition1(const Corpus& corpus,
                                   const TrialRatio& ratio, uint64_t seed) {
  ratio.Validate();
  const EvalIndex index = IndexEval(corpus);
  std::set<int> phrase_set;
  for (const auto& [spk, phrases] : index) {
    for (const auto& [phrase, utts] : phrases) phrase_set.insert(phrase);
  }
  if (index.size() < 2 || phrase_set.size() < 2) {
    throw DomainError("condition 1 needs at least 2 eval speakers and 2 eval phrases; have " +
                      std::to_string(index.size()) + " and " +
                      std::to_string(phrase_set.size()));
  }
  const int enroll = corpus.config.enroll_repeats;

  TrialList list;
  // Test utterances of each (speaker, phrase), shared by all models.
  std::vector<std::tuple<int, int, const Utterance*>> tests;
  std::map<std::pair<int, int>, int> model_of;
  for (const auto& [spk, phrases] : index) {
    for (const auto& [phrase, utts] : phrases) {
      if (static_cast<int>(utts.size()) <= enroll) {
        throw DomainError("eval speaker " + std::to_string(spk) + " phrase " +
                          std::to_string(phrase) + " has " +
                          std::to_string(utts.size()) +
                          " repeats; need more than " + std::to_string(enroll));
      }
      ModelSpec model{ModelId(spk, phrase), spk, {}};
      for (int r = 0; r < enroll; ++r) model.utt_ids.push_back(utts[r]->utt_id);
      model_of[{spk, phrase}] = static_cast<int>(list.models.size());
      list.models.push_back(std::move(model));
      for (size_t r = enroll; r < utts.size(); ++r) tests.emplace_back(spk, phrase, utts[r]);
    }
  }

  std::vector<Candidate> candidates[kNumTrialTypes];
  for (const auto& [key, m] : model_of) {
    for (const auto& [spk, phrase, utt] : tests) {
      const bool same_spk = spk == key.first;
      const bool same_text = phrase == key.second;
      const int type = same_spk ? (same_text ? 0 : 1) : (same_text ? 2 : 3);
      candidates[type].push_back({m, utt});
    }
  }
  list.trials = SampleTrials(list.models, candidates, ratio, seed);
  return list;
}

TrialList GenerateTrialsCondition2(const Corpus& corpus, int target_phrase,
                                   EnrollMode mode, uint64_t seed,
                                   const TrialRatio& ratio) {
  ratio.Validate();
  const EvalIndex index = IndexEval(corpus);
  std::set<int> phrase_set;
  for (const auto& [spk, phrases] : index) {
    for (const auto& [phrase, utts] : phrases) phrase_set.insert(phrase);
  }
  if (!phrase_set.count(target_phrase)) {
    throw ValidationError("target phrase " + std::to_string(target_phrase) +
                          " is not an eval phrase");
  }
  if (index.size() < 2) {
    throw DomainError("condition 2 needs at least 2 eval speakers");
  }
  std::vector<int> other_phrases;
  for (int p : phrase_set) {
    if (p != target_phrase) other_phrases.push_back(p);
  }
  const int enroll = corpus.config.enroll_repeats;
  const size_t enroll_phrases_needed = mode == EnrollMode::kTextIndependent ? enroll : 1;
  // At least one wrong-text phrase must remain after removing the enrollment texts.
  if (other_phrases.size() < enroll_phrases_needed + 1) {
    throw DomainError("condition 2 (" + std::string(EnrollModeName(mode)) +
                      ") needs at least " + std::to_string(enroll_phrases_needed + 2) +
                      " eval phrases; have " + std::to_string(phrase_set.size()));
  }

  std::vector<const Utterance*> adapt_pool;
  for (const Utterance* u : corpus.SplitUtterances(Split::kDev)) {
    if (u->phrase_id == target_phrase) adapt_pool.push_back(u);
  }
  if (adapt_pool.size() < static_cast<size_t>(kNumAdaptationUtterances)) {
    throw DomainError("dev split has " + std::to_string(adapt_pool.size()) +
                      " utterances of phrase " + std::to_string(target_phrase) +
                      "; adaptation needs " +
                      std::to_string(kNumAdaptationUtterances));
  }

  TrialList list;
  std::vector<std::set<int>> excluded;  // per model: enrollment phrases
  std::mt19937_64 rng(DeriveSeed(seed, kEnrollStream, target_phrase));
  for (const auto& [spk, phrases] : index) {
    ModelSpec model{ModelId(spk, -1), spk, {}};
    std::vector<int> shuffled = other_phrases;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    std::set<int> chosen;
    if (mode == EnrollMode::kTextDependent) {
      const int q = shuffled[0];
      const auto it = phrases.find(q);
      if (it == phrases.end() || static_cast<int>(it->second.size()) < enroll) {
        throw DomainError("eval speaker " + std::to_string(spk) +
                          " lacks enrollment repeats of phrase " + std::to_string(q));
      }
      for (int r = 0; r < enroll; ++r) model.utt_ids.push_back(it->second[r]->utt_id);
      chosen.insert(q);
    } else {
      for (int k = 0; k < enroll; ++k) {
        const int q = shuffled[k];
        const auto it = phrases.find(q);
        if (it == phrases.end() || it->second.empty()) {
          throw DomainError("eval speaker " + std::to_string(spk) +
                            " has no utterance of phrase " + std::to_string(q));
        }
        const int n = std::min<int>(enroll, static_cast<int>(it->second.size()));
        std::uniform_int_distribution<int> pick(0, n - 1);
        model.utt_ids.push_back(it->second[pick(rng)]->utt_id);
        chosen.insert(q);
      }
    }
    excluded.push_back(std::move(chosen));
    list.models.push_back(std::move(model));
  }

  std::vector<Candidate> candidates[kNumTrialTypes];
  for (size_t m = 0; m < list.models.size(); ++m) {
    for (const auto& [spk, phrases] : index) {
      for (const auto& [phrase, utts] : phrases) {
        if (excluded[m].count(phrase)) continue;
        const bool same_spk = spk == list.models[m].speaker_id;
        const bool same_text = phrase == target_phrase;
        const int type = same_spk ? (same_text ? 0 : 1) : (same_text ? 2 : 3);
        for (size_t r = enroll; r < utts.size(); ++r) {
          candidates[type].push_back({static_cast<int>(m), utts[r]});
        }
      }
    }
  }
  list.trials = SampleTrials(list.models, candidates, ratio, seed + target_phrase);

  std::mt19937_64 adapt_rng(DeriveSeed(seed, kAdaptStream, target_phrase));
  std::shuffle(adapt_pool.begin(), adapt_pool.end(), adapt_rng);
  for (int i = 0; i < kNumAdaptationUtterances; ++i) {
    list.adaptation_utt_ids.push_back(adapt_pool[i]->utt_id);
  }
  std::sort(list.adaptation_utt_ids.begin(), list.adaptation_utt_ids.end());
  return list;
}

void RelabelTextIndependent(TrialList* list) {
  for (Trial& t : list->trials) {
    if (t.type == TrialType::kTW) t.target = true;
  }
}

std::string FormatTrials(const std::vector<Trial>& trials) {
  std::string out;
  for (const Trial& t : trials) {
    out += t.model_id + ' ' + t.test_utt_id + ' ' +
           (t.target ? "target " : "nontarget ") + TrialTypeName(t.type) + '\n';
  }
  return out;
}

std::vector<Trial> ParseTrials(const std::string& text, const std::string& name) {
  std::vector<Trial> trials;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string model, test, label, type, extra;
    const std::string where = name + ":" + std::to_string(line_no);
    if (!(fields >> model >> test >> label >> type) || (fields >> extra)) {
      throw FormatError(where + ": expected 4 fields 'model_id test_utt_id label type'");
    }
    if (label != "target" && label != "nontarget") {
      throw FormatError(where + ": field 'label' must be target or nontarget, got '" +
                        label + "'");
    }
    TrialType parsed;
    try {
      parsed = ParseTrialType(type);
    } catch (const FormatError&) {
      throw FormatError(where + ": field 'type' must be TC, TW, IC or IW, got '" +
                        type + "'");
    }
    trials.push_back({model, test, label == "target", parsed});
  }
  return trials;
}

std::string FormatModels(const std::vector<ModelSpec>& models) {
  std::string out;
  for (const ModelSpec& m : models) {
    out += m.model_id + ' ' + std::to_string(m.speaker_id);
    for (const auto& id : m.utt_ids) out += ' ' + id;
    out += '\n';
  }
  return out;
}

std::vector<ModelSpec> ParseModels(const std::string& text, const std::string& name) {
  std::vector<ModelSpec> models;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    ModelSpec m;
    std::string speaker;
    const std::string where = name + ":" + std::to_string(line_no);
    if (!(fields >> m.model_id >> speaker)) {
      throw FormatError(where + ": expected 'model_id speaker_id utt_id...'");
    }
    try {
      size_t used = 0;
      m.speaker_id = std::stoi(speaker, &used);
      if (used != speaker.size()) throw std::invalid_argument(speaker);
    } catch (const std::exception&) {
      throw FormatError(where + ": field 'speaker_id' is not an integer: '" + speaker + "'");
    }
    std::string id;
    while (fields >> id) m.utt_ids.push_back(id);
    if (m.utt_ids.empty()) {
      throw FormatError(where + ": model '" + m.model_id + "' has no enrollment utterances");
    }
    models.push_back(std::move(m));
  }
  return models;
}

std::string FormatIdList(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) out += id + '\n';
  return out;
}

std::vector<std::string> ParseIdList(const std::string& text) {
  std::vector<std::string> ids;
  std::istringstream in(text);
  std::string id;
  while (in >> id) ids.push_back(id);
  return ids;
}

}  // namespace stf
