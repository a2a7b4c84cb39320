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

#include <cmath>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "doctest.h"
#include "stf/error.h"
#include "stf/evaluation.h"
#include "stf/trials.h"
#include "test_util.h"

namespace stf {
namespace {

using testing::TinyCorpusConfig;
using testing::TinyNetworkConfig;
using enum TrialType;

CorpusConfig TwoByTwoConfig() {
  CorpusConfig c = TinyCorpusConfig();
  c.n_eval_speakers = 2;
  c.n_eval_phrases = 2;
  c.eval_repeats = 9;
  c.enroll_repeats = 3;
  return c;
}

std::map<TrialType, int> Counts(const std::vector<Trial>& trials) {
  std::map<TrialType, int> counts;
  for (const auto& t : trials) counts[t.type] += 1;
  return counts;
}

TEST_CASE("condition 1 on 2 speakers x 2 phrases x 9 repeats") {
  const Corpus corpus = GenerateCorpus(TwoByTwoConfig());
  const TrialList list = GenerateTrialsCondition1(corpus, {1, 1, 1, 1}, 3);
  CHECK(list.models.size() == 4);

  // Brute-force enumeration of every (model, test utterance) pair.
  std::map<TrialType, int> candidates;
  std::map<std::string, const ModelSpec*> models;
  for (const auto& m : list.models) {
    models[m.model_id] = &m;
    CHECK(m.utt_ids.size() == 3);
    const Utterance& first = corpus.Find(m.utt_ids[0]);
    for (const auto& id : m.utt_ids) {
      const Utterance& u = corpus.Find(id);
      CHECK(u.speaker_id == m.speaker_id);
      CHECK(u.phrase_id == first.phrase_id);
      CHECK(u.repeat < 3);
    }
    for (const Utterance* test : corpus.SplitUtterances(Split::kEval)) {
      if (test->repeat < 3) continue;
      const bool same_spk = test->speaker_id == m.speaker_id;
      const bool same_text = test->phrase_id == first.phrase_id;
      candidates[same_spk ? (same_text ? kTC : kTW) : (same_text ? kIC : kIW)] += 1;
    }
  }
  CHECK(candidates[kTC] == 24);
  CHECK(candidates[kTW] == 24);
  CHECK(candidates[kIC] == 24);
  CHECK(candidates[kIW] == 24);
  const auto counts = Counts(list.trials);
  CHECK(counts.at(kTC) == 24);
  CHECK(counts.at(kTW) == 24);
  CHECK(counts.at(kIC) == 24);
  CHECK(counts.at(kIW) == 24);

  // Labels and types agree with the corpus.
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& t : list.trials) {
    CHECK(seen.insert({t.model_id, t.test_utt_id}).second);
    const ModelSpec& m = *models.at(t.model_id);
    const Utterance& test = corpus.Find(t.test_utt_id);
    const Utterance& enroll = corpus.Find(m.utt_ids[0]);
    CHECK(test.repeat >= 3);
    CHECK(t.target == (t.type == kTC));
    CHECK((test.speaker_id == m.speaker_id) == (t.type == kTC || t.type == kTW));
    CHECK((test.phrase_id == enroll.phrase_id) == (t.type == kTC || t.type == kIC));
  }

  try {
    GenerateTrialsCondition1(corpus, {1, 3, 3, 3}, 3);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    const std::string what = e.what();
    CHECK(what.find("72") != std::string::npos);
    CHECK(what.find("24") != std::string::npos);
  }
}

TEST_CASE("condition 1 ratio counts, determinism, uniqueness") {
  CorpusConfig config = TinyCorpusConfig();
  config.n_eval_speakers = 6;
  config.n_eval_phrases = 5;
  config.eval_repeats = 6;
  config.enroll_repeats = 3;
  const Corpus corpus = GenerateCorpus(config);
  const TrialList a = GenerateTrialsCondition1(corpus, {1, 3, 3, 3}, 8);
  const auto counts = Counts(a.trials);
  const int n = 6 * 5 * 3;
  CHECK(counts.at(kTC) == n);
  CHECK(counts.at(kTW) == 3 * n);
  CHECK(counts.at(kIC) == 3 * n);
  CHECK(counts.at(kIW) == 3 * n);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& t : a.trials) CHECK(seen.insert({t.model_id, t.test_utt_id}).second);

  const TrialList b = GenerateTrialsCondition1(corpus, {1, 3, 3, 3}, 8);
  CHECK(a.trials == b.trials);
  CHECK(a.models == b.models);
  CHECK_FALSE(GenerateTrialsCondition1(corpus, {1, 3, 3, 3}, 9).trials == a.trials);

  CHECK_THROWS_AS(GenerateTrialsCondition1(corpus, {4, 3, 3, 3}, 8), ValidationError);
  CHECK_THROWS_AS(ParseTrialRatio("1:3:3"), ValidationError);
  CHECK_THROWS_AS(ParseTrialRatio("0:1:1:1"), ValidationError);
  CHECK(TrialRatioString(ParseTrialRatio("1:3:3:3")) == "1:3:3:3");

  config.n_eval_phrases = 1;
  CHECK_THROWS_AS(GenerateTrialsCondition1(GenerateCorpus(config), {1, 1, 1, 1}, 1),
                  DomainError);
}

TEST_CASE("condition 2 constraints") {
  const CorpusConfig config = TinyCorpusConfig();
  const Corpus corpus = GenerateCorpus(config);
  const int target = config.n_phrases + 2;
  std::set<int> eval_speakers;
  for (const Utterance* u : corpus.SplitUtterances(Split::kEval)) eval_speakers.insert(u->speaker_id);

  for (EnrollMode mode : {EnrollMode::kTextDependent, EnrollMode::kTextIndependent}) {
    CAPTURE(EnrollModeName(mode));
    const TrialList list = GenerateTrialsCondition2(corpus, target, mode, 4);
    CHECK(list.models.size() == eval_speakers.size());
    std::map<std::string, std::set<int>> enroll_phrases;
    for (const auto& m : list.models) {
      REQUIRE(m.utt_ids.size() == size_t(config.enroll_repeats));
      for (const auto& id : m.utt_ids) {
        const Utterance& u = corpus.Find(id);
        CHECK(u.speaker_id == m.speaker_id);
        CHECK(u.split == Split::kEval);
        CHECK(u.phrase_id != target);
        CHECK(u.repeat < config.enroll_repeats);
        enroll_phrases[m.model_id].insert(u.phrase_id);
      }
      const size_t expected = mode == EnrollMode::kTextDependent ? 1 : config.enroll_repeats;
      CHECK(enroll_phrases[m.model_id].size() == expected);
    }
    const auto counts = Counts(list.trials);
    CHECK(counts.at(kTC) > 0);
    CHECK(counts.at(kTW) == counts.at(kTC));
    CHECK(counts.at(kIC) == counts.at(kTC));
    CHECK(counts.at(kIW) == counts.at(kTC));
    std::map<std::string, int> speaker_of;
    for (const auto& m : list.models) speaker_of[m.model_id] = m.speaker_id;
    for (const auto& t : list.trials) {
      const Utterance& test = corpus.Find(t.test_utt_id);
      CHECK(enroll_phrases[t.model_id].count(test.phrase_id) == 0);
      CHECK(test.repeat >= config.enroll_repeats);
      CHECK((test.phrase_id == target) == (t.type == kTC || t.type == kIC));
      CHECK((test.speaker_id == speaker_of[t.model_id]) == (t.type == kTC || t.type == kTW));
    }
    REQUIRE(list.adaptation_utt_ids.size() == size_t(kNumAdaptationUtterances));
    for (const auto& id : list.adaptation_utt_ids) {
      const Utterance& u = corpus.Find(id);
      CHECK(u.split == Split::kDev);
      CHECK(u.phrase_id == target);
      CHECK(eval_speakers.count(u.speaker_id) == 0);
    }
    const TrialList again = GenerateTrialsCondition2(corpus, target, mode, 4);
    CHECK(again.trials == list.trials);
    CHECK(again.models == list.models);
    CHECK(again.adaptation_utt_ids == list.adaptation_utt_ids);
  }
  CHECK_THROWS_AS(GenerateTrialsCondition2(corpus, 0, EnrollMode::kTextDependent, 1),
                  ValidationError);
  CorpusConfig few_dev = config;
  few_dev.n_dev_speakers = 2;
  CHECK_THROWS_AS(GenerateTrialsCondition2(GenerateCorpus(few_dev), target,
                                           EnrollMode::kTextDependent, 1),
                  DomainError);
}

TEST_CASE("text-independent relabelling") {
  const Corpus corpus = GenerateCorpus(TwoByTwoConfig());
  TrialList list = GenerateTrialsCondition1(corpus, {1, 1, 1, 1}, 3);
  RelabelTextIndependent(&list);
  for (const auto& t : list.trials) CHECK(t.target == (t.type == kTC || t.type == kTW));
}

TEST_CASE("trial, model and score files round trip") {
  const Corpus corpus = GenerateCorpus(TwoByTwoConfig());
  TrialList list = GenerateTrialsCondition1(corpus, {1, 1, 1, 1}, 3);
  RelabelTextIndependent(&list);
  CHECK(ParseTrials(FormatTrials(list.trials), "t") == list.trials);
  CHECK(ParseModels(FormatModels(list.models), "m") == list.models);
  const std::vector<std::string> ids = {"a", "b"};
  CHECK(ParseIdList(FormatIdList(ids)) == ids);

  std::vector<double> scores;
  std::mt19937_64 rng(1);
  for (size_t i = 0; i < list.trials.size(); ++i) {
    scores.push_back(std::uniform_real_distribution<double>(-1, 1)(rng));
  }
  const auto lines = ParseScores(FormatScores(list.trials, scores), "s");
  auto shuffled = lines;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(AlignScores(list.trials, shuffled, "s") == scores);
  shuffled.pop_back();
  CHECK_THROWS_AS(AlignScores(list.trials, shuffled, "s"), ValidationError);

  try {
    ParseTrials("m u target TC\nm u maybe TC\n", "trials.txt");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    const std::string what = e.what();
    CHECK(what.find("trials.txt:2") != std::string::npos);
    CHECK(what.find("label") != std::string::npos);
  }
  CHECK_THROWS_AS(ParseTrials("m u target XX\n", "t"), FormatError);
  CHECK_THROWS_AS(ParseTrials("m u target\n", "t"), FormatError);
  CHECK_THROWS_AS(ParseScores("m u abc\n", "s"), FormatError);
  CHECK_THROWS_AS(ParseScores("m u 0.5 extra\n", "s"), FormatError);
  CHECK_THROWS_AS(ParseModels("m x u1\n", "m"), FormatError);
  CHECK_THROWS_AS(ParseModels("m 3\n", "m"), FormatError);
}

TEST_CASE("cosine score") {
  const Embedding a{EmbeddingKind::kSpk, {1.0, 2.0, 3.0}};
  CHECK(CosineScore(a, a) == doctest::Approx(1.0));
  CHECK(CosineScore({EmbeddingKind::kSpk, {1, 0}}, {EmbeddingKind::kSpk, {0, 5}}) == 0.0);
  CHECK_THROWS_AS(CosineScore(a, {EmbeddingKind::kSpk, {0, 0, 0}}), DomainError);
  CHECK_THROWS_AS(CosineScore(a, {EmbeddingKind::kSpk, {1, 2}}), ShapeError);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  for (int i = 0; i < 1000; ++i) {
    Embedding x{EmbeddingKind::kSpk, std::vector<double>(16)}, y = x;
    for (double& v : x.values) v = normal(rng);
    for (double& v : y.values) v = normal(rng);
    long double dot = 0, nx = 0, ny = 0;
    for (int k = 0; k < 16; ++k) {
      dot += (long double)x.values[k] * y.values[k];
      nx += (long double)x.values[k] * x.values[k];
      ny += (long double)y.values[k] * y.values[k];
    }
    const double oracle = static_cast<double>(dot / std::sqrt(nx * ny));
    const double s = CosineScore(x, y);
    CHECK(std::abs(s - oracle) <= 1e-14);
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
}

struct EvalSetup {
  Corpus corpus = GenerateCorpus(TinyCorpusConfig());
  AnyNet net = [this] {
    NetworkConfig c = TinyNetworkConfig(6, 4, 5);
    auto n = InitFactorizationNet<float>(c, 2);
    return AnyNet(n);
  }();
  const FactorizationNet<float>& fact() const { return std::get<FactorizationNet<float>>(net); }
  std::vector<const Utterance*> Eval() const { return corpus.SplitUtterances(Split::kEval); }
};

TEST_CASE("embedding extraction") {
  EvalSetup s;
  const auto utts = s.Eval();
  const Utterance& u = *utts[3];
  const Embedding spk = ExtractEmbedding(s.net, u, ExtractMode::kSpk);
  CHECK(spk.kind == EmbeddingKind::kSpk);
  CHECK(spk.size() == 4);
  CHECK(spk == ForwardSpeaker(s.fact(), u.features).embedding);

  const Embedding comb = ExtractEmbedding(s.net, u, ExtractMode::kSpkText);
  const auto manual = ForwardCombined(s.fact(), ForwardSpeaker(s.fact(), u.features).embedding,
                                      ForwardText(s.fact(), u.features).embedding);
  CHECK(comb == manual.combined);

  for (ExtractMode mode : {ExtractMode::kSpk, ExtractMode::kSpkText}) {
    const auto batch = ExtractEmbeddings(s.net, utts, mode);
    REQUIRE(batch.size() == utts.size());
    for (size_t i = 0; i < utts.size(); ++i) {
      CHECK(batch[i] == ExtractEmbedding(s.net, *utts[i], mode));
    }
  }

  const AnyNet baseline = InitBaselineNet<float>(s.fact().config, 3);
  CHECK_NOTHROW(ExtractEmbedding(baseline, u, ExtractMode::kSpk));
  CHECK_THROWS_AS(ExtractEmbedding(baseline, u, ExtractMode::kSpkText), ValidationError);
  Utterance short_utt = u;
  short_utt.features = Matrix<float>(3, 6);
  CHECK_THROWS_AS(ExtractEmbedding(s.net, short_utt, ExtractMode::kSpk), DomainError);
}

TEST_CASE("adaptation text embedding") {
  EvalSetup s;
  std::vector<const Utterance*> same_phrase;
  for (const Utterance* u : s.corpus.SplitUtterances(Split::kDev)) {
    if (u->phrase_id == s.corpus.config.n_phrases) same_phrase.push_back(u);
  }
  REQUIRE(same_phrase.size() >= 5);
  const Embedding single = AdaptationTextEmbedding(s.fact(), std::span(same_phrase.data(), 1));
  CHECK(single == ExtractTextEmbedding(s.fact(), *same_phrase[0]));

  const std::vector<const Utterance*> repeated(4, same_phrase[0]);
  const Embedding rep = AdaptationTextEmbedding(s.fact(), repeated);
  for (int k = 0; k < rep.size(); ++k) CHECK(rep.values[k] == doctest::Approx(single.values[k]).epsilon(1e-15));

  const Embedding mean = AdaptationTextEmbedding(s.fact(), same_phrase);
  std::vector<long double> acc(mean.values.size(), 0.0L);
  for (const Utterance* u : same_phrase) {
    const auto t = ExtractTextEmbedding(s.fact(), *u);
    for (size_t k = 0; k < acc.size(); ++k) acc[k] += t.values[k];
  }
  for (size_t k = 0; k < acc.size(); ++k) {
    CHECK(std::abs(mean.values[k] - double(acc[k] / same_phrase.size())) <= 1e-9);
  }

  CHECK_THROWS_AS(AdaptationTextEmbedding(s.fact(), std::vector<const Utterance*>{}), DomainError);
  std::vector<const Utterance*> mixed = {same_phrase[0]};
  for (const Utterance* u : s.corpus.SplitUtterances(Split::kDev)) {
    if (u->phrase_id != same_phrase[0]->phrase_id) {
      mixed.push_back(u);
      break;
    }
  }
  CHECK_THROWS_AS(AdaptationTextEmbedding(s.fact(), mixed), ValidationError);
}

TEST_CASE("enrollment") {
  EvalSetup s;
  const auto utts = s.Eval();
  const ModelSpec spec{"m", utts[0]->speaker_id, {}};
  const std::vector<const Utterance*> one = {utts[0]};

  const EnrollmentModel spk = Enroll(s.net, spec, one, ScoringMode::kSpk);
  Embedding expected = ForwardSpeaker(s.fact(), utts[0]->features).embedding;
  double norm = 0.0;
  for (double v : expected.values) norm += v * v;
  for (double& v : expected.values) v /= std::sqrt(norm);
  for (int k = 0; k < expected.size(); ++k) {
    CHECK(spk.embedding.values[k] == doctest::Approx(expected.values[k]).epsilon(1e-15));
  }
  CHECK(spk.adaptation_source == AdaptationSource::kNone);

  // Adapting with the utterance's own text embedding is the genuine case.
  const Embedding own_text = ExtractTextEmbedding(s.fact(), *utts[0]);
  const auto genuine = Enroll(s.net, spec, one, ScoringMode::kSpkText);
  const auto adapted = Enroll(s.net, spec, one, ScoringMode::kSpkAdaptText, own_text);
  CHECK(adapted.embedding == genuine.embedding);
  CHECK(adapted.adaptation_source == AdaptationSource::kAdapted);
  CHECK(genuine.adaptation_source == AdaptationSource::kGenuine);
  CHECK_THROWS_AS(Enroll(s.net, spec, one, ScoringMode::kSpkAdaptText), ValidationError);
  CHECK_THROWS_AS(Enroll(s.net, spec, std::vector<const Utterance*>{}, ScoringMode::kSpk),
                  DomainError);

  // Three utterances: mean of per-utterance combined embeddings, then unit length.
  const std::vector<const Utterance*> three = {utts[0], utts[1], utts[2]};
  const auto model = Enroll(s.net, spec, three, ScoringMode::kSpkText);
  std::vector<long double> acc(model.embedding.values.size(), 0.0L);
  for (const Utterance* u : three) {
    const auto e = ExtractEmbedding(s.net, *u, ExtractMode::kSpkText);
    for (size_t k = 0; k < acc.size(); ++k) acc[k] += e.values[k];
  }
  long double n2 = 0.0L;
  for (auto v : acc) n2 += v * v;
  for (size_t k = 0; k < acc.size(); ++k) {
    CHECK(std::abs(model.embedding.values[k] - double(acc[k] / std::sqrt(n2))) <= 1e-12);
  }
}

TEST_CASE("trial scoring agrees with enroll and cosine") {
  EvalSetup s;
  const int target = s.corpus.config.n_phrases + 1;
  const TrialList list =
      GenerateTrialsCondition2(s.corpus, target, EnrollMode::kTextIndependent, 5);
  std::vector<const Utterance*> adapt;
  for (const auto& id : list.adaptation_utt_ids) adapt.push_back(&s.corpus.Find(id));
  const Embedding adaptation = AdaptationTextEmbedding(s.fact(), adapt);

  for (ScoringMode mode : {ScoringMode::kSpk, ScoringMode::kSpkText, ScoringMode::kSpkAdaptText}) {
    CAPTURE(ScoringModeName(mode));
    const auto scores = ScoreTrials(s.net, s.corpus, list.models, list.trials, mode,
                                    list.adaptation_utt_ids);
    REQUIRE(scores.size() == list.trials.size());
    std::map<std::string, EnrollmentModel> models;
    for (const auto& m : list.models) {
      std::vector<const Utterance*> utts;
      for (const auto& id : m.utt_ids) utts.push_back(&s.corpus.Find(id));
      models[m.model_id] = Enroll(s.net, m, utts, mode, adaptation);
    }
    for (size_t i = 0; i < list.trials.size(); ++i) {
      const Utterance& test = s.corpus.Find(list.trials[i].test_utt_id);
      const Embedding t = ExtractEmbedding(
          s.net, test, mode == ScoringMode::kSpk ? ExtractMode::kSpk : ExtractMode::kSpkText);
      CHECK(scores[i] == CosineScore(models[list.trials[i].model_id].embedding, t));
    }
  }
  CHECK_THROWS_AS(
      ScoreTrials(s.net, s.corpus, list.models, list.trials, ScoringMode::kSpkAdaptText, {}),
      ValidationError);
  auto bad = list.trials;
  bad[0].test_utt_id = "missing";
  CHECK_THROWS_AS(ScoreTrials(s.net, s.corpus, list.models, bad, ScoringMode::kSpk),
                  ValidationError);
  CHECK(ParseScoringMode("spk_adapt_text") == ScoringMode::kSpkAdaptText);
  CHECK_THROWS_AS(ParseScoringMode("text"), ValidationError);
}

}  // namespace
}  // namespace stf
