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
#include <numeric>
#include <random>
#include <set>

#include "doctest.h"
#include "gradient_check.h"
#include "stf/checkpoint.h"
#include "stf/error.h"
#include "stf/training.h"
#include "test_util.h"

namespace stf {
namespace {

using testing::TinyCorpusConfig;
using testing::TinyNetworkConfig;

std::vector<double> RandomSimplex(std::mt19937_64& rng, int c, double zero_prob = 0.0) {
  std::exponential_distribution<double> e(1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(c);
  double sum = 0.0;
  for (double& v : p) {
    v = u(rng) < zero_prob ? 0.0 : e(rng);
    sum += v;
  }
  if (sum == 0.0) {
    p[0] = sum = 1.0;
  }
  for (double& v : p) v /= sum;
  return p;
}

TEST_CASE("cross entropy examples") {
  const std::vector<double> zeros = {0.0, 0.0};
  CHECK(CrossEntropy<double>(zeros, 0) == doctest::Approx(std::log(2.0)));
  const std::vector<double> dominant = {1000.0, 0.0};
  CHECK(CrossEntropy<double>(dominant, 0) == doctest::Approx(0.0));
  CHECK(CrossEntropy<double>(dominant, 1) == doctest::Approx(1000.0));
  const std::vector<double> bad = {0.0, NAN};
  CHECK_THROWS_AS(CrossEntropy<double>(bad, 0), NumericError);
  CHECK_THROWS_AS(CrossEntropy<double>(zeros, 2), RangeError);
}

TEST_CASE("cross entropy against an extended-precision oracle") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> logits(5);
    for (double& v : logits) v = normal(rng);
    const int k = static_cast<int>(rng() % 5);
    long double denom = 0.0L;
    for (double v : logits) denom += std::exp(static_cast<long double>(v));
    const long double oracle = -std::log(std::exp(static_cast<long double>(logits[k])) / denom);
    const double ce = CrossEntropy<double>(logits, k);
    CHECK(std::abs(ce - static_cast<double>(oracle)) <= 1e-12 * (1.0 + std::abs(ce)));
    CHECK(ce >= 0.0);
    // Raising the true-class logit lowers the loss.
    logits[k] += 0.5;
    CHECK(CrossEntropy<double>(logits, k) < ce);
  }
}

TEST_CASE("KL divergence examples") {
  const std::vector<double> p = {0.2, 0.3, 0.5};
  CHECK(KlDivergence(p, p) == 0.0);
  const std::vector<double> one = {1.0, 0.0}, half = {0.5, 0.5};
  CHECK(KlDivergence(one, half) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(KlDivergence(one, p), ShapeError);
  // Zero predicted mass is floored rather than giving infinity.
  const std::vector<double> zero_pred = {0.0, 1.0};
  CHECK(KlDivergence(one, zero_pred) == doctest::Approx(-std::log(kProbabilityFloor)));
}

TEST_CASE("KL divergence: 1000 random simplex pairs") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 1000; ++i) {
    const int c = 2 + static_cast<int>(rng() % 40);
    const auto target = RandomSimplex(rng, c, 0.3);
    const auto predicted = RandomSimplex(rng, c);
    long double oracle = 0.0L;
    for (int k = 0; k < c; ++k) {
      if (target[k] > 0.0) {
        oracle += static_cast<long double>(target[k]) *
                  std::log(static_cast<long double>(target[k]) / predicted[k]);
      }
    }
    const double kl = KlDivergence(target, predicted);
    CHECK(std::abs(kl - static_cast<double>(oracle)) <= 1e-12 * (1.0 + kl));
    CHECK(kl > 0.0);
    CHECK(KlDivergence(target, target) == 0.0);
    CHECK(KlDivergence(predicted, predicted) == 0.0);
  }
}

std::vector<TrainingSegment> Pool(const std::vector<int>& speakers) {
  std::vector<TrainingSegment> pool(speakers.size());
  for (size_t i = 0; i < speakers.size(); ++i) pool[i].speaker_label = speakers[i];
  return pool;
}

TEST_CASE("pair sampling") {
  const auto pool = Pool({0, 0, 1, 1, 2, 2, 2, 3});
  std::vector<int> anchors(10000);
  std::mt19937_64 pick(3);
  for (int& a : anchors) a = static_cast<int>(pick() % pool.size());

  std::mt19937_64 rng(4);
  auto all_same = SamplePairBatch(pool, anchors, 1.0, rng);
  CHECK(all_same.speaker == anchors);
  CHECK(all_same.text == anchors);

  auto all_cross = SamplePairBatch(pool, anchors, 0.0, rng);
  for (size_t i = 0; i < anchors.size(); ++i) {
    CHECK(pool[all_cross.text[i]].speaker_label != pool[anchors[i]].speaker_label);
  }
  CHECK(all_cross.fallbacks == 0);

  auto mixed = SamplePairBatch(pool, anchors, 0.5, rng);
  int identical = 0;
  std::vector<int> cross_hits(pool.size(), 0);
  for (size_t i = 0; i < anchors.size(); ++i) {
    if (mixed.text[i] == anchors[i]) {
      ++identical;
    } else {
      CHECK(pool[mixed.text[i]].speaker_label != pool[anchors[i]].speaker_label);
    }
  }
  CHECK(std::abs(identical / 10000.0 - 0.5) <= 0.02);

  std::mt19937_64 r1(9), r2(9);
  CHECK(SamplePairBatch(pool, anchors, 0.5, r1).text ==
        SamplePairBatch(pool, anchors, 0.5, r2).text);

  const auto single = Pool({7, 7, 7});
  std::mt19937_64 r3(5);
  const std::vector<int> few = {0, 1, 2, 0};
  auto fallback = SamplePairBatch(single, few, 0.0, r3);
  CHECK(fallback.text == few);
  CHECK(fallback.fallbacks == 4);
  CHECK_THROWS_AS(SamplePairBatch(std::vector<TrainingSegment>{}, few, 0.5, r3), DomainError);
}

TEST_CASE("analytic gradient matches finite differences") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    const auto result = testing::CheckFactorizationGradient(seed);
    CHECK(result.num_params <= 500);
    CHECK(result.num_params > 100);
    CHECK(result.num_failed == 0);
    MESSAGE("seed " << seed << ": " << result.num_params << " params, "
                    << result.num_significant << " significant, worst relative error "
                    << result.worst_relative);
  }
  // Two pairs leave segment-level batch norm nearly saturated, so most
  // upstream gradients sit below the floor. A wider batch exercises them.
  const auto wide = testing::CheckFactorizationGradient(4, 8);
  CHECK(wide.num_failed == 0);
  CHECK(wide.num_significant * 10 > wide.num_params * 9);
  MESSAGE("8 pairs: " << wide.num_significant << " of " << wide.num_params
                      << " significant, worst relative error " << wide.worst_relative);
}

struct TinySetup {
  Corpus corpus = GenerateCorpus(TinyCorpusConfig());
  NetworkConfig network = TinyNetworkConfig(6, 4, 5);
  TrainingConfig training = [] {
    TrainingConfig t;
    t.batch_size = 8;
    t.epochs = 12;
    t.min_crop_frames = 10;
    t.max_crop_frames = 16;
    t.learning_rate = 0.05;
    return t;
  }();
};

PairExamples<float> SomeExamples(const TinySetup& s, uint64_t seed) {
  const CropResult crops = CropTrainingSegments(s.corpus, 10, 16, seed);
  const PairBatch batch = SamplePairBatch(crops.segments, s.training, seed);
  return MakePairExamples(crops.segments, batch);
}

template <typename Net>
std::vector<double> Params(const Net& net) {
  std::vector<double> out;
  VisitNet(const_cast<Net&>(net), [&](auto span) { out.insert(out.end(), span.begin(), span.end()); },
           false);
  return out;
}

TEST_CASE("zero learning rate leaves parameters unchanged") {
  TinySetup s;
  s.training.learning_rate = 0.0;
  auto net = InitFactorizationNet<float>(s.network, 1);
  const auto before = Params(net);
  SgdOptimizer<FactorizationNet<float>> opt(net, s.training);
  const auto loss = TrainingStep(net, SomeExamples(s, 2), opt);
  CHECK(Params(net) == before);
  for (double v : {loss.l_s1, loss.l_t1, loss.l_s2, loss.l_t2, loss.total}) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
  }
  CHECK(std::abs(loss.total - (loss.l_s1 + loss.l_t1 + loss.l_s2 + loss.l_t2)) <= 1e-9);
}

TEST_CASE("weight decay alone scales weights by 1 - lr * wd") {
  TinySetup s;
  s.training.learning_rate = 0.1;
  s.training.weight_decay = 0.01;
  auto net = InitFactorizationNet<double>(s.network, 3);
  // Non-zero biases and batch-norm shifts so every tensor is exercised.
  VisitNet(net, [](auto span) { for (auto& v : span) v += 0.25; }, false);
  const auto before = Params(net);
  SgdOptimizer<FactorizationNet<double>> opt(net, s.training);
  opt.Step(net, ZerosLike(net));
  const auto after = Params(net);
  const double factor = 1.0 - 0.1 * 0.01;
  for (size_t i = 0; i < before.size(); ++i) {
    CHECK(after[i] == doctest::Approx(before[i] * factor).epsilon(1e-15));
  }
}

TEST_CASE("non-finite loss names the offending term") {
  TinySetup s;
  auto net = InitFactorizationNet<float>(s.network, 1);
  std::fill(net.text.head.bias.begin(), net.text.head.bias.end(), NAN);
  try {
    FactorizationLoss<float>(net, SomeExamples(s, 1), nullptr);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("l_t1") != std::string::npos);
  }
}

TEST_CASE("fit reduces the loss and is deterministic") {
  TinySetup s;
  const auto a = FitFactorization(s.corpus, s.network, s.training);
  REQUIRE(a.history.size() == 12u);
  CHECK(a.history.back().loss.total < a.history.front().loss.total);
  for (const auto& e : a.history) {
    CHECK(std::abs(e.loss.total - (e.loss.l_s1 + e.loss.l_t1 + e.loss.l_s2 + e.loss.l_t2)) <= 1e-9);
  }
  const auto b = FitFactorization(s.corpus, s.network, s.training);
  CHECK(EncodeCheckpoint(AnyNet(a.net)) == EncodeCheckpoint(AnyNet(b.net)));

  const auto base = FitBaseline(s.corpus, s.network, s.training);
  CHECK(base.history.back().loss.l_s1 < base.history.front().loss.l_s1);
  CHECK(base.history.back().loss.l_t1 == 0.0);

  const auto log = EpochLogJson(a.history.front());
  for (const char* key : {"epoch", "l_s1", "l_t1", "l_s2", "l_t2", "total", "wall_time"}) {
    CHECK(log.contains(key));
  }
}

TEST_CASE("fit rejects crops shorter than the receptive field") {
  TinySetup s;
  s.training.min_crop_frames = 3;
  CHECK_THROWS_AS(FitFactorization(s.corpus, s.network, s.training), ValidationError);
}

}  // namespace
}  // namespace stf
