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

// stfnet: corpus generation, training, trial lists, scoring and reports.
//
//   stfnet gen-corpus --out corpus [--config exp.json] [--seed 7]
//   stfnet train --corpus corpus --out model.ckpt [--model baseline]
//   stfnet trials --corpus corpus --condition 2 --target-phrase 31 --out t2
//   stfnet score --checkpoint model.ckpt --corpus corpus --trials t2
//       --mode spk_adapt_text --out t2.scores
//   stfnet report --trials t2 --scores t2.scores --out report.json

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stf/error.h"
#include "stf/experiment.h"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
};

void AddCommon(CLI::App* cmd, CommonFlags* flags, const char* out_help) {
  cmd->add_option("--config", flags->config, "Experiment config JSON");
  cmd->add_option("--seed", flags->seed, "Experiment seed (overrides the config)");
  cmd->add_option("--out", flags->out, out_help)->required();
}

stf::ExperimentConfig LoadConfig(const CommonFlags& flags) {
  stf::ExperimentConfig config = stf::LoadExperimentConfig(flags.config);
  if (flags.seed) {
    config.seed = *flags.seed;
    config.PropagateSeed();
  }
  return config;
}

void PrintError(const std::string& category, const std::string& message) {
  nlohmann::json j = {{"error", {{"category", category}, {"message", message}}}};
  std::cerr << j.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Speaker-text factorization network toolkit"};
  app.require_subcommand(1);

  CommonFlags common;

  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic corpus directory");
  AddCommon(gen, &common, "Corpus directory to create");

  auto* train = app.add_subcommand("train", "Train a network on the training split");
  stf::TrainOptions train_opts;
  std::string model_name = "factorization";
  std::optional<int> epochs;
  AddCommon(train, &common, "Checkpoint path");
  train->add_option("--corpus", train_opts.corpus_dir, "Corpus directory")->required();
  train->add_option("--model", model_name, "factorization or baseline");
  train->add_option("--epochs", epochs, "Number of epochs (overrides the config)");
  train->add_option("--log", train_opts.log_path, "Training log (JSON lines)");

  auto* trials = app.add_subcommand("trials", "Generate enrollment models and trials");
  stf::TrialsOptions trial_opts;
  std::string enroll_mode = "text_dependent";
  std::string ratio;
  AddCommon(trials, &common, "Trial directory to create");
  trials->add_option("--corpus", trial_opts.corpus_dir, "Corpus directory")->required();
  trials->add_option("--condition", trial_opts.condition, "1 (matched text) or 2 (mismatched)");
  trials->add_option("--target-phrase", trial_opts.target_phrase, "Condition 2 target phrase id");
  trials->add_option("--enroll-mode", enroll_mode, "text_dependent or text_independent");
  trials->add_option("--ratio", ratio, "TC:TW:IC:IW for condition 1");
  trials->add_flag("--text-independent", trial_opts.text_independent,
                   "Label TW trials as targets");

  auto* score = app.add_subcommand("score", "Score a trial list with a checkpoint");
  stf::ScoreOptions score_opts;
  std::string mode;
  AddCommon(score, &common, "Score file");
  score->add_option("--checkpoint", score_opts.checkpoint, "Checkpoint path")->required();
  score->add_option("--corpus", score_opts.corpus_dir, "Corpus directory")->required();
  score->add_option("--trials", score_opts.trials_dir, "Trial directory")->required();
  score->add_option("--mode", mode, "spk, spk_text or spk_adapt_text");

  auto* report = app.add_subcommand("report", "EER/minDCF report for score files");
  std::vector<std::string> report_trials, report_scores, report_names;
  AddCommon(report, &common, "Report JSON");
  report->add_option("--trials", report_trials, "Trial directory (one, or one per score file)")
      ->required();
  report->add_option("--scores", report_scores, "Score file (repeatable)")->required();
  report->add_option("--name", report_names, "System name per score file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    PrintError("usage", e.what());
    return 2;
  }

  try {
    stf::ExperimentConfig config = LoadConfig(common);
    if (*gen) {
      stf::CmdGenCorpus(config, common.out);
    } else if (*train) {
      if (epochs) config.training.epochs = *epochs;
      train_opts.model = stf::ParseModelKind(model_name);
      train_opts.checkpoint = common.out;
      stf::CmdTrain(config, train_opts, &std::cout);
    } else if (*trials) {
      if (!ratio.empty()) config.ratio = stf::ParseTrialRatio(ratio);
      trial_opts.enroll_mode = stf::ParseEnrollMode(enroll_mode);
      trial_opts.out_dir = common.out;
      stf::CmdTrials(config, trial_opts);
    } else if (*score) {
      score_opts.mode = mode.empty() ? config.modes.front() : stf::ParseScoringMode(mode);
      score_opts.out = common.out;
      stf::CmdScore(config, score_opts);
    } else if (*report) {
      if (report_trials.size() != 1 && report_trials.size() != report_scores.size()) {
        throw stf::ValidationError("give one --trials or one per --scores");
      }
      if (!report_names.empty() && report_names.size() != report_scores.size()) {
        throw stf::ValidationError("give one --name per --scores");
      }
      std::vector<stf::ReportSystem> systems;
      for (size_t i = 0; i < report_scores.size(); ++i) {
        systems.push_back(
            {report_names.empty()
                 ? std::filesystem::path(report_scores[i]).filename().string()
                 : report_names[i],
             report_trials.size() == 1 ? report_trials[0] : report_trials[i],
             report_scores[i]});
      }
      stf::CmdReport(config, systems, common.out, &std::cout);
    }
  } catch (const stf::Error& e) {
    PrintError(e.category(), e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    PrintError("io", e.what());
    return 1;
  } catch (const std::exception& e) {
    PrintError("internal", e.what());
    return 1;
  }
  return 0;
}
