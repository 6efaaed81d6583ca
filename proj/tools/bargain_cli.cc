// Copyright 2026 The Bargain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point: train, evaluate, verify and report.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "bargain/config.h"
#include "bargain/experiment.h"

namespace {

struct CommonFlags {
  std::string config;
  int jobs = std::max(1u, std::thread::hardware_concurrency());
  std::uint64_t seed = 0;
  std::string out;
  std::vector<std::string> filters;
};

void AddCommon(CLI::App* cmd, CommonFlags& flags, CLI::Option*& seed_option) {
  cmd->add_option("--config", flags.config, "Experiment config (JSON)")->required();
  cmd->add_option("--jobs", flags.jobs, "Worker threads")->check(CLI::PositiveNumber);
  seed_option = cmd->add_option("--seed", flags.seed, "Top-level seed override");
  cmd->add_option("--out", flags.out, "Output directory (overrides output_dir)");
  cmd->add_option("--filter", flags.filters, "key=value restriction, repeatable");
}

bargain::RunOptions Options(const CommonFlags& flags, const CLI::Option* seed_option) {
  bargain::RunOptions options;
  options.out_dir = flags.out;
  options.jobs = flags.jobs;
  if (seed_option->count() > 0) options.seed = flags.seed;
  for (const std::string& f : flags.filters) options.filters.push_back(bargain::ParseFilter(f));
  options.log = &std::cerr;
  return options;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bargaining-problem cross-play experiments"};
  app.require_subcommand(1);

  CommonFlags train_flags, eval_flags;
  CLI::Option* train_seed = nullptr;
  CLI::Option* eval_seed = nullptr;
  CLI::App* train = app.add_subcommand("train", "Train every run of the configured experiments");
  AddCommon(train, train_flags, train_seed);
  CLI::App* evaluate = app.add_subcommand("evaluate", "Play all matches and write results.tsv");
  AddCommon(evaluate, eval_flags, eval_seed);

  std::vector<std::string> games = {"IAsymBoS", "ExtremeAsymBoS"};
  std::string verify_out;
  CLI::App* verify = app.add_subcommand("verify", "Check the grim-policy tail-value bound");
  verify->add_option("--games", games, "Iterated matrix games; empty for none")
      ->expected(0, -1)
      ->delimiter(',');
  verify->add_option("--out", verify_out, "Directory for verify_report.{txt,jsonl}");

  std::string results;
  CLI::App* report = app.add_subcommand("report", "Validate a results file and summarize it");
  report->add_option("--results", results, "Path to results.tsv")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      const bargain::ExperimentConfig config = bargain::LoadConfig(train_flags.config);
      const auto summary = bargain::Train(config, Options(train_flags, train_seed));
      std::cout << "trained " << summary.trained << " runs, skipped " << summary.skipped << "\n";
    } else if (evaluate->parsed()) {
      const bargain::ExperimentConfig config = bargain::LoadConfig(eval_flags.config);
      const auto summary = bargain::Evaluate(config, Options(eval_flags, eval_seed));
      std::cout << "wrote " << summary.records << " records to " << summary.results_path << "\n";
    } else if (verify->parsed()) {
      games.erase(std::remove(games.begin(), games.end(), std::string()), games.end());
      const auto reports = bargain::VerifyGames(games);
      std::string text, jsonl;
      int violated = 0;
      for (const auto& r : reports) {
        text += bargain::FormatBoundReport(r) + "\n";
        jsonl += bargain::BoundReportJson(r) + "\n";
        violated += r.status == bargain::BoundStatus::kViolated;
      }
      std::cout << text << reports.size() << " pairs checked, " << violated << " violated\n";
      if (!verify_out.empty()) {
        std::filesystem::create_directories(verify_out);
        std::ofstream(std::filesystem::path(verify_out) / "verify_report.txt") << text;
        std::ofstream(std::filesystem::path(verify_out) / "verify_report.jsonl") << jsonl;
      }
      return violated == 0 ? 0 : 1;
    } else if (report->parsed()) {
      std::cout << bargain::ReportResults(results);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
