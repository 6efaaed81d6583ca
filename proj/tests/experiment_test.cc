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

#include "bargain/experiment.h"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "gtest/gtest.h"

namespace bargain {
namespace {

namespace fs = std::filesystem;

constexpr char kTwoGames[] = R"({
  "seed": 5,
  "experiments": [
    {"environment": {"name": "IAsymBoS"},
     "algorithm": {"name": "lola", "iterations": 40}, "runs": 2},
    {"environment": {"name": "IPD"},
     "algorithm": {"name": "lola", "iterations": 40}, "runs": 2}
  ]
})";

constexpr char kAmTFT[] = R"({
  "seed": 2,
  "experiments": [
    {"environment": {"name": "IAsymBoS"}, "algorithm": {"name": "amtft"},
     "welfare": {"sets": [["util"], ["ia"]]}, "runs": 2,
     "evaluation": {"episodes": 1, "length": 60}}
  ]
})";

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("bargain_" + name)) {
    fs::remove_all(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  std::string str() const { return path_.string(); }
  fs::path operator/(const std::string& p) const { return path_ / p; }

 private:
  fs::path path_;
};

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<MatchRecord> RecordsOf(const fs::path& path) {
  std::ifstream in(path);
  return ReadResults(in);
}

TEST(ParseFilterTest, Shapes) {
  EXPECT_EQ(ParseFilter("env=IPD"), Filter("env", "IPD"));
  EXPECT_EQ(ParseFilter("pair_type=self_play"), Filter("pair_type", "self_play"));
  EXPECT_THROW(ParseFilter("env"), std::invalid_argument);
  EXPECT_THROW(ParseFilter("=IPD"), std::invalid_argument);
}

TEST(TrainTest, WritesBundlesAndSkipsOnRerun) {
  ScratchDir dir("train");
  const ExperimentConfig config = ParseConfig(kTwoGames);
  const RunOptions options{.out_dir = dir.str()};
  const TrainSummary first = Train(config, options);
  EXPECT_EQ(first.trained, 4);
  EXPECT_EQ(first.skipped, 0);
  EXPECT_TRUE(fs::exists(dir / "runs/IAsymBoS-lola/run-0.json"));
  EXPECT_TRUE(fs::exists(dir / "runs/IAsymBoS-lola/run-1.json"));
  EXPECT_TRUE(fs::exists(dir / "train_manifest.json"));
  const TrainSummary second = Train(config, options);
  EXPECT_EQ(second.trained, 0);
  EXPECT_EQ(second.skipped, 4);
  // A different seed invalidates every bundle.
  const TrainSummary reseeded = Train(config, {.out_dir = dir.str(), .seed = 9});
  EXPECT_EQ(reseeded.trained, 4);
}

TEST(EvaluateTest, CountsAndDeterminism) {
  ScratchDir dir("evaluate");
  const ExperimentConfig config = ParseConfig(kTwoGames);
  const RunOptions options{.out_dir = dir.str()};
  Train(config, options);
  const EvaluateSummary a = Evaluate(config, options);
  // Two runs per game: 2 self-play and 2 cross-play records each.
  EXPECT_EQ(a.records, 8u);
  const std::vector<MatchRecord> records = RecordsOf(a.results_path);
  int self = 0;
  for (const MatchRecord& r : records) self += r.pair_type == PairType::kSelfPlay;
  EXPECT_EQ(self, 4);
  const std::string bytes = Slurp(a.results_path);
  const std::string aggregate = Slurp(dir / "aggregate.tsv");
  const EvaluateSummary b = Evaluate(config, {.out_dir = dir.str(), .jobs = 3});
  EXPECT_EQ(Slurp(b.results_path), bytes);
  EXPECT_EQ(Slurp(dir / "aggregate.tsv"), aggregate);
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
}

TEST(EvaluateTest, FiltersRestrictRecords) {
  ScratchDir dir("filter");
  const ExperimentConfig config = ParseConfig(kTwoGames);
  Train(config, {.out_dir = dir.str()});
  const EvaluateSummary s =
      Evaluate(config, {.out_dir = dir.str(), .filters = {{"env", "IAsymBoS"}}});
  EXPECT_EQ(s.records, 4u);
  for (const MatchRecord& r : RecordsOf(s.results_path)) EXPECT_EQ(r.env, "IAsymBoS");
  const EvaluateSummary only_self =
      Evaluate(config, {.out_dir = dir.str(), .filters = {{"pair_type", "self_play"}}});
  EXPECT_EQ(only_self.records, 4u);
  EXPECT_THROW(Evaluate(config, {.out_dir = dir.str(), .filters = {{"colour", "red"}}}),
               std::invalid_argument);
}

TEST(EvaluateTest, MissingBundlesAreNamed) {
  ScratchDir dir("missing");
  const ExperimentConfig config = ParseConfig(kTwoGames);
  Train(config, {.out_dir = dir.str()});
  fs::remove(dir / "runs/IPD-lola/run-1.json");
  try {
    Evaluate(config, {.out_dir = dir.str()});
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("run-1.json"), std::string::npos) << e.what();
  }
}

TEST(EvaluateTest, AmTFTBundlesRoundTrip) {
  ScratchDir dir("amtft");
  const ExperimentConfig config = ParseConfig(kAmTFT);
  Train(config, {.out_dir = dir.str()});
  const EvaluateSummary s = Evaluate(config, {.out_dir = dir.str()});
  // Self-play within a set: 2 sets x 2 runs. Cross-play pairs run i with run
  // (i + 1) % 2 for each of the 4 ordered set pairs.
  EXPECT_EQ(s.records, 4u + 8u);
  double same = 0.0, diff = 0.0;
  int ns = 0, nd = 0;
  for (const MatchRecord& r : RecordsOf(s.results_path)) {
    if (r.pair_type == PairType::kCrossSameWelfare) same += r.normalized_score, ++ns;
    if (r.pair_type == PairType::kCrossDiffWelfare) diff += r.normalized_score, ++nd;
  }
  ASSERT_GT(ns, 0);
  ASSERT_GT(nd, 0);
  EXPECT_GT(same / ns, diff / nd);
}

TEST(VerifyGamesTest, NoViolations) {
  const std::vector<std::string> games = {"IAsymBoS", "ExtremeAsymBoS", "BoS"};
  const std::vector<BoundReport> reports = VerifyGames(games);
  EXPECT_EQ(reports.size(), 3u * 25u);
  int checked = 0;
  for (const BoundReport& r : reports) {
    EXPECT_NE(r.status, BoundStatus::kViolated) << FormatBoundReport(r);
    checked += r.status == BoundStatus::kHolds;
    if (r.w == r.w_prime) EXPECT_EQ(r.status, BoundStatus::kPremiseFailed);
    EXPECT_NE(BoundReportJson(r).find("\"status\""), std::string::npos);
  }
  EXPECT_GT(checked, 0);
  EXPECT_TRUE(VerifyGames({}).empty());
  const std::vector<std::string> unknown = {"Chess"};
  EXPECT_ANY_THROW(VerifyGames(unknown));
}

TEST(ReportResultsTest, RejectsBadSchema) {
  ScratchDir dir("report");
  fs::create_directories(dir / "");
  const fs::path bad = dir / "bad.tsv";
  std::ofstream(bad) << "env\talgo\n" << "IPD\tlola\n";
  EXPECT_THROW(ReportResults(bad.string()), std::runtime_error);
  EXPECT_THROW(ReportResults((dir / "absent.tsv").string()), std::runtime_error);
}

TEST(ReportResultsTest, SummarizesEvaluatedRun) {
  ScratchDir dir("report_ok");
  const ExperimentConfig config = ParseConfig(kTwoGames);
  Train(config, {.out_dir = dir.str()});
  const EvaluateSummary s = Evaluate(config, {.out_dir = dir.str()});
  const std::string summary = ReportResults(s.results_path);
  EXPECT_NE(summary.find("IAsymBoS"), std::string::npos);
  EXPECT_NE(summary.find("self_play"), std::string::npos);
}

// Self-play is compared over runs that match a convention, the same runs that
// enter the cross-play buckets.
TEST(DefaultExperimentTest, SelfPlayAtLeastCrossSameAtLeastCrossDiff) {
  ScratchDir dir("default");
  ExperimentConfig config = LoadConfig(std::string(BARGAIN_SOURCE_DIR) + "/configs/default.json");
  std::erase_if(config.experiments, [](const ExperimentSpec& e) {
    return e.environment.name != "IPD" && e.environment.name != "IAsymBoS";
  });
  ASSERT_EQ(config.experiments.size(), 4u);
  Train(config, {.out_dir = dir.str()});
  const EvaluateSummary s = Evaluate(config, {.out_dir = dir.str()});
  struct Mean {
    double sum = 0.0;
    int n = 0;
    double value() const { return sum / n; }
  };
  std::map<std::pair<std::string, std::string>, std::map<PairType, Mean>> cells;
  for (const MatchRecord& r : RecordsOf(s.results_path)) {
    if (r.pair_type == PairType::kSelfPlay && r.convention_p1 == kUnclassified) continue;
    Mean& m = cells[{r.env, r.algo}][r.pair_type];
    m.sum += r.normalized_score;
    ++m.n;
  }
  ASSERT_EQ(cells.size(), 4u);
  for (auto& [key, by_type] : cells) {
    SCOPED_TRACE(key.first + " " + key.second);
    ASSERT_GT(by_type[PairType::kSelfPlay].n, 0);
    ASSERT_GT(by_type[PairType::kCrossSameWelfare].n, 0);
    const double self = by_type[PairType::kSelfPlay].value();
    const double same = by_type[PairType::kCrossSameWelfare].value();
    EXPECT_GE(self + 1e-12, same);
    if (by_type[PairType::kCrossDiffWelfare].n > 0) {
      EXPECT_GE(same + 1e-12, by_type[PairType::kCrossDiffWelfare].value());
    }
  }
}

}  // namespace
}  // namespace bargain
