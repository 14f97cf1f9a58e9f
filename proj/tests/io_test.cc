// Copyright 2026 The sideslip-fg Authors
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

#include "sideslip/io.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>
#include <string>

#include "sideslip/sim_oracle.h"
#include "test_support.h"

namespace sideslip::io {
namespace {

namespace fs = std::filesystem;

std::string ErrorOf(const std::string& text) {
  std::istringstream in(text);
  try {
    ParseSamples(in, false, "log.csv");
  } catch (const IoError& e) {
    return e.what();
  }
  return "";
}

TEST(FormatDoubleTest, ShortestRoundTrip) {
  EXPECT_EQ(FormatDouble(0.1), "0.1");
  EXPECT_EQ(FormatDouble(20.0), "20");
  EXPECT_EQ(FormatDouble(-2.5e-7), "-2.5e-07");
  const double awkward = 1.0 / 3.0;
  EXPECT_EQ(std::stod(FormatDouble(awkward)), awkward);
}

TEST(SampleCsvTest, EmptyInput) {
  EXPECT_NE(ErrorOf("").find("empty trajectory"), std::string::npos);
  EXPECT_NE(ErrorOf(std::string(kSampleHeader) + "\n").find("empty trajectory"),
            std::string::npos);
}

TEST(SampleCsvTest, NonPositiveSpeedNamesLine) {
  const std::string text = std::string(kSampleHeader) +
                           "\n0,20,0,0,0,0\n0.01,0,0,0,0,0\n";
  const std::string err = ErrorOf(text);
  EXPECT_NE(err.find("log.csv:3"), std::string::npos) << err;
  EXPECT_NE(err.find("speed"), std::string::npos) << err;
}

TEST(SampleCsvTest, NonIncreasingTime) {
  const std::string text = std::string(kSampleHeader) +
                           "\n0,20,0,0,0,0\n0.02,20,0,0,0,0\n0.02,20,0,0,0,0\n";
  const std::string err = ErrorOf(text);
  EXPECT_NE(err.find("log.csv:4"), std::string::npos) << err;
  EXPECT_NE(err.find("0.02"), std::string::npos) << err;
}

TEST(SampleCsvTest, MalformedFields) {
  const std::string h = std::string(kSampleHeader) + "\n";
  EXPECT_NE(ErrorOf(h + "0,20,0,0,0\n").find("log.csv:2"), std::string::npos);
  EXPECT_NE(ErrorOf(h + "0,20,x,0,0,0\n").find("delta"), std::string::npos);
  EXPECT_NE(ErrorOf(h + "0,20,nan,0,0,0\n").find("not finite"), std::string::npos);
  EXPECT_NE(ErrorOf("a,b\n0,1\n").find("header"), std::string::npos);
}

TEST(SampleCsvTest, DefaultScenarioRoundTrips) {
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  const std::string text = FormatSamples(traj.samples);
  std::istringstream in(text);
  const std::vector<Sample> back = ParseSamples(in);
  ASSERT_EQ(back.size(), 2000u);
  for (std::size_t k = 0; k < back.size(); ++k) {
    EXPECT_EQ(back[k].t, traj.samples[k].t);
    EXPECT_EQ(back[k].u, traj.samples[k].u);
    EXPECT_EQ(back[k].delta, traj.samples[k].delta);
    EXPECT_EQ(back[k].yaw_rate, traj.samples[k].yaw_rate);
    EXPECT_EQ(back[k].ay, traj.samples[k].ay);
    EXPECT_EQ(back[k].beta_gt, traj.samples[k].beta_gt);
  }
  EXPECT_EQ(FormatSamples(back), text);
}

TEST(SampleCsvTest, OptionalGroundTruthAndDegrees) {
  const std::string text =
      "t,u,delta,yaw_rate,ay,beta_gt\n0,20,1,2,0.5,\n0.01,20,1,2,0.5,3\n";
  std::istringstream in(text);
  const std::vector<Sample> s = ParseSamples(in, true);
  EXPECT_FALSE(s[0].beta_gt.has_value());
  EXPECT_NEAR(*s[1].beta_gt, 3.0 / kRadToDeg, 1e-15);
  EXPECT_NEAR(s[0].delta, 1.0 / kRadToDeg, 1e-15);
  EXPECT_NEAR(s[0].yaw_rate, 2.0 / kRadToDeg, 1e-15);
  EXPECT_EQ(s[0].ay, 0.5);
  EXPECT_FALSE(TruthFromSamples(s).has_value());

  std::istringstream five("t,u,delta,yaw_rate,ay\n0,20,0,0,0\n");
  EXPECT_EQ(ParseSamples(five).size(), 1u);
}

TEST(SampleCsvTest, TruthUsesGroundTruthAndGyro) {
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  const auto truth = TruthFromSamples(traj.samples);
  ASSERT_TRUE(truth.has_value());
  EXPECT_EQ((*truth)[10].beta, traj.truth[10].beta);
  EXPECT_EQ((*truth)[10].r, traj.samples[10].yaw_rate);
}

TEST(EstimateCsvTest, RoundTrip) {
  SimConfig sim = SimConfig::DefaultScenario();
  sim.duration = 0.5;
  const Trajectory traj = Simulate(sim);
  SmootherConfig cfg;
  cfg.noise = testing::MatchedNoise();
  const EstimateSeries est = RunFixedLag(traj.samples, cfg);
  const std::string text = FormatEstimates(est);
  EXPECT_EQ(text.substr(0, text.find('\n')), kEstimateHeader);
  std::istringstream in(text);
  const EstimateSeries back = ParseEstimates(in);
  EXPECT_EQ(back.mode, EstimateMode::kFgSliding);
  ASSERT_EQ(back.size(), est.size());
  for (std::size_t k = 0; k < est.size(); ++k) {
    EXPECT_EQ(back.states[k], est.states[k]);
    EXPECT_EQ(back.meta[k].window_id, est.meta[k].window_id);
    EXPECT_EQ(back.meta[k].iterations, est.meta[k].iterations);
  }
}

TEST(EstimateCsvTest, RejectsMixedModes) {
  std::istringstream in(std::string(kEstimateHeader) +
                        "\n0,0,0,kf,-1,0\n0.01,0,0,fg-batch,0,2\n");
  EXPECT_THROW(ParseEstimates(in), IoError);
}

TEST(SystemDumpTest, RoundTrip) {
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  const SparseSystem sys = Assemble(testing::WindowFrom(
      traj, 10, 3, NoiseConfig{}, VehicleParams::Reference()));
  const std::string text = FormatSystem(sys);
  EXPECT_EQ(text.substr(0, text.find('\n')), "12 6 23");
  std::istringstream in(text);
  const SparseSystem back = ParseSystem(in);
  EXPECT_EQ(back.nrows, sys.nrows);
  EXPECT_EQ(back.ncols, sys.ncols);
  ASSERT_EQ(back.entries.size(), sys.entries.size());
  for (std::size_t i = 0; i < sys.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].row, sys.entries[i].row);
    EXPECT_EQ(back.entries[i].col, sys.entries[i].col);
    EXPECT_EQ(back.entries[i].value, sys.entries[i].value);
  }
  EXPECT_EQ(back.rhs, sys.rhs);
  EXPECT_EQ(back.row_tags, sys.row_tags);
}

TEST(ConfigTest, ParsesKeyValuePairs) {
  std::istringstream in(
      "# scenario\nduration = 5\n\n  seed=7  # inline\nsteer = sine\n");
  const auto kv = ParseConfig(in);
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"duration", "5"}));
  EXPECT_EQ(kv[1], (std::pair<std::string, std::string>{"seed", "7"}));
  EXPECT_EQ(kv[2], (std::pair<std::string, std::string>{"steer", "sine"}));

  std::istringstream bad("duration 5\n");
  EXPECT_THROW(ParseConfig(bad), IoError);
}

TEST(MetricsTest, ReportsDegrees) {
  MetricsReport report;
  report.mode = "fg-sliding";
  report.window = 5;
  report.samples = 2000;
  report.rmse = Rmse{0.57 / kRadToDeg, 0.27 / kRadToDeg};
  const std::string text = FormatMetrics(report);
  EXPECT_NE(text.find("mode = fg-sliding\n"), std::string::npos);
  EXPECT_NE(text.find("window = 5\n"), std::string::npos);
  EXPECT_NE(text.find("rmse_beta_deg = 0.57"), std::string::npos) << text;
  EXPECT_NE(text.find("sigma_yaw_rate = 1e-08\n"), std::string::npos) << text;

  report.rmse.reset();
  EXPECT_NE(FormatMetrics(report).find("rmse_beta_deg = unavailable"),
            std::string::npos);
}

TEST(EvalReportTest, RelativeImprovement) {
  const EvalEntry entries[] = {
      {"fg", Rmse{0.57 / kRadToDeg, 0.27 / kRadToDeg}},
      {"kf", Rmse{0.87 / kRadToDeg, 0.30 / kRadToDeg}},
  };
  const std::string text = FormatEvalReport(entries);
  EXPECT_NE(text.find("fg vs kf: rmse_beta 0.5700 deg vs 0.8700 deg, 34% improvement over kf"),
            std::string::npos)
      << text;

  const EvalEntry reversed[] = {entries[1], entries[0]};
  EXPECT_NE(FormatEvalReport(reversed).find("53% degradation over fg"),
            std::string::npos);
}

TEST(FileTest, AtomicWriteAndRead) {
  const fs::path dir = fs::temp_directory_path() / "sideslip_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "out.txt").string();
  WriteFileAtomic(path, "first\n");
  WriteFileAtomic(path, "second\n");
  EXPECT_EQ(ReadFile(path), "second\n");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1u);
  EXPECT_THROW(ReadFile((dir / "missing.csv").string()), IoError);
  EXPECT_THROW(WriteFileAtomic((dir / "no" / "such" / "x").string(), ""), IoError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace sideslip::io
