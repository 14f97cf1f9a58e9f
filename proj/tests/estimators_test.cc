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

#include "sideslip/estimators.h"

#include <gtest/gtest.h>

#include <cmath>
#include <string>

#include "sideslip/sim_oracle.h"
#include "test_support.h"

namespace sideslip {
namespace {

SmootherConfig Smoother(std::size_t window, const NoiseConfig& noise) {
  SmootherConfig cfg;
  cfg.window_len = window;
  cfg.noise = noise;
  return cfg;
}

std::vector<double> Betas(const std::vector<State>& states) {
  std::vector<double> out;
  for (const State& s : states) out.push_back(s.beta);
  return out;
}

TEST(FixedLagTest, SingleSampleWindowIsFinite) {
  SimConfig sim = SimConfig::DefaultScenario();
  sim.duration = 2.0;
  const Trajectory traj = Simulate(sim);
  const EstimateSeries est =
      RunFixedLag(traj.samples, Smoother(1, testing::MatchedNoise()));
  ASSERT_EQ(est.size(), traj.samples.size());
  for (const State& s : est.states) EXPECT_TRUE(s.IsFinite());
  EXPECT_EQ(est.mode, EstimateMode::kFgSliding);
  EXPECT_NO_THROW(est.Validate());
}

TEST(FixedLagTest, RecoversNoiseFreeTruth) {
  const Trajectory traj =
      Simulate(testing::NoiseFree(SimConfig::DefaultScenario()));
  for (std::size_t m : {1u, 2u, 5u}) {
    const EstimateSeries est =
        RunFixedLag(traj.samples, Smoother(m, testing::MatchedNoise()));
    for (std::size_t k = 0; k < traj.truth.size(); ++k) {
      ASSERT_NEAR(est.states[k].beta, traj.truth[k].beta, 1e-6)
          << "M=" << m << " step " << k;
    }
  }
}

TEST(FixedLagTest, PriorCarriesOverBitExactly) {
  SimConfig sim = SimConfig::DefaultScenario();
  sim.duration = 1.0;
  const Trajectory traj = Simulate(sim);
  for (std::size_t m : {2u, 5u}) {
    FixedLagTrace trace;
    RunFixedLag(traj.samples, Smoother(m, testing::MatchedNoise()), &trace);
    ASSERT_EQ(trace.priors.size(), traj.samples.size());
    for (std::size_t w = 1; w < trace.priors.size(); ++w) {
      if (trace.window_start[w] == trace.window_start[w - 1]) {
        EXPECT_EQ(trace.priors[w], trace.priors[w - 1]);
        continue;
      }
      const std::size_t offset = trace.window_start[w] - trace.window_start[w - 1];
      EXPECT_EQ(trace.priors[w], trace.estimates[w - 1][offset]) << "window " << w;
    }
  }
}

TEST(FixedLagTest, FrozenStatesComeFromLastContainingWindow) {
  SimConfig sim = SimConfig::DefaultScenario();
  sim.duration = 0.5;
  const Trajectory traj = Simulate(sim);
  FixedLagTrace trace;
  const EstimateSeries est =
      RunFixedLag(traj.samples, Smoother(5, testing::MatchedNoise()), &trace);
  const std::size_t n = traj.samples.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t last_window = std::min(n - 1, k + 4);
    const std::size_t offset = k - trace.window_start[last_window];
    EXPECT_EQ(est.states[k], trace.estimates[last_window][offset]);
    EXPECT_EQ(est.meta[k].window_id, static_cast<long>(last_window));
  }
}

TEST(FixedLagTest, WindowOfFiveTracksBatch) {
  // seed 42 default scenario
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  const SmootherConfig cfg = Smoother(5, testing::MatchedNoise());
  const Rmse sliding = ComputeRmse(RunFixedLag(traj.samples, cfg), traj.truth);
  const Rmse batch = ComputeRmse(RunBatch(traj.samples, cfg), traj.truth);
  EXPECT_LE(sliding.beta, 1.25 * batch.beta);
}

TEST(FixedLagTest, Errors) {
  EXPECT_THROW(RunFixedLag({}, Smoother(5, NoiseConfig{})), PreconditionError);
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  EXPECT_THROW(RunFixedLag(traj.samples, Smoother(0, NoiseConfig{})),
               PreconditionError);
  std::vector<Sample> bad(traj.samples.begin(), traj.samples.begin() + 10);
  bad[4].u = 0.0;
  EXPECT_THROW(RunFixedLag(bad, Smoother(5, NoiseConfig{})), PreconditionError);
}

TEST(BatchTest, EqualsFixedLagWithFullWindow) {
  SimConfig sim = SimConfig::DefaultScenario();
  sim.duration = 0.6;
  const Trajectory traj = Simulate(sim);
  const auto cfg = Smoother(traj.samples.size(), testing::MatchedNoise());
  const EstimateSeries batch = RunBatch(traj.samples, cfg);
  const EstimateSeries sliding = RunFixedLag(traj.samples, cfg);
  for (std::size_t k = 0; k < batch.size(); ++k) {
    EXPECT_NEAR(batch.states[k].beta, sliding.states[k].beta, 1e-12);
    EXPECT_NEAR(batch.states[k].r, sliding.states[k].r, 1e-12);
  }
}

TEST(BatchTest, RecoversNoiseFreeTruth) {
  const Trajectory traj =
      Simulate(testing::NoiseFree(SimConfig::DefaultScenario()));
  const EstimateSeries est =
      RunBatch(traj.samples, Smoother(5, testing::MatchedNoise()));
  for (std::size_t k = 0; k < traj.truth.size(); ++k) {
    ASSERT_NEAR(est.states[k].beta, traj.truth[k].beta, 1e-6) << "step " << k;
  }
  EXPECT_EQ(est.meta.front().window_id, 0);
}

TEST(BatchTest, ThreeSamples) {
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  const std::vector<Sample> three(traj.samples.begin(), traj.samples.begin() + 3);
  const EstimateSeries est = RunBatch(three, Smoother(5, testing::MatchedNoise()));
  EXPECT_EQ(est.size(), 3u);
  EXPECT_EQ(est.meta[0].iterations, 2);
}

TEST(KalmanTest, StationaryStaysAtZero) {
  std::vector<Sample> samples(50);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    samples[k].t = 0.01 * static_cast<double>(k);
    samples[k].u = 20.0;
  }
  const EstimateSeries est = RunKf(
      samples, KfConfig::FromNoise(NoiseConfig{}, State{}, VehicleParams::Reference()));
  for (const State& s : est.states) {
    EXPECT_EQ(s.beta, 0.0);
    EXPECT_EQ(s.r, 0.0);
  }
  EXPECT_EQ(est.mode, EstimateMode::kKf);
}

TEST(KalmanTest, YawRateFollowsGyroscope) {
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  const EstimateSeries est =
      RunKf(traj.samples, KfConfig::FromNoise(testing::MatchedNoise(), State{},
                                             VehicleParams::Reference()));
  double worst = 0.0;
  for (std::size_t k = 0; k < est.size(); ++k) {
    worst = std::max(worst, std::abs(est.states[k].r - traj.samples[k].yaw_rate));
  }
  // Gyroscope sigma is 1e-3 rad/s.
  EXPECT_LT(worst, 5e-3);
}

TEST(KalmanTest, DoesNotBeatBatchOnDefaultScenario) {
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  const NoiseConfig noise;
  const Rmse kf = ComputeRmse(
      RunKf(traj.samples, KfConfig::FromNoise(noise, State{}, VehicleParams::Reference())),
      traj.truth);
  const Rmse batch = ComputeRmse(RunBatch(traj.samples, Smoother(5, noise)), traj.truth);
  EXPECT_GE(kf.beta, batch.beta - 1e-12);
}

TEST(KalmanTest, DivergenceReportsStep) {
  const Trajectory traj = Simulate(SimConfig::DefaultScenario());
  KfConfig cfg = KfConfig::FromNoise(NoiseConfig{}, State{}, VehicleParams::Reference());
  cfg.q_beta = 1e308;
  cfg.p0_beta = 1e308;
  try {
    RunKf(traj.samples, cfg);
    FAIL() << "expected EstimationError";
  } catch (const EstimationError& e) {
    EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
  }
}

TEST(RmseTest, Examples) {
  EstimateSeries est;
  est.states = {{0.1, 0.2}, {0.3, -0.1}, {0.0, 0.0}, {-0.2, 0.5}};
  est.times = {0, 1, 2, 3};
  est.meta.resize(4);
  const Rmse zero = ComputeRmse(est, est.states);
  EXPECT_EQ(zero.beta, 0.0);
  EXPECT_EQ(zero.r, 0.0);

  std::vector<State> offset = est.states;
  for (State& s : offset) s.beta -= 0.01;
  EXPECT_NEAR(ComputeRmse(est, offset).beta, 0.01, 1e-15);

  std::vector<State> alternating = est.states;
  for (std::size_t k = 0; k < alternating.size(); ++k) {
    alternating[k].r += (k % 2 == 0 ? 0.05 : -0.05);
  }
  EXPECT_NEAR(ComputeRmse(est, alternating).r, 0.05, 1e-15);

  alternating.pop_back();
  EXPECT_THROW(ComputeRmse(est, alternating), PreconditionError);
}

TEST(DeterminismTest, RepeatedRunsAreBitIdentical) {
  SimConfig sim = SimConfig::DefaultScenario();
  sim.duration = 3.0;
  const Trajectory traj = Simulate(sim);
  const auto cfg = Smoother(5, testing::MatchedNoise());
  EXPECT_EQ(Betas(RunFixedLag(traj.samples, cfg).states),
            Betas(RunFixedLag(traj.samples, cfg).states));
  EXPECT_EQ(Betas(RunBatch(traj.samples, cfg).states),
            Betas(RunBatch(traj.samples, cfg).states));
  const KfConfig kf =
      KfConfig::FromNoise(cfg.noise, State{}, VehicleParams::Reference());
  EXPECT_EQ(Betas(RunKf(traj.samples, kf).states), Betas(RunKf(traj.samples, kf).states));
}

}  // namespace
}  // namespace sideslip
