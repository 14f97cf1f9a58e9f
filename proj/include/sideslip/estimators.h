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

#ifndef SIDESLIP_ESTIMATORS_H_
#define SIDESLIP_ESTIMATORS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sideslip/factor_graph.h"
#include "sideslip/solver.h"
#include "sideslip/vehicle_model.h"

namespace sideslip {

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EstimateMode { kFgSliding, kFgBatch, kKf, kRts };

std::string_view ToString(EstimateMode mode);
std::optional<EstimateMode> ParseEstimateMode(std::string_view name);

struct StepMeta {
  long window_id = -1;  // window that finalized this step; -1 for filters
  int iterations = 0;   // Gauss-Newton iterations of that window
};

struct EstimateSeries {
  EstimateMode mode = EstimateMode::kFgBatch;
  std::vector<double> times;
  std::vector<State> states;
  std::vector<StepMeta> meta;

  std::size_t size() const { return states.size(); }
  // Equal lengths, strictly increasing times.
  void Validate() const;
};

struct SmootherConfig {
  std::size_t window_len = 5;
  NoiseConfig noise;
  State initial_state;
  VehicleParams params = VehicleParams::Reference();
  GaussNewtonOptions solver;
};

struct KfConfig {
  // Diagonals of the process, measurement and initial covariances.
  double q_beta = 1e-10;
  double q_r = 1e-8;
  double r_yaw_rate = 1e-16;
  double r_ay = 1e-4;
  double p0_beta = 1e-6;
  double p0_r = 1e-6;
  State initial_state;
  VehicleParams params = VehicleParams::Reference();

  void Validate() const;
  // Squares the sigmas of a factor-graph noise model so both estimators see
  // the same uncertainty.
  static KfConfig FromNoise(const NoiseConfig& noise, const State& initial,
                            const VehicleParams& params);
};

// Per-window record of a fixed-lag run, for inspection and tests.
struct FixedLagTrace {
  std::vector<std::size_t> window_start;
  std::vector<State> priors;
  std::vector<std::vector<State>> estimates;
};

// Fixed-lag smoother. Window w ends at sample w and holds at most
// window_len samples; a sample is frozen at the estimate of the last window
// that contains it. The first state of each window is anchored by a prior
// whose guess is the previous window's estimate of that state (with
// window_len == 1, that estimate pushed one step through the dynamics).
EstimateSeries RunFixedLag(std::span<const Sample> samples,
                           const SmootherConfig& cfg,
                           FixedLagTrace* trace = nullptr);

// One Gauss-Newton solve over the whole trajectory.
EstimateSeries RunBatch(std::span<const Sample> samples,
                        const SmootherConfig& cfg);

// Linear Kalman filter on the same discrete model and measurements.
EstimateSeries RunKf(std::span<const Sample> samples, const KfConfig& cfg);

struct Rmse {
  double beta = 0.0;  // [rad]
  double r = 0.0;     // [rad/s]
};

Rmse ComputeRmse(const EstimateSeries& est, std::span<const State> truth);

// Checks u > 0, finite fields and strictly increasing time.
void ValidateTrajectory(std::span<const Sample> samples);

}  // namespace sideslip

#endif  // SIDESLIP_ESTIMATORS_H_
