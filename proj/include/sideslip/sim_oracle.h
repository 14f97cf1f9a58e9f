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

#ifndef SIDESLIP_SIM_ORACLE_H_
#define SIDESLIP_SIM_ORACLE_H_

#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "sideslip/estimators.h"
#include "sideslip/factor_graph.h"
#include "sideslip/vehicle_model.h"

namespace sideslip {

struct ConstantSteer {
  double value = 0.0;
};
struct SineSteer {
  double amplitude = 0.0;
  double period = 1.0;
};
// delta(t) = value of the last breakpoint with time <= t; 0 before the first.
struct StepSteer {
  std::vector<std::pair<double, double>> breakpoints;  // (time, value)
};
using SteeringProfile = std::variant<ConstantSteer, SineSteer, StepSteer>;

double SteeringAt(const SteeringProfile& profile, double t);

// Piecewise-constant speed: (start time, u). The first segment applies from
// t = 0 regardless of its start time.
struct SpeedProfile {
  std::vector<std::pair<double, double>> segments{{0.0, 20.0}};
  double At(double t) const;
};

struct SimConfig {
  VehicleParams params = VehicleParams::Reference();
  double duration = 20.0;  // [s]
  double dt = 0.01;        // [s]
  SpeedProfile speed;
  SteeringProfile steering = SineSteer{0.03, 4.0};
  double noise_yaw_rate = 1e-3;  // [rad/s]
  double noise_ay = 0.05;        // [m/s^2]
  std::uint64_t seed = 42;
  State initial_state;

  void Validate() const;
  // round(duration / dt) samples at t = k dt.
  std::size_t SampleCount() const;
  // 20 s at 100 Hz, 20 m/s, 0.03 rad sine steering with a 4 s period.
  static SimConfig DefaultScenario();
};

struct Trajectory {
  std::vector<Sample> samples;
  std::vector<State> truth;
};

Trajectory Simulate(const SimConfig& cfg);

// Standard normal draws via Box-Muller over a 64-bit Mersenne Twister, so a
// seed gives the same stream on every platform.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}
  double Next();

 private:
  double Uniform();  // (0, 1)
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Densifies A and solves the normal equations with a dense LDL^T.
std::vector<double> DenseLsOracle(const SparseSystem& sys);

// Forward Kalman pass followed by a Rauch-Tung-Striebel backward pass over
// the same model and noise as the factor-graph batch problem.
EstimateSeries RtsSmootherOracle(std::span<const Sample> samples,
                                 const SmootherConfig& cfg);

}  // namespace sideslip

#endif  // SIDESLIP_SIM_ORACLE_H_
