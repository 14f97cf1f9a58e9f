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

#ifndef SIDESLIP_VEHICLE_MODEL_H_
#define SIDESLIP_VEHICLE_MODEL_H_

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

namespace sideslip {

// Thrown when an operation is called outside its domain (u <= 0, dt <= 0,
// non-finite state, invalid parameters).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Physical constants of the linear single-track model.
struct VehicleParams {
  double mass = 0.0;         // [kg]
  double yaw_inertia = 0.0;  // Jz [kg m^2]
  double cf = 0.0;           // front cornering stiffness [N/rad]
  double cr = 0.0;           // rear cornering stiffness [N/rad]
  double lf = 0.0;           // CoG to front axle [m]
  double lr = 0.0;           // CoG to rear axle [m]

  // Throws PreconditionError unless every field is finite and positive.
  void Validate() const;

  // Mid-size passenger car used throughout the tests and the shipped
  // scenario: m=1500, Jz=2500, Cf=Cr=80000, lf=1.1, lr=1.6.
  static VehicleParams Reference();
};

// The two degrees of freedom at one time step.
struct State {
  double beta = 0.0;  // sideslip angle [rad]
  double r = 0.0;     // yaw rate [rad/s]

  bool IsFinite() const;
  friend bool operator==(const State&, const State&) = default;
};

// One time-stamped measurement row.
struct Sample {
  double t = 0.0;         // [s]
  double u = 0.0;         // longitudinal speed [m/s]
  double delta = 0.0;     // front steering angle [rad]
  double yaw_rate = 0.0;  // measured yaw rate [rad/s]
  double ay = 0.0;        // measured lateral acceleration [m/s^2]
  std::optional<double> beta_gt;  // ground-truth sideslip [rad]
};

// Continuous-time rates (beta_dot, r_dot) of the single-track model written
// in (beta, r) coordinates. Does not check its arguments beyond u != 0.
State ContinuousRates(const State& s, double u, double delta,
                      const VehicleParams& p);

// Forward-Euler step from t_{k-1} to t_k = t_{k-1} + dt using the speed and
// steering of the previous sample.
State StepDynamics(const State& prev, double u_prev, double delta_prev,
                   double dt, const VehicleParams& p);

// Linear form of StepDynamics: x_k = F x_{k-1} + g * delta_{k-1}.
// F is stored row-major.
struct DiscreteTransition {
  std::array<double, 4> f{};
  std::array<double, 2> g{};
};
DiscreteTransition Transition(double u_prev, double dt, const VehicleParams& p);

// a_y = ay_beta * beta + ay_r * r + ay_delta * delta at speed u.
struct LatAccelGains {
  double beta = 0.0;
  double r = 0.0;
  double delta = 0.0;
};
LatAccelGains LatAccelCoefficients(double u, const VehicleParams& p);

// Predicted lateral acceleration at the current sample.
double PredictLatAccel(const State& s, double u, double delta,
                       const VehicleParams& p);

// The gyroscope observes r directly.
inline double PredictYawRate(const State& s) { return s.r; }

// Small-angle inversion v = beta * u.
double LateralVelocity(const State& s, double u);

// Equilibrium of the continuous dynamics for constant u and delta.
State SteadyState(double u, double delta, const VehicleParams& p);

}  // namespace sideslip

#endif  // SIDESLIP_VEHICLE_MODEL_H_
