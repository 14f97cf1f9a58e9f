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

#include "sideslip/vehicle_model.h"

#include <cmath>

namespace sideslip {
namespace {

void RequirePositive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw PreconditionError(std::string(what) + " must be finite and > 0, got " +
                            std::to_string(value));
  }
}

}  // namespace

void VehicleParams::Validate() const {
  RequirePositive(mass, "mass");
  RequirePositive(yaw_inertia, "yaw inertia");
  RequirePositive(cf, "front cornering stiffness");
  RequirePositive(cr, "rear cornering stiffness");
  RequirePositive(lf, "lf");
  RequirePositive(lr, "lr");
}

VehicleParams VehicleParams::Reference() {
  return VehicleParams{1500.0, 2500.0, 80000.0, 80000.0, 1.1, 1.6};
}

bool State::IsFinite() const { return std::isfinite(beta) && std::isfinite(r); }

// beta_dot = -(Cf+Cr)/(m u) beta - ((Cf lf - Cr lr)/(m u^2) + 1) r + Cf/(m u) delta
// r_dot    = -(Cf lf - Cr lr)/Jz beta - (Cf lf^2 + Cr lr^2)/(Jz u) r + Cf lf/Jz delta
//
// The r_dot damping term carries r explicitly. Some printed forms of the
// continuous model drop it; it is required dimensionally.
State ContinuousRates(const State& s, double u, double delta,
                      const VehicleParams& p) {
  const double sum_c = p.cf + p.cr;
  const double moment = p.cf * p.lf - p.cr * p.lr;
  const double inertia_term = p.cf * p.lf * p.lf + p.cr * p.lr * p.lr;
  State rates;
  rates.beta = -sum_c / (p.mass * u) * s.beta -
               (moment / (p.mass * u * u) + 1.0) * s.r +
               p.cf * delta / (p.mass * u);
  rates.r = -moment / p.yaw_inertia * s.beta -
            inertia_term / (p.yaw_inertia * u) * s.r +
            p.cf * p.lf * delta / p.yaw_inertia;
  return rates;
}

State StepDynamics(const State& prev, double u_prev, double delta_prev,
                   double dt, const VehicleParams& p) {
  RequirePositive(u_prev, "speed u_{k-1}");
  RequirePositive(dt, "time step dt");
  if (!prev.IsFinite()) throw PreconditionError("previous state is not finite");
  const State rates = ContinuousRates(prev, u_prev, delta_prev, p);
  return State{prev.beta + dt * rates.beta, prev.r + dt * rates.r};
}

DiscreteTransition Transition(double u_prev, double dt, const VehicleParams& p) {
  RequirePositive(u_prev, "speed u_{k-1}");
  RequirePositive(dt, "time step dt");
  const double sum_c = p.cf + p.cr;
  const double moment = p.cf * p.lf - p.cr * p.lr;
  const double inertia_term = p.cf * p.lf * p.lf + p.cr * p.lr * p.lr;
  DiscreteTransition tr;
  tr.f = {1.0 - dt * sum_c / (p.mass * u_prev),
          -dt * (moment / (p.mass * u_prev * u_prev) + 1.0),
          -dt * moment / p.yaw_inertia,
          1.0 - dt * inertia_term / (p.yaw_inertia * u_prev)};
  tr.g = {dt * p.cf / (p.mass * u_prev), dt * p.cf * p.lf / p.yaw_inertia};
  return tr;
}

LatAccelGains LatAccelCoefficients(double u, const VehicleParams& p) {
  RequirePositive(u, "speed u_k");
  return LatAccelGains{-(p.cf + p.cr) / p.mass,
                       -(p.cf * p.lf - p.cr * p.lr) / (p.mass * u),
                       p.cf / p.mass};
}

double PredictLatAccel(const State& s, double u, double delta,
                       const VehicleParams& p) {
  const LatAccelGains k = LatAccelCoefficients(u, p);
  return k.beta * s.beta + k.r * s.r + k.delta * delta;
}

double LateralVelocity(const State& s, double u) {
  RequirePositive(u, "speed u");
  return s.beta * u;
}

State SteadyState(double u, double delta, const VehicleParams& p) {
  RequirePositive(u, "speed u");
  // Rates are affine in (beta, r): rates = J x + b delta. Solve J x = -b delta.
  const State col_beta = ContinuousRates(State{1.0, 0.0}, u, 0.0, p);
  const State col_r = ContinuousRates(State{0.0, 1.0}, u, 0.0, p);
  const State forcing = ContinuousRates(State{}, u, delta, p);
  const double det = col_beta.beta * col_r.r - col_r.beta * col_beta.r;
  if (std::abs(det) < 1e-300) {
    throw PreconditionError("single-track dynamics are singular at this speed");
  }
  return State{(-forcing.beta * col_r.r + col_r.beta * forcing.r) / det,
               (-col_beta.beta * forcing.r + forcing.beta * col_beta.r) / det};
}

}  // namespace sideslip
