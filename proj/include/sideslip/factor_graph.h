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

#ifndef SIDESLIP_FACTOR_GRAPH_H_
#define SIDESLIP_FACTOR_GRAPH_H_

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "sideslip/vehicle_model.h"

namespace sideslip {

// Thrown by Assemble on malformed windows (empty, mismatched lengths,
// non-increasing timestamps).
class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FactorKind {
  kPriorBeta,
  kPriorR,
  kDynBeta,
  kDynR,
  kMeasYawRate,
  kMeasLatAccel,
};

// Number of scalar variables a factor of this kind connects.
int Arity(FactorKind kind);
std::string_view ToString(FactorKind kind);

// Standard deviations of every factor residual. Whitening divides each row
// by the sigma of its kind.
struct NoiseConfig {
  double sigma_beta = 1e-5;        // beta dynamics [rad]
  double sigma_r = 1e-4;           // r dynamics [rad/s]
  double sigma_yaw_rate = 1e-8;    // gyroscope [rad/s]
  double sigma_ay = 1e-2;          // lateral accelerometer [m/s^2]
  double sigma_prior_beta = 1e-5;  // [rad]
  double sigma_prior_r = 1e-4;     // [rad/s]

  void Validate() const;
  double SigmaFor(FactorKind kind) const;
};

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Whitened linear system A * delta ~= b in triplet form. Columns are
// interleaved [beta_1, r_1, beta_2, r_2, ...].
struct SparseSystem {
  std::size_t nrows = 0;
  std::size_t ncols = 0;
  std::vector<Triplet> entries;
  std::vector<double> rhs;
  std::vector<FactorKind> row_tags;

  // Checks bounds, rhs/tag lengths and that no (row, col) appears twice.
  void Validate() const;
  Eigen::MatrixXd Dense() const;
};

// One window of the estimation problem. linearization_states[i] is the point
// about which the correction for sample i is defined.
struct WindowProblem {
  VehicleParams params;
  NoiseConfig noise;
  State prior_state;
  std::vector<State> linearization_states;
  std::vector<Sample> samples;
};

// Every residual is oriented as observed minus predicted. For the dynamics
// factors the "observation" is the current state and the prediction is the
// forward-Euler step from the previous one.
double ResidualDynBeta(const State& prev, const State& cur,
                       const Sample& sample_prev, double dt,
                       const VehicleParams& p);
double ResidualDynR(const State& prev, const State& cur,
                    const Sample& sample_prev, double dt,
                    const VehicleParams& p);
double ResidualMeasYaw(const State& cur, const Sample& sample);
double ResidualMeasAy(const State& cur, const Sample& sample,
                      const VehicleParams& p);
std::pair<double, double> ResidualPrior(const State& first, const State& guess);

using DynBlock = Eigen::Matrix<double, 4, 4>;
using PriorBlock = Eigen::Matrix<double, 4, 2>;

// Jacobian of the residuals of one dynamic step, unwhitened.
//
//   rows    : DynBeta, DynR, MeasYawRate, MeasLatAccel
//   columns : beta_{k-1}, r_{k-1}, beta_k, r_k
//
//   [ -(1 - dt a11)   dt (ml/(m u^2) + 1)   1    0   ]
//   [  dt ml/Jz      -(1 - dt il/(Jz u))    0    1   ]
//   [  0              0                     0   -1   ]
//   [  0              0                    cs/m  ml/(m u_k) ]
//
// with cs = Cf+Cr, ml = Cf lf - Cr lr, il = Cf lf^2 + Cr lr^2,
// a11 = cs/(m u_{k-1}).
DynBlock DynJacobianBlock(double u_prev, double u_cur, double dt,
                          const VehicleParams& p);

// Jacobian of the first step of a window (prior + measurements), unwhitened.
//   rows: PriorBeta, PriorR, MeasYawRate, MeasLatAccel; columns: beta_1, r_1.
PriorBlock PriorJacobianBlock(double u, const VehicleParams& p);

inline constexpr FactorKind kDynRowKinds[4] = {
    FactorKind::kDynBeta, FactorKind::kDynR, FactorKind::kMeasYawRate,
    FactorKind::kMeasLatAccel};
inline constexpr FactorKind kPriorRowKinds[4] = {
    FactorKind::kPriorBeta, FactorKind::kPriorR, FactorKind::kMeasYawRate,
    FactorKind::kMeasLatAccel};

struct WhitenedRows {
  Eigen::MatrixXd block;
  Eigen::VectorXd rhs;
};

// Scales row i of block and rhs by 1 / sigma(kinds[i]).
WhitenedRows Whiten(const Eigen::MatrixXd& block, const Eigen::VectorXd& rhs,
                    std::span<const FactorKind> kinds, const NoiseConfig& noise);

// Builds the whitened (4n x 2n) system for an n-step window. The rhs is the
// negated whitened residual at the linearization point, so that the solution
// is the correction to add to linearization_states.
SparseSystem Assemble(const WindowProblem& problem);

}  // namespace sideslip

#endif  // SIDESLIP_FACTOR_GRAPH_H_
