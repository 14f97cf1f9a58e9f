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

#ifndef SIDESLIP_TESTS_TEST_SUPPORT_H_
#define SIDESLIP_TESTS_TEST_SUPPORT_H_

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "sideslip/factor_graph.h"
#include "sideslip/sim_oracle.h"
#include "sideslip/solver.h"
#include "sideslip/vehicle_model.h"

namespace sideslip::testing {

// Noise matched to the default simulated sensors.
inline NoiseConfig MatchedNoise() {
  NoiseConfig n;
  n.sigma_beta = 1e-5;
  n.sigma_r = 1e-4;
  n.sigma_yaw_rate = 1e-3;
  n.sigma_ay = 0.05;
  n.sigma_prior_beta = 1e-5;
  n.sigma_prior_r = 1e-4;
  return n;
}

inline SimConfig NoiseFree(SimConfig cfg) {
  cfg.noise_yaw_rate = 0.0;
  cfg.noise_ay = 0.0;
  return cfg;
}

// Window of n consecutive samples from a trajectory, linearized at
// `linearization` (defaults to the truth).
inline WindowProblem WindowFrom(const Trajectory& traj, std::size_t begin,
                                std::size_t n, const NoiseConfig& noise,
                                const VehicleParams& params) {
  WindowProblem w;
  w.params = params;
  w.noise = noise;
  w.prior_state = traj.truth[begin];
  w.samples.assign(traj.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                   traj.samples.begin() + static_cast<std::ptrdiff_t>(begin + n));
  w.linearization_states.assign(
      traj.truth.begin() + static_cast<std::ptrdiff_t>(begin),
      traj.truth.begin() + static_cast<std::ptrdiff_t>(begin + n));
  return w;
}

// Random window: random speeds, steering, measurements, prior and
// linearization point.
inline WindowProblem RandomWindow(std::mt19937_64& rng, std::size_t n,
                                  const NoiseConfig& noise) {
  std::uniform_real_distribution<double> speed(5.0, 40.0);
  std::uniform_real_distribution<double> angle(-0.05, 0.05);
  std::uniform_real_distribution<double> rate(-0.5, 0.5);
  std::uniform_real_distribution<double> accel(-5.0, 5.0);
  std::uniform_real_distribution<double> step(0.005, 0.02);
  WindowProblem w;
  w.params = VehicleParams::Reference();
  w.noise = noise;
  w.prior_state = State{angle(rng), rate(rng)};
  double t = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    Sample s;
    s.t = t;
    t += step(rng);
    s.u = speed(rng);
    s.delta = angle(rng);
    s.yaw_rate = rate(rng);
    s.ay = accel(rng);
    w.samples.push_back(s);
    w.linearization_states.push_back(State{angle(rng), rate(rng)});
  }
  return w;
}

// Random tall system with a guaranteed full-rank, well-conditioned part.
inline SparseSystem RandomSystem(std::mt19937_64& rng, std::size_t nrows,
                                 std::size_t ncols, double density = 0.4) {
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SparseSystem sys;
  sys.nrows = nrows;
  sys.ncols = ncols;
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (std::size_t j = 0; j < ncols; ++j) {
    sys.entries.push_back({j, j, 2.0 + unit(rng)});
    used.emplace(j, j);
  }
  for (std::size_t i = 0; i < nrows; ++i) {
    for (std::size_t j = 0; j < ncols; ++j) {
      if (used.count({i, j}) != 0 || unit(rng) > density) continue;
      sys.entries.push_back({i, j, 0.5 * value(rng)});
      used.emplace(i, j);
    }
  }
  for (std::size_t i = 0; i < nrows; ++i) sys.rhs.push_back(value(rng));
  return sys;
}

inline double MaxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Normal-equation residual scaled by |A|^T (|A||x| + |b|), the size of its own
// rounding floor. Physically whitened windows carry weights near 1e5, so an
// absolute threshold measures arithmetic rather than the solver.
inline double RelativeStationarity(const SparseSystem& sys,
                                   const std::vector<double>& x) {
  std::vector<double> mag(sys.nrows, 0.0);
  for (std::size_t i = 0; i < sys.nrows; ++i) mag[i] = std::abs(sys.rhs[i]);
  for (const Triplet& t : sys.entries) mag[t.row] += std::abs(t.value * x[t.col]);
  std::vector<double> scale(sys.ncols, 0.0);
  for (const Triplet& t : sys.entries) scale[t.col] += std::abs(t.value) * mag[t.row];
  const std::vector<double> g = NormalResidual(sys, x);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (scale[j] > 0.0) worst = std::max(worst, std::abs(g[j]) / scale[j]);
  }
  return worst;
}

// Residual vector of one dynamic step as a function of
// (beta_{k-1}, r_{k-1}, beta_k, r_k).
inline Eigen::Vector4d DynResiduals(const Eigen::Vector4d& x, const Sample& prev,
                                    const Sample& cur, const VehicleParams& p) {
  const State a{x(0), x(1)};
  const State b{x(2), x(3)};
  const double dt = cur.t - prev.t;
  return Eigen::Vector4d(ResidualDynBeta(a, b, prev, dt, p),
                         ResidualDynR(a, b, prev, dt, p), ResidualMeasYaw(b, cur),
                         ResidualMeasAy(b, cur, p));
}

// Residual vector of the first window step as a function of (beta_1, r_1).
inline Eigen::Vector4d PriorResiduals(const Eigen::Vector2d& x, const State& guess,
                                      const Sample& s, const VehicleParams& p) {
  const State first{x(0), x(1)};
  const auto [eb, er] = ResidualPrior(first, guess);
  return Eigen::Vector4d(eb, er, ResidualMeasYaw(first, s),
                         ResidualMeasAy(first, s, p));
}

template <int N, typename F>
Eigen::Matrix<double, 4, N> CentralDifference(F&& f,
                                              const Eigen::Matrix<double, N, 1>& x,
                                              double h) {
  Eigen::Matrix<double, 4, N> jac;
  for (int j = 0; j < N; ++j) {
    Eigen::Matrix<double, N, 1> hi = x;
    Eigen::Matrix<double, N, 1> lo = x;
    hi(j) += h;
    lo(j) -= h;
    jac.col(j) = (f(hi) - f(lo)) / (2.0 * h);
  }
  return jac;
}

// max |a - b| / max(1, |b|) over all entries.
template <typename A, typename B>
double MaxRelativeError(const A& a, const B& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) /
                                  std::max(1.0, std::abs(b(i, j))));
    }
  }
  return worst;
}

}  // namespace sideslip::testing

#endif  // SIDESLIP_TESTS_TEST_SUPPORT_H_
