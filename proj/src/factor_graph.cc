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

#include "sideslip/factor_graph.h"

#include <cmath>
#include <set>
#include <string>

namespace sideslip {

int Arity(FactorKind kind) {
  switch (kind) {
    case FactorKind::kPriorBeta:
    case FactorKind::kPriorR:
    case FactorKind::kMeasYawRate:
      return 1;
    case FactorKind::kMeasLatAccel:
      return 2;
    case FactorKind::kDynBeta:
    case FactorKind::kDynR:
      return 3;
  }
  return 0;
}

std::string_view ToString(FactorKind kind) {
  switch (kind) {
    case FactorKind::kPriorBeta: return "prior_beta";
    case FactorKind::kPriorR: return "prior_r";
    case FactorKind::kDynBeta: return "dyn_beta";
    case FactorKind::kDynR: return "dyn_r";
    case FactorKind::kMeasYawRate: return "meas_yaw_rate";
    case FactorKind::kMeasLatAccel: return "meas_lat_accel";
  }
  return "unknown";
}

void NoiseConfig::Validate() const {
  const std::pair<double, const char*> fields[] = {
      {sigma_beta, "sigma_beta"},         {sigma_r, "sigma_r"},
      {sigma_yaw_rate, "sigma_yaw_rate"}, {sigma_ay, "sigma_ay"},
      {sigma_prior_beta, "sigma_prior_beta"},
      {sigma_prior_r, "sigma_prior_r"}};
  for (const auto& [value, name] : fields) {
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw PreconditionError(std::string(name) + " must be finite and > 0");
    }
  }
}

double NoiseConfig::SigmaFor(FactorKind kind) const {
  switch (kind) {
    case FactorKind::kPriorBeta: return sigma_prior_beta;
    case FactorKind::kPriorR: return sigma_prior_r;
    case FactorKind::kDynBeta: return sigma_beta;
    case FactorKind::kDynR: return sigma_r;
    case FactorKind::kMeasYawRate: return sigma_yaw_rate;
    case FactorKind::kMeasLatAccel: return sigma_ay;
  }
  return 1.0;
}

void SparseSystem::Validate() const {
  if (rhs.size() != nrows) {
    throw AssemblyError("rhs length " + std::to_string(rhs.size()) +
                        " != nrows " + std::to_string(nrows));
  }
  if (!row_tags.empty() && row_tags.size() != nrows) {
    throw AssemblyError("row tag count does not match nrows");
  }
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const Triplet& t : entries) {
    if (t.row >= nrows || t.col >= ncols) {
      throw AssemblyError("entry (" + std::to_string(t.row) + ", " +
                          std::to_string(t.col) + ") out of bounds");
    }
    if (!seen.emplace(t.row, t.col).second) {
      throw AssemblyError("duplicate entry (" + std::to_string(t.row) + ", " +
                          std::to_string(t.col) + ")");
    }
  }
}

Eigen::MatrixXd SparseSystem::Dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nrows),
                                            static_cast<Eigen::Index>(ncols));
  for (const Triplet& t : entries) {
    a(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) +=
        t.value;
  }
  return a;
}

double ResidualDynBeta(const State& prev, const State& cur,
                       const Sample& sample_prev, double dt,
                       const VehicleParams& p) {
  return cur.beta -
         StepDynamics(prev, sample_prev.u, sample_prev.delta, dt, p).beta;
}

double ResidualDynR(const State& prev, const State& cur,
                    const Sample& sample_prev, double dt,
                    const VehicleParams& p) {
  return cur.r - StepDynamics(prev, sample_prev.u, sample_prev.delta, dt, p).r;
}

double ResidualMeasYaw(const State& cur, const Sample& sample) {
  return sample.yaw_rate - PredictYawRate(cur);
}

double ResidualMeasAy(const State& cur, const Sample& sample,
                      const VehicleParams& p) {
  return sample.ay - PredictLatAccel(cur, sample.u, sample.delta, p);
}

std::pair<double, double> ResidualPrior(const State& first, const State& guess) {
  return {first.beta - guess.beta, first.r - guess.r};
}

DynBlock DynJacobianBlock(double u_prev, double u_cur, double dt,
                          const VehicleParams& p) {
  // d(cur - F prev - g delta) / d(prev, cur) = [-F | I]
  const DiscreteTransition tr = Transition(u_prev, dt, p);
  const LatAccelGains ay = LatAccelCoefficients(u_cur, p);
  DynBlock h;
  h << -tr.f[0], -tr.f[1], 1.0, 0.0,
       -tr.f[2], -tr.f[3], 0.0, 1.0,
       0.0, 0.0, 0.0, -1.0,
       0.0, 0.0, -ay.beta, -ay.r;
  return h;
}

PriorBlock PriorJacobianBlock(double u, const VehicleParams& p) {
  const LatAccelGains ay = LatAccelCoefficients(u, p);
  PriorBlock h;
  h << 1.0, 0.0,
       0.0, 1.0,
       0.0, -1.0,
       -ay.beta, -ay.r;
  return h;
}

WhitenedRows Whiten(const Eigen::MatrixXd& block, const Eigen::VectorXd& rhs,
                    std::span<const FactorKind> kinds, const NoiseConfig& noise) {
  noise.Validate();
  if (static_cast<std::size_t>(block.rows()) != kinds.size() ||
      rhs.size() != block.rows()) {
    throw PreconditionError("whiten: block, rhs and row kinds disagree in size");
  }
  WhitenedRows out{block, rhs};
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    const double w = 1.0 / noise.SigmaFor(kinds[i]);
    const auto row = static_cast<Eigen::Index>(i);
    out.block.row(row) *= w;
    out.rhs(row) *= w;
  }
  return out;
}

namespace {

// Structural occupancy of the two block kinds. Entries on this pattern are
// always emitted, even when their numerical value happens to be zero.
constexpr bool kPriorPattern[4][2] = {
    {true, false}, {false, true}, {false, true}, {true, true}};
constexpr bool kDynPattern[4][4] = {{true, true, true, false},
                                    {true, true, false, true},
                                    {false, false, false, true},
                                    {false, false, true, true}};

void AppendRows(SparseSystem& sys, const Eigen::MatrixXd& block,
                const Eigen::VectorXd& rhs, std::span<const FactorKind> kinds,
                std::size_t row0, std::size_t col0, const bool* pattern) {
  const auto ncols = static_cast<std::size_t>(block.cols());
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < ncols; ++j) {
      if (!pattern[i * ncols + j]) continue;
      sys.entries.push_back(
          {row0 + i, col0 + j,
           block(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))});
    }
    sys.rhs[row0 + i] = rhs(static_cast<Eigen::Index>(i));
    sys.row_tags[row0 + i] = kinds[i];
  }
}

}  // namespace

SparseSystem Assemble(const WindowProblem& problem) {
  const std::size_t n = problem.samples.size();
  if (n == 0) throw AssemblyError("cannot assemble an empty window");
  if (problem.linearization_states.size() != n) {
    throw AssemblyError("window has " + std::to_string(n) + " samples but " +
                        std::to_string(problem.linearization_states.size()) +
                        " linearization states");
  }
  problem.params.Validate();
  problem.noise.Validate();
  for (std::size_t k = 1; k < n; ++k) {
    const double t0 = problem.samples[k - 1].t;
    const double t1 = problem.samples[k].t;
    if (!(t1 > t0)) {
      throw AssemblyError("timestamps not strictly increasing at window step " +
                          std::to_string(k) + ": " + std::to_string(t0) +
                          " then " + std::to_string(t1));
    }
  }

  const auto& lin = problem.linearization_states;
  const auto& samples = problem.samples;
  const VehicleParams& p = problem.params;

  SparseSystem sys;
  sys.nrows = 4 * n;
  sys.ncols = 2 * n;
  sys.rhs.assign(sys.nrows, 0.0);
  sys.row_tags.assign(sys.nrows, FactorKind::kPriorBeta);
  sys.entries.reserve(5 + 9 * (n - 1));

  {
    const auto [eb, er] = ResidualPrior(lin[0], problem.prior_state);
    Eigen::Vector4d residual(eb, er, ResidualMeasYaw(lin[0], samples[0]),
                             ResidualMeasAy(lin[0], samples[0], p));
    const WhitenedRows w = Whiten(PriorJacobianBlock(samples[0].u, p),
                                  -residual, kPriorRowKinds, problem.noise);
    AppendRows(sys, w.block, w.rhs, kPriorRowKinds, 0, 0, &kPriorPattern[0][0]);
  }

  for (std::size_t k = 1; k < n; ++k) {
    const double dt = samples[k].t - samples[k - 1].t;
    Eigen::Vector4d residual(
        ResidualDynBeta(lin[k - 1], lin[k], samples[k - 1], dt, p),
        ResidualDynR(lin[k - 1], lin[k], samples[k - 1], dt, p),
        ResidualMeasYaw(lin[k], samples[k]),
        ResidualMeasAy(lin[k], samples[k], p));
    const WhitenedRows w =
        Whiten(DynJacobianBlock(samples[k - 1].u, samples[k].u, dt, p),
               -residual, kDynRowKinds, problem.noise);
    AppendRows(sys, w.block, w.rhs, kDynRowKinds, 4 * k, 2 * (k - 1),
               &kDynPattern[0][0]);
  }
  return sys;
}

}  // namespace sideslip
