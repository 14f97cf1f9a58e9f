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

#include "sideslip/sim_oracle.h"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "sideslip/solver.h"

namespace sideslip {

double SteeringAt(const SteeringProfile& profile, double t) {
  struct Visitor {
    double t;
    double operator()(const ConstantSteer& c) const { return c.value; }
    double operator()(const SineSteer& s) const {
      return s.amplitude * std::sin(2.0 * std::numbers::pi * t / s.period);
    }
    double operator()(const StepSteer& s) const {
      double value = 0.0;
      for (const auto& [when, v] : s.breakpoints) {
        if (when <= t) value = v;
      }
      return value;
    }
  };
  return std::visit(Visitor{t}, profile);
}

double SpeedProfile::At(double t) const {
  double u = segments.empty() ? 0.0 : segments.front().second;
  for (const auto& [start, value] : segments) {
    if (start <= t) u = value;
  }
  return u;
}

void SimConfig::Validate() const {
  params.Validate();
  if (!(dt > 0.0)) throw PreconditionError("simulation dt must be > 0");
  if (!(duration >= dt)) throw PreconditionError("duration must be >= dt");
  if (speed.segments.empty()) throw PreconditionError("speed profile is empty");
  for (const auto& [start, u] : speed.segments) {
    if (!(u > 0.0)) {
      throw PreconditionError("speed profile value " + std::to_string(u) +
                              " at t=" + std::to_string(start) + " is not > 0");
    }
  }
  if (const auto* sine = std::get_if<SineSteer>(&steering);
      sine != nullptr && !(sine->period > 0.0)) {
    throw PreconditionError("sine steering period must be > 0");
  }
  if (!(noise_yaw_rate >= 0.0) || !(noise_ay >= 0.0)) {
    throw PreconditionError("sensor noise must be >= 0");
  }
  if (!initial_state.IsFinite()) {
    throw PreconditionError("initial state must be finite");
  }
}

std::size_t SimConfig::SampleCount() const {
  return static_cast<std::size_t>(std::llround(duration / dt));
}

SimConfig SimConfig::DefaultScenario() { return SimConfig{}; }

double GaussianSource::Uniform() {
  // 53 random mantissa bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianSource::Next() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = Uniform();
  const double u2 = Uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

Trajectory Simulate(const SimConfig& cfg) {
  cfg.Validate();
  const std::size_t n = cfg.SampleCount();
  GaussianSource noise(cfg.seed);

  Trajectory out;
  out.samples.reserve(n);
  out.truth.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Sample s;
    s.t = static_cast<double>(k) * cfg.dt;
    s.u = cfg.speed.At(s.t);
    s.delta = SteeringAt(cfg.steering, s.t);

    State x = cfg.initial_state;
    if (k > 0) {
      const Sample& prev = out.samples.back();
      x = StepDynamics(out.truth.back(), prev.u, prev.delta, s.t - prev.t,
                       cfg.params);
    }
    const double yaw_noise = noise.Next();
    const double ay_noise = noise.Next();
    s.yaw_rate = PredictYawRate(x) + cfg.noise_yaw_rate * yaw_noise;
    s.ay = PredictLatAccel(x, s.u, s.delta, cfg.params) + cfg.noise_ay * ay_noise;
    s.beta_gt = x.beta;
    out.samples.push_back(s);
    out.truth.push_back(x);
  }
  return out;
}

std::vector<double> DenseLsOracle(const SparseSystem& sys) {
  sys.Validate();
  const Eigen::MatrixXd a = sys.Dense();
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
      sys.rhs.data(), static_cast<Eigen::Index>(sys.rhs.size()));
  const Eigen::MatrixXd normal = a.transpose() * a;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const double max_diag = normal.diagonal().maxCoeff();
  const double min_pivot = ldlt.vectorD().cwiseAbs().minCoeff();
  if (ldlt.info() != Eigen::Success || !(min_pivot > kSingularPivotRatio * max_diag)) {
    throw SingularSystemError(
        "dense normal matrix is singular (smallest pivot " +
            std::to_string(min_pivot) + ")",
        min_pivot);
  }
  const Eigen::VectorXd x = ldlt.solve(a.transpose() * b);
  return {x.data(), x.data() + x.size()};
}

namespace {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

// Scalar measurement update y = h.x + offset with variance var.
void ScalarUpdate(Vec2& x, Mat2& cov, const Eigen::RowVector2d& h,
                  double offset, double y, double var) {
  const Vec2 ph = cov * h.transpose();
  const double s = h.dot(ph) + var;
  const Vec2 k = ph / s;
  x += k * (y - h.dot(x) - offset);
  cov -= k * ph.transpose();
  cov = 0.5 * (cov + cov.transpose());
}

}  // namespace

EstimateSeries RtsSmootherOracle(std::span<const Sample> samples,
                                 const SmootherConfig& cfg) {
  ValidateTrajectory(samples);
  cfg.params.Validate();
  cfg.noise.Validate();
  const NoiseConfig& nz = cfg.noise;
  const VehicleParams& p = cfg.params;
  const std::size_t n = samples.size();

  const Mat2 q = Vec2(nz.sigma_beta * nz.sigma_beta, nz.sigma_r * nz.sigma_r)
                     .asDiagonal();
  std::vector<Vec2> x_filt(n), x_pred(n);
  std::vector<Mat2> p_filt(n), p_pred(n), trans(n);

  Vec2 x(cfg.initial_state.beta, cfg.initial_state.r);
  Mat2 cov = Vec2(nz.sigma_prior_beta * nz.sigma_prior_beta,
                  nz.sigma_prior_r * nz.sigma_prior_r)
                 .asDiagonal();
  for (std::size_t k = 0; k < n; ++k) {
    const Sample& s = samples[k];
    if (k > 0) {
      const Sample& prev = samples[k - 1];
      const DiscreteTransition tr = Transition(prev.u, s.t - prev.t, p);
      Mat2 f;
      f << tr.f[0], tr.f[1], tr.f[2], tr.f[3];
      trans[k] = f;
      x = f * x + Vec2(tr.g[0], tr.g[1]) * prev.delta;
      cov = f * cov * f.transpose() + q;
    }
    x_pred[k] = x;
    p_pred[k] = cov;

    ScalarUpdate(x, cov, Eigen::RowVector2d(0.0, 1.0), 0.0, s.yaw_rate,
                 nz.sigma_yaw_rate * nz.sigma_yaw_rate);
    const LatAccelGains ay = LatAccelCoefficients(s.u, p);
    ScalarUpdate(x, cov, Eigen::RowVector2d(ay.beta, ay.r), ay.delta * s.delta,
                 s.ay, nz.sigma_ay * nz.sigma_ay);
    if (!cov.allFinite() || cov.determinant() <= 0.0) {
      throw EstimationError("RTS forward pass lost positive definiteness at step " +
                            std::to_string(k));
    }
    x_filt[k] = x;
    p_filt[k] = cov;
  }

  std::vector<Vec2> x_smooth(x_filt);
  for (std::size_t k = n - 1; k-- > 0;) {
    // C = P_k|k F^T P_{k+1|k}^{-1}
    const Mat2 gain =
        p_pred[k + 1].ldlt().solve(trans[k + 1] * p_filt[k]).transpose();
    x_smooth[k] = x_filt[k] + gain * (x_smooth[k + 1] - x_pred[k + 1]);
  }

  EstimateSeries out;
  out.mode = EstimateMode::kRts;
  for (std::size_t k = 0; k < n; ++k) {
    out.times.push_back(samples[k].t);
    out.states.push_back(State{x_smooth[k](0), x_smooth[k](1)});
    out.meta.push_back(StepMeta{-1, 0});
  }
  return out;
}

}  // namespace sideslip
