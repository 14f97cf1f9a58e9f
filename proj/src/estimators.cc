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

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace sideslip {

std::string_view ToString(EstimateMode mode) {
  switch (mode) {
    case EstimateMode::kFgSliding: return "fg-sliding";
    case EstimateMode::kFgBatch: return "fg-batch";
    case EstimateMode::kKf: return "kf";
    case EstimateMode::kRts: return "rts";
  }
  return "unknown";
}

std::optional<EstimateMode> ParseEstimateMode(std::string_view name) {
  for (EstimateMode m : {EstimateMode::kFgSliding, EstimateMode::kFgBatch,
                         EstimateMode::kKf, EstimateMode::kRts}) {
    if (ToString(m) == name) return m;
  }
  return std::nullopt;
}

void EstimateSeries::Validate() const {
  if (times.size() != states.size() || meta.size() != states.size()) {
    throw EstimationError("estimate series has mismatched column lengths");
  }
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) {
      throw EstimationError("estimate times not strictly increasing at row " +
                            std::to_string(k));
    }
  }
}

void KfConfig::Validate() const {
  for (double v : {q_beta, q_r, r_yaw_rate, r_ay, p0_beta, p0_r}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw PreconditionError("Kalman filter variances must be finite and > 0");
    }
  }
  params.Validate();
}

KfConfig KfConfig::FromNoise(const NoiseConfig& noise, const State& initial,
                             const VehicleParams& params) {
  noise.Validate();
  KfConfig cfg;
  cfg.q_beta = noise.sigma_beta * noise.sigma_beta;
  cfg.q_r = noise.sigma_r * noise.sigma_r;
  cfg.r_yaw_rate = noise.sigma_yaw_rate * noise.sigma_yaw_rate;
  cfg.r_ay = noise.sigma_ay * noise.sigma_ay;
  cfg.p0_beta = noise.sigma_prior_beta * noise.sigma_prior_beta;
  cfg.p0_r = noise.sigma_prior_r * noise.sigma_prior_r;
  cfg.initial_state = initial;
  cfg.params = params;
  return cfg;
}

void ValidateTrajectory(std::span<const Sample> samples) {
  if (samples.empty()) throw PreconditionError("empty trajectory");
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Sample& s = samples[k];
    if (!std::isfinite(s.t) || !std::isfinite(s.delta) ||
        !std::isfinite(s.yaw_rate) || !std::isfinite(s.ay)) {
      throw PreconditionError("sample " + std::to_string(k) +
                              " has a non-finite field");
    }
    if (!(s.u > 0.0) || !std::isfinite(s.u)) {
      throw PreconditionError("sample " + std::to_string(k) +
                              " has non-positive speed " + std::to_string(s.u));
    }
    if (k > 0 && !(s.t > samples[k - 1].t)) {
      throw PreconditionError("sample " + std::to_string(k) +
                              ": time " + std::to_string(s.t) +
                              " does not follow " +
                              std::to_string(samples[k - 1].t));
    }
  }
}

namespace {

State Propagate(const State& from, const Sample& prev, const Sample& cur,
                const VehicleParams& p) {
  return StepDynamics(from, prev.u, prev.delta, cur.t - prev.t, p);
}

}  // namespace

EstimateSeries RunFixedLag(std::span<const Sample> samples,
                           const SmootherConfig& cfg, FixedLagTrace* trace) {
  ValidateTrajectory(samples);
  if (cfg.window_len < 1) throw PreconditionError("window length must be >= 1");
  cfg.params.Validate();
  cfg.noise.Validate();

  const std::size_t n = samples.size();
  const std::size_t m = cfg.window_len;

  EstimateSeries out;
  out.mode = EstimateMode::kFgSliding;
  out.times.resize(n);
  out.states.resize(n);
  out.meta.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.times[k] = samples[k].t;

  std::vector<State> window_est;  // estimates of [window_begin, window_end]
  std::size_t window_begin = 0;
  int window_iters = 0;
  State prior = cfg.initial_state;

  for (std::size_t end = 0; end < n; ++end) {
    const std::size_t begin = end + 1 >= m ? end + 1 - m : 0;

    // Freeze samples that slid out, and carry the retained estimate forward
    // as the new prior.
    if (end > 0 && begin > window_begin) {
      for (std::size_t k = window_begin; k < begin; ++k) {
        if (k - window_begin >= window_est.size()) break;
        out.states[k] = window_est[k - window_begin];
        out.meta[k] = StepMeta{static_cast<long>(end - 1), window_iters};
      }
      const std::size_t carried = begin - window_begin;
      if (carried < window_est.size()) {
        prior = window_est[carried];
      } else {
        prior = Propagate(window_est.back(), samples[begin - 1],
                          samples[begin], cfg.params);
      }
    }

    WindowProblem problem;
    problem.params = cfg.params;
    problem.noise = cfg.noise;
    problem.prior_state = prior;
    problem.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(begin),
                           samples.begin() + static_cast<std::ptrdiff_t>(end) + 1);
    problem.linearization_states.reserve(end - begin + 1);
    for (std::size_t k = begin; k <= end; ++k) {
      const std::size_t prev_index = k - window_begin;
      if (end > 0 && k >= window_begin && prev_index < window_est.size()) {
        problem.linearization_states.push_back(window_est[prev_index]);
      } else if (k == begin) {
        problem.linearization_states.push_back(prior);
      } else {
        problem.linearization_states.push_back(
            Propagate(problem.linearization_states.back(), samples[k - 1],
                      samples[k], cfg.params));
      }
    }

    GaussNewtonResult result;
    try {
      result = GaussNewton(std::move(problem), cfg.solver);
    } catch (const std::exception& e) {
      throw EstimationError("window " + std::to_string(end) + " (samples " +
                            std::to_string(begin) + ".." + std::to_string(end) +
                            "): " + e.what());
    }
    if (trace != nullptr) {
      trace->window_start.push_back(begin);
      trace->priors.push_back(prior);
      trace->estimates.push_back(result.states);
    }
    window_est = std::move(result.states);
    window_begin = begin;
    window_iters = result.report.iterations;
  }

  for (std::size_t k = window_begin; k < n; ++k) {
    out.states[k] = window_est[k - window_begin];
    out.meta[k] = StepMeta{static_cast<long>(n - 1), window_iters};
  }
  return out;
}

EstimateSeries RunBatch(std::span<const Sample> samples,
                        const SmootherConfig& cfg) {
  ValidateTrajectory(samples);
  cfg.params.Validate();
  cfg.noise.Validate();

  WindowProblem problem;
  problem.params = cfg.params;
  problem.noise = cfg.noise;
  problem.prior_state = cfg.initial_state;
  problem.samples.assign(samples.begin(), samples.end());
  problem.linearization_states.reserve(samples.size());
  problem.linearization_states.push_back(cfg.initial_state);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    problem.linearization_states.push_back(
        Propagate(problem.linearization_states.back(), samples[k - 1],
                  samples[k], cfg.params));
  }

  GaussNewtonResult result = GaussNewton(std::move(problem), cfg.solver);

  EstimateSeries out;
  out.mode = EstimateMode::kFgBatch;
  out.states = std::move(result.states);
  out.times.reserve(samples.size());
  for (const Sample& s : samples) out.times.push_back(s.t);
  out.meta.assign(samples.size(), StepMeta{0, result.report.iterations});
  return out;
}

EstimateSeries RunKf(std::span<const Sample> samples, const KfConfig& cfg) {
  ValidateTrajectory(samples);
  cfg.Validate();

  using Mat2 = Eigen::Matrix2d;
  using Vec2 = Eigen::Vector2d;
  const VehicleParams& p = cfg.params;

  Vec2 x(cfg.initial_state.beta, cfg.initial_state.r);
  Mat2 cov = Vec2(cfg.p0_beta, cfg.p0_r).asDiagonal();
  const Mat2 q = Vec2(cfg.q_beta, cfg.q_r).asDiagonal();
  const Mat2 meas_cov = Vec2(cfg.r_yaw_rate, cfg.r_ay).asDiagonal();

  EstimateSeries out;
  out.mode = EstimateMode::kKf;
  out.times.reserve(samples.size());
  out.states.reserve(samples.size());

  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Sample& s = samples[k];
    if (k > 0) {
      const Sample& prev = samples[k - 1];
      const DiscreteTransition tr = Transition(prev.u, s.t - prev.t, p);
      const Mat2 f = Eigen::Map<const Eigen::Matrix<double, 2, 2, Eigen::RowMajor>>(
          tr.f.data());
      x = f * x + Vec2(tr.g[0], tr.g[1]) * prev.delta;
      cov = f * cov * f.transpose() + q;
    }

    const LatAccelGains ay = LatAccelCoefficients(s.u, p);
    Mat2 h;
    h << 0.0, 1.0, ay.beta, ay.r;
    const Vec2 z(s.yaw_rate, s.ay);
    const Vec2 z_pred = h * x + Vec2(0.0, ay.delta * s.delta);
    const Mat2 innovation_cov = h * cov * h.transpose() + meas_cov;
    const Mat2 gain =
        innovation_cov.ldlt().solve(h * cov.transpose()).transpose();
    x += gain * (z - z_pred);
    const Mat2 joseph = Mat2::Identity() - gain * h;
    cov = joseph * cov * joseph.transpose() + gain * meas_cov * gain.transpose();
    cov = 0.5 * (cov + cov.transpose());

    if (!cov.allFinite() || !x.allFinite() || cov(0, 0) <= 0.0 ||
        cov(1, 1) <= 0.0 || cov.determinant() <= 0.0) {
      throw EstimationError("Kalman covariance lost positive definiteness at step " +
                            std::to_string(k));
    }
    out.times.push_back(s.t);
    out.states.push_back(State{x(0), x(1)});
    out.meta.push_back(StepMeta{-1, 0});
  }
  return out;
}

Rmse ComputeRmse(const EstimateSeries& est, std::span<const State> truth) {
  if (est.states.size() != truth.size()) {
    throw PreconditionError("rmse: estimate has " +
                            std::to_string(est.states.size()) +
                            " rows but truth has " + std::to_string(truth.size()));
  }
  if (truth.empty()) throw PreconditionError("rmse: empty series");
  double sb = 0.0;
  double sr = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double db = est.states[k].beta - truth[k].beta;
    const double dr = est.states[k].r - truth[k].r;
    sb += db * db;
    sr += dr * dr;
  }
  const double n = static_cast<double>(truth.size());
  return Rmse{std::sqrt(sb / n), std::sqrt(sr / n)};
}

}  // namespace sideslip
