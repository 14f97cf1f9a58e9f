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

#include "sideslip/solver.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

namespace sideslip {
namespace {

// Lower band of a symmetric matrix: element (j + d, j) for d in [0, kd].
class SymmetricBand {
 public:
  SymmetricBand(std::size_t n, std::size_t kd)
      : n_(n), kd_(kd), data_(n * (kd + 1), 0.0) {}

  double& at(std::size_t i, std::size_t j) {  // requires i >= j, i - j <= kd
    return data_[j * (kd_ + 1) + (i - j)];
  }
  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return kd_; }

 private:
  std::size_t n_;
  std::size_t kd_;
  std::vector<double> data_;
};

std::vector<std::vector<std::pair<std::size_t, double>>> RowsOf(
    const SparseSystem& sys) {
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(sys.nrows);
  for (const Triplet& t : sys.entries) rows[t.row].emplace_back(t.col, t.value);
  return rows;
}

// In-place L L^T factorization of the band.
void FactorBand(SymmetricBand& band) {
  const std::size_t n = band.size();
  const std::size_t kd = band.bandwidth();

  double max_diag = 0.0;
  for (std::size_t j = 0; j < n; ++j) max_diag = std::max(max_diag, band.at(j, j));
  const double threshold = kSingularPivotRatio * max_diag;

  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k0 = j > kd ? j - kd : 0;
    double pivot = band.at(j, j);
    for (std::size_t k = k0; k < j; ++k) pivot -= band.at(j, k) * band.at(j, k);
    smallest = std::min(smallest, pivot);
    if (!(pivot > threshold)) {
      std::ostringstream msg;
      msg << "normal matrix is singular: smallest pivot " << smallest
          << " at column " << j << " is below " << kSingularPivotRatio
          << " x max diagonal (" << max_diag << ")";
      throw SingularSystemError(msg.str(), smallest);
    }
    const double ljj = std::sqrt(pivot);
    band.at(j, j) = ljj;
    const std::size_t i_end = std::min(n, j + kd + 1);
    for (std::size_t i = j + 1; i < i_end; ++i) {
      double v = band.at(i, j);
      const std::size_t ki = i > kd ? i - kd : 0;
      for (std::size_t k = std::max(k0, ki); k < j; ++k) {
        v -= band.at(i, k) * band.at(j, k);
      }
      band.at(i, j) = v / ljj;
    }
  }
}

void SolveFactored(SymmetricBand& band, std::vector<double>& x) {
  const std::size_t n = band.size();
  const std::size_t kd = band.bandwidth();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k0 = i > kd ? i - kd : 0;
    double v = x[i];
    for (std::size_t k = k0; k < i; ++k) v -= band.at(i, k) * x[k];
    x[i] = v / band.at(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    const std::size_t k_end = std::min(n, ii + kd + 1);
    double v = x[ii];
    for (std::size_t k = ii + 1; k < k_end; ++k) v -= band.at(k, ii) * x[k];
    x[ii] = v / band.at(ii, ii);
  }
}

double InfNorm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

constexpr int kRefinementPasses = 2;

}  // namespace

std::vector<double> SolveWls(const SparseSystem& sys) {
  sys.Validate();
  if (sys.nrows < sys.ncols) {
    throw SingularSystemError("underdetermined system: " +
                                  std::to_string(sys.nrows) + " rows < " +
                                  std::to_string(sys.ncols) + " columns",
                              0.0);
  }
  const auto rows = RowsOf(sys);

  std::size_t kd = 0;
  for (const auto& row : rows) {
    if (row.empty()) continue;
    const auto [lo, hi] = std::minmax_element(
        row.begin(), row.end(),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    kd = std::max(kd, hi->first - lo->first);
  }

  SymmetricBand band(sys.ncols, kd);
  std::vector<double> x(sys.ncols, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [ci, vi] : rows[r]) {
      x[ci] += vi * sys.rhs[r];
      for (const auto& [cj, vj] : rows[r]) {
        if (cj <= ci) band.at(ci, cj) += vi * vj;
      }
    }
  }
  FactorBand(band);
  SolveFactored(band, x);

  // Iterative refinement against the unsquared residual; removes most of the
  // error the normal matrix's condition number puts into x.
  for (int pass = 0; pass < kRefinementPasses; ++pass) {
    std::vector<double> correction = NormalResidual(sys, x);
    for (double& v : correction) v = -v;
    SolveFactored(band, correction);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += correction[i];
  }
  return x;
}

double ResidualNorm(const SparseSystem& sys, const std::vector<double>& x) {
  std::vector<double> res(sys.rhs.begin(), sys.rhs.end());
  for (double& v : res) v = -v;
  for (const Triplet& t : sys.entries) res[t.row] += t.value * x[t.col];
  double ss = 0.0;
  for (double v : res) ss += v * v;
  return std::sqrt(ss);
}

std::vector<double> NormalResidual(const SparseSystem& sys,
                                   const std::vector<double>& x) {
  std::vector<double> res(sys.nrows, 0.0);
  for (std::size_t i = 0; i < sys.nrows; ++i) res[i] = -sys.rhs[i];
  for (const Triplet& t : sys.entries) res[t.row] += t.value * x[t.col];
  std::vector<double> g(sys.ncols, 0.0);
  for (const Triplet& t : sys.entries) g[t.col] += t.value * res[t.row];
  return g;
}

GaussNewtonResult GaussNewton(WindowProblem problem,
                              const GaussNewtonOptions& options) {
  if (options.max_iter < 1) throw PreconditionError("max_iter must be >= 1");
  if (!(options.tol > 0.0)) throw PreconditionError("tol must be > 0");

  SolveReport report;
  for (int it = 0; it < options.max_iter; ++it) {
    const SparseSystem sys = Assemble(problem);
    std::vector<double> delta = SolveWls(sys);
    for (std::size_t k = 0; k < problem.linearization_states.size(); ++k) {
      problem.linearization_states[k].beta += delta[2 * k];
      problem.linearization_states[k].r += delta[2 * k + 1];
    }
    const double norm = InfNorm(delta);
    report.iterations = it + 1;
    report.update_norms.push_back(norm);
    report.final_update_norm = norm;
    report.residual_norm = ResidualNorm(sys, delta);
    report.delta = std::move(delta);
    if (norm < options.tol) {
      report.converged = true;
      break;
    }
  }
  return GaussNewtonResult{std::move(problem.linearization_states),
                           std::move(report)};
}

}  // namespace sideslip
