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

#ifndef SIDESLIP_SOLVER_H_
#define SIDESLIP_SOLVER_H_

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sideslip/factor_graph.h"
#include "sideslip/vehicle_model.h"

namespace sideslip {

class SingularSystemError : public std::runtime_error {
 public:
  SingularSystemError(const std::string& what, double smallest_pivot)
      : std::runtime_error(what), smallest_pivot_(smallest_pivot) {}
  double smallest_pivot() const { return smallest_pivot_; }

 private:
  double smallest_pivot_;
};

// A pivot below this fraction of the largest diagonal of A^T A is singular.
inline constexpr double kSingularPivotRatio = 1e-12;

// Minimizer of ||A x - b||_2 via banded Cholesky on the normal equations.
// The half-bandwidth is taken from the sparsity pattern, so an assembled
// window costs O(n) regardless of its length.
std::vector<double> SolveWls(const SparseSystem& sys);

// ||A x - b||_2
double ResidualNorm(const SparseSystem& sys, const std::vector<double>& x);

// A^T (A x - b); zero at the least-squares minimizer.
std::vector<double> NormalResidual(const SparseSystem& sys,
                                   const std::vector<double>& x);

struct GaussNewtonOptions {
  int max_iter = 10;
  double tol = 1e-10;  // on the infinity norm of the update
};

struct SolveReport {
  std::vector<double> delta;  // last update
  int iterations = 0;
  double final_update_norm = 0.0;
  double residual_norm = 0.0;  // whitened, after the last update
  bool converged = false;
  std::vector<double> update_norms;  // one per iteration
};

struct GaussNewtonResult {
  std::vector<State> states;
  SolveReport report;
};

// Repeats assemble -> solve -> x += delta, starting from
// problem.linearization_states, until ||delta||_inf < tol or max_iter.
// Running out of iterations is reported through report.converged.
GaussNewtonResult GaussNewton(WindowProblem problem,
                              const GaussNewtonOptions& options = {});

}  // namespace sideslip

#endif  // SIDESLIP_SOLVER_H_
