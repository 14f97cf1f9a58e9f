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

#ifndef SIDESLIP_CLI_H_
#define SIDESLIP_CLI_H_

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sideslip/estimators.h"
#include "sideslip/factor_graph.h"
#include "sideslip/sim_oracle.h"
#include "sideslip/vehicle_model.h"

namespace sideslip::cli {

enum class Command { kSimulate, kEstimate, kEval, kDumpSystem };

struct RunConfig {
  Command command = Command::kEstimate;
  EstimateMode mode = EstimateMode::kFgBatch;  // estimate only
  std::string input_path;
  std::string output_path;
  std::string metrics_path;  // estimate: optional metrics file
  std::size_t window = 5;    // fg-sliding; dump-system window length
  std::size_t start = 0;     // dump-system first sample
  bool degrees = false;
  NoiseConfig noise;
  VehicleParams params = VehicleParams::Reference();
  State initial_state;
  GaussNewtonOptions solver;
  SimConfig sim = SimConfig::DefaultScenario();
  // eval: (label, estimate csv); truth comes from input_path.
  std::vector<std::pair<std::string, std::string>> series;

  // Mode-specific checks: required paths present, window >= 1, valid
  // parameters.
  void Validate() const;
};

// Executes one command. Returns 0 only when every requested output was
// written and parsed back; errors go to err with a nonzero status.
int Run(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv (subcommand first), merges an optional --config file whose
// keys mirror the long flag names, then calls Run. Flags given on the command
// line win over the file.
int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err);

}  // namespace sideslip::cli

#endif  // SIDESLIP_CLI_H_
