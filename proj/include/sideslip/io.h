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

// File formats.
//
// Sample CSV (angles in radians unless read with degrees=true):
//   t,u,delta,yaw_rate,ay,beta_gt
//   0,20,0,0.000123,0.0521,0
// beta_gt may be blank. LF line endings.
//
// Estimate CSV:
//   t,beta_est,r_est,mode,window_id,iters
//
// System dump: "nrows ncols nnz" on the first line, then one "row col value"
// line per entry, then one "rhs row value tag" line per row.

#ifndef SIDESLIP_IO_H_
#define SIDESLIP_IO_H_

#include <istream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sideslip/estimators.h"
#include "sideslip/factor_graph.h"
#include "sideslip/vehicle_model.h"

namespace sideslip::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kSampleHeader[] = "t,u,delta,yaw_rate,ay,beta_gt";
inline constexpr char kEstimateHeader[] = "t,beta_est,r_est,mode,window_id,iters";

inline constexpr double kRadToDeg = 57.29577951308232;

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double value);

std::vector<Sample> ParseSamples(std::istream& in, bool degrees = false,
                                 const std::string& source = "<input>");
std::vector<Sample> ReadSamples(const std::string& path, bool degrees = false);
std::string FormatSamples(std::span<const Sample> samples);
void WriteSamples(const std::string& path, std::span<const Sample> samples);

EstimateSeries ParseEstimates(std::istream& in,
                              const std::string& source = "<input>");
EstimateSeries ReadEstimates(const std::string& path);
std::string FormatEstimates(const EstimateSeries& series);
void WriteEstimates(const std::string& path, const EstimateSeries& series);

std::string FormatSystem(const SparseSystem& sys);
SparseSystem ParseSystem(std::istream& in, const std::string& source = "<input>");

// Writes to a sibling temporary file and renames it over path.
void WriteFileAtomic(const std::string& path, const std::string& content);
std::string ReadFile(const std::string& path);

// Flat "key = value" text with '#' comments; keys keep their order.
std::vector<std::pair<std::string, std::string>> ParseConfig(
    std::istream& in, const std::string& source = "<config>");
std::vector<std::pair<std::string, std::string>> ReadConfig(
    const std::string& path);

// Truth reference for a sample log: beta from beta_gt, r from the gyroscope.
// Empty when any row lacks beta_gt.
std::optional<std::vector<State>> TruthFromSamples(
    std::span<const Sample> samples);

struct MetricsReport {
  std::string mode;
  std::optional<std::size_t> window;
  std::size_t samples = 0;
  std::optional<Rmse> rmse;  // radians internally
  NoiseConfig noise;
};
std::string FormatMetrics(const MetricsReport& report);

struct EvalEntry {
  std::string label;
  Rmse rmse;  // radians
};
// Lists every RMSE in degrees and, for two or more entries, the change in
// beta RMSE of the first entry relative to each of the others.
std::string FormatEvalReport(std::span<const EvalEntry> entries);

}  // namespace sideslip::io

#endif  // SIDESLIP_IO_H_
