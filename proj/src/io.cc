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

#include "sideslip/io.h"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>

namespace sideslip::io {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitCsv(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(Trim(line.substr(start)));
      return fields;
    }
    fields.push_back(Trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::string Where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

template <typename T>
T ParseNumber(std::string_view field, const char* name,
              const std::string& source, std::size_t line) {
  T value{};
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw IoError(Where(source, line) + "cannot parse " + name + " from '" +
                  std::string(field) + "'");
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) {
      throw IoError(Where(source, line) + name + " is not finite");
    }
  }
  return value;
}

constexpr double kDegToRad = 1.0 / kRadToDeg;

std::string FixedOrDash(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

std::vector<Sample> ParseSamples(std::istream& in, bool degrees,
                                 const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw IoError(source + ": empty trajectory");
  ++line_no;
  const std::string_view header = Trim(line);
  const bool has_gt = header == kSampleHeader;
  if (!has_gt && header != "t,u,delta,yaw_rate,ay") {
    throw IoError(Where(source, 1) + "expected header '" + kSampleHeader +
                  "', got '" + std::string(header) + "'");
  }
  const std::size_t ncols = has_gt ? 6 : 5;

  std::vector<Sample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsv(line);
    if (fields.size() != ncols) {
      throw IoError(Where(source, line_no) + "expected " + std::to_string(ncols) +
                    " fields, got " + std::to_string(fields.size()));
    }
    Sample s;
    s.t = ParseNumber<double>(fields[0], "t", source, line_no);
    s.u = ParseNumber<double>(fields[1], "u", source, line_no);
    s.delta = ParseNumber<double>(fields[2], "delta", source, line_no);
    s.yaw_rate = ParseNumber<double>(fields[3], "yaw_rate", source, line_no);
    s.ay = ParseNumber<double>(fields[4], "ay", source, line_no);
    if (has_gt && !fields[5].empty()) {
      s.beta_gt = ParseNumber<double>(fields[5], "beta_gt", source, line_no);
    }
    if (!(s.u > 0.0)) {
      throw IoError(Where(source, line_no) + "speed u must be > 0, got " +
                    std::string(fields[1]));
    }
    if (!samples.empty() && !(s.t > samples.back().t)) {
      throw IoError(Where(source, line_no) + "time " + std::string(fields[0]) +
                    " does not increase after " +
                    FormatDouble(samples.back().t));
    }
    if (degrees) {
      s.delta *= kDegToRad;
      s.yaw_rate *= kDegToRad;
      if (s.beta_gt) *s.beta_gt *= kDegToRad;
    }
    samples.push_back(s);
  }
  if (samples.empty()) throw IoError(source + ": empty trajectory");
  return samples;
}

std::vector<Sample> ReadSamples(const std::string& path, bool degrees) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return ParseSamples(in, degrees, path);
}

std::string FormatSamples(std::span<const Sample> samples) {
  std::string out = std::string(kSampleHeader) + "\n";
  for (const Sample& s : samples) {
    out += FormatDouble(s.t) + ',' + FormatDouble(s.u) + ',' +
           FormatDouble(s.delta) + ',' + FormatDouble(s.yaw_rate) + ',' +
           FormatDouble(s.ay) + ',' +
           (s.beta_gt ? FormatDouble(*s.beta_gt) : std::string()) + '\n';
  }
  return out;
}

void WriteSamples(const std::string& path, std::span<const Sample> samples) {
  WriteFileAtomic(path, FormatSamples(samples));
}

EstimateSeries ParseEstimates(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || Trim(line) != kEstimateHeader) {
    throw IoError(Where(source, 1) + "expected header '" + kEstimateHeader + "'");
  }
  EstimateSeries series;
  std::optional<EstimateMode> mode;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const auto fields = SplitCsv(line);
    if (fields.size() != 6) {
      throw IoError(Where(source, line_no) + "expected 6 fields, got " +
                    std::to_string(fields.size()));
    }
    const auto row_mode = ParseEstimateMode(fields[3]);
    if (!row_mode) {
      throw IoError(Where(source, line_no) + "unknown mode '" +
                    std::string(fields[3]) + "'");
    }
    if (mode && *mode != *row_mode) {
      throw IoError(Where(source, line_no) + "mixed modes in one file");
    }
    mode = row_mode;
    const double t = ParseNumber<double>(fields[0], "t", source, line_no);
    if (!series.times.empty() && !(t > series.times.back())) {
      throw IoError(Where(source, line_no) + "time does not increase");
    }
    series.times.push_back(t);
    series.states.push_back(
        State{ParseNumber<double>(fields[1], "beta_est", source, line_no),
              ParseNumber<double>(fields[2], "r_est", source, line_no)});
    series.meta.push_back(
        StepMeta{ParseNumber<long>(fields[4], "window_id", source, line_no),
                 ParseNumber<int>(fields[5], "iters", source, line_no)});
  }
  if (series.states.empty()) throw IoError(source + ": no estimates");
  series.mode = *mode;
  return series;
}

EstimateSeries ReadEstimates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return ParseEstimates(in, path);
}

std::string FormatEstimates(const EstimateSeries& series) {
  series.Validate();
  const std::string mode(ToString(series.mode));
  std::string out = std::string(kEstimateHeader) + "\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    out += FormatDouble(series.times[k]) + ',' +
           FormatDouble(series.states[k].beta) + ',' +
           FormatDouble(series.states[k].r) + ',' + mode + ',' +
           std::to_string(series.meta[k].window_id) + ',' +
           std::to_string(series.meta[k].iterations) + '\n';
  }
  return out;
}

void WriteEstimates(const std::string& path, const EstimateSeries& series) {
  WriteFileAtomic(path, FormatEstimates(series));
}

std::string FormatSystem(const SparseSystem& sys) {
  std::string out = std::to_string(sys.nrows) + ' ' + std::to_string(sys.ncols) +
                    ' ' + std::to_string(sys.entries.size()) + '\n';
  for (const Triplet& t : sys.entries) {
    out += std::to_string(t.row) + ' ' + std::to_string(t.col) + ' ' +
           FormatDouble(t.value) + '\n';
  }
  for (std::size_t i = 0; i < sys.nrows; ++i) {
    out += "rhs " + std::to_string(i) + ' ' + FormatDouble(sys.rhs[i]);
    if (i < sys.row_tags.size()) out += ' ' + std::string(ToString(sys.row_tags[i]));
    out += '\n';
  }
  return out;
}

SparseSystem ParseSystem(std::istream& in, const std::string& source) {
  SparseSystem sys;
  std::size_t nnz = 0;
  if (!(in >> sys.nrows >> sys.ncols >> nnz)) {
    throw IoError(source + ": missing 'nrows ncols nnz' header");
  }
  sys.entries.resize(nnz);
  for (Triplet& t : sys.entries) {
    if (!(in >> t.row >> t.col >> t.value)) {
      throw IoError(source + ": truncated triplet list");
    }
  }
  sys.rhs.assign(sys.nrows, 0.0);
  std::string line;
  std::getline(in, line);
  for (std::size_t i = 0; i < sys.nrows; ++i) {
    if (!std::getline(in, line)) throw IoError(source + ": truncated rhs");
    std::istringstream fields(line);
    std::string word, tag;
    std::size_t row = 0;
    double value = 0.0;
    if (!(fields >> word >> row >> value) || word != "rhs" || row != i) {
      throw IoError(source + ": malformed rhs line '" + line + "'");
    }
    sys.rhs[i] = value;
    if (fields >> tag) {
      bool found = false;
      for (FactorKind k : {FactorKind::kPriorBeta, FactorKind::kPriorR,
                           FactorKind::kDynBeta, FactorKind::kDynR,
                           FactorKind::kMeasYawRate, FactorKind::kMeasLatAccel}) {
        if (ToString(k) == tag) {
          sys.row_tags.push_back(k);
          found = true;
        }
      }
      if (!found) throw IoError(source + ": unknown row tag '" + tag + "'");
    }
  }
  sys.Validate();
  return sys;
}

void WriteFileAtomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename onto " + path + ": " + ec.message());
  }
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<std::string, std::string>> ParseConfig(
    std::istream& in, const std::string& source) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = Trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw IoError(Where(source, line_no) + "expected 'key = value'");
    }
    const std::string_view key = Trim(view.substr(0, eq));
    const std::string_view value = Trim(view.substr(eq + 1));
    if (key.empty()) throw IoError(Where(source, line_no) + "empty key");
    entries.emplace_back(std::string(key), std::string(value));
  }
  return entries;
}

std::vector<std::pair<std::string, std::string>> ReadConfig(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  return ParseConfig(in, path);
}

std::optional<std::vector<State>> TruthFromSamples(
    std::span<const Sample> samples) {
  std::vector<State> truth;
  truth.reserve(samples.size());
  for (const Sample& s : samples) {
    if (!s.beta_gt) return std::nullopt;
    truth.push_back(State{*s.beta_gt, s.yaw_rate});
  }
  return truth;
}

std::string FormatMetrics(const MetricsReport& report) {
  std::ostringstream out;
  out << "# beta metrics in deg, r metrics in deg/s; sigmas in SI units\n";
  out << "mode = " << report.mode << '\n';
  out << "window = " << (report.window ? std::to_string(*report.window) : "n/a")
      << '\n';
  out << "samples = " << report.samples << '\n';
  if (report.rmse) {
    out << "rmse_beta_deg = " << FormatDouble(report.rmse->beta * kRadToDeg)
        << '\n';
    out << "rmse_r_deg_s = " << FormatDouble(report.rmse->r * kRadToDeg) << '\n';
  } else {
    out << "rmse_beta_deg = unavailable\n";
    out << "rmse_r_deg_s = unavailable\n";
  }
  const NoiseConfig& n = report.noise;
  out << "sigma_beta = " << FormatDouble(n.sigma_beta) << '\n'
      << "sigma_r = " << FormatDouble(n.sigma_r) << '\n'
      << "sigma_yaw_rate = " << FormatDouble(n.sigma_yaw_rate) << '\n'
      << "sigma_ay = " << FormatDouble(n.sigma_ay) << '\n'
      << "sigma_prior_beta = " << FormatDouble(n.sigma_prior_beta) << '\n'
      << "sigma_prior_r = " << FormatDouble(n.sigma_prior_r) << '\n';
  return out.str();
}

std::string FormatEvalReport(std::span<const EvalEntry> entries) {
  std::ostringstream out;
  std::size_t width = 5;
  for (const EvalEntry& e : entries) width = std::max(width, e.label.size());
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s  %16s  %16s\n", static_cast<int>(width),
                "label", "rmse_beta [deg]", "rmse_r [deg/s]");
  out << buf;
  for (const EvalEntry& e : entries) {
    std::snprintf(buf, sizeof(buf), "%-*s  %16s  %16s\n",
                  static_cast<int>(width), e.label.c_str(),
                  FixedOrDash(e.rmse.beta * kRadToDeg).c_str(),
                  FixedOrDash(e.rmse.r * kRadToDeg).c_str());
    out << buf;
  }
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const EvalEntry& a = entries[0];
    const EvalEntry& b = entries[i];
    out << a.label << " vs " << b.label << ": rmse_beta "
        << FixedOrDash(a.rmse.beta * kRadToDeg) << " deg vs "
        << FixedOrDash(b.rmse.beta * kRadToDeg) << " deg, ";
    if (b.rmse.beta > 0.0) {
      const double pct = (b.rmse.beta - a.rmse.beta) / b.rmse.beta * 100.0;
      const long rounded = std::lround(std::abs(pct));
      out << rounded << "% " << (pct >= 0.0 ? "improvement" : "degradation")
          << " over " << b.label << '\n';
    } else {
      out << "relative change undefined (reference rmse is zero)\n";
    }
  }
  return out.str();
}

}  // namespace sideslip::io
