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

#include "sideslip/cli.h"

#include <CLI11.hpp>

#include <charconv>
#include <ostream>
#include <sstream>

#include "sideslip/io.h"
#include "sideslip/solver.h"

namespace sideslip::cli {
namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double ParseDoubleOrThrow(std::string_view text, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("cannot parse " + what + " from '" + std::string(text) + "'");
  }
  return v;
}

// "t0:v0,t1:v1,..."
std::vector<std::pair<double, double>> ParseBreakpoints(const std::string& text,
                                                        const std::string& what) {
  std::vector<std::pair<double, double>> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
      throw UsageError(what + ": expected 'time:value', got '" + item + "'");
    }
    out.emplace_back(ParseDoubleOrThrow(item.substr(0, colon), what + " time"),
                     ParseDoubleOrThrow(item.substr(colon + 1), what + " value"));
  }
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

std::vector<State> ForwardPropagate(std::span<const Sample> samples,
                                    const State& initial,
                                    const VehicleParams& p) {
  std::vector<State> states{initial};
  for (std::size_t k = 1; k < samples.size(); ++k) {
    states.push_back(StepDynamics(states.back(), samples[k - 1].u,
                                  samples[k - 1].delta,
                                  samples[k].t - samples[k - 1].t, p));
  }
  return states;
}

int RunSimulate(const RunConfig& cfg, std::ostream& out) {
  SimConfig sim = cfg.sim;
  sim.params = cfg.params;
  sim.initial_state = cfg.initial_state;
  const Trajectory traj = Simulate(sim);
  io::WriteSamples(cfg.output_path, traj.samples);
  const auto back = io::ReadSamples(cfg.output_path);
  if (back.size() != traj.samples.size()) {
    throw io::IoError(cfg.output_path + " did not parse back completely");
  }
  out << "wrote " << traj.samples.size() << " samples to " << cfg.output_path
      << '\n';
  return 0;
}

int RunEstimate(const RunConfig& cfg, std::ostream& out) {
  const std::vector<Sample> samples = io::ReadSamples(cfg.input_path, cfg.degrees);

  SmootherConfig smoother;
  smoother.window_len = cfg.window;
  smoother.noise = cfg.noise;
  smoother.initial_state = cfg.initial_state;
  smoother.params = cfg.params;
  smoother.solver = cfg.solver;

  EstimateSeries series;
  switch (cfg.mode) {
    case EstimateMode::kFgSliding:
      series = RunFixedLag(samples, smoother);
      break;
    case EstimateMode::kFgBatch:
      series = RunBatch(samples, smoother);
      break;
    case EstimateMode::kKf:
      series = RunKf(samples, KfConfig::FromNoise(cfg.noise, cfg.initial_state,
                                                  cfg.params));
      break;
    case EstimateMode::kRts:
      series = RtsSmootherOracle(samples, smoother);
      break;
  }
  io::WriteEstimates(cfg.output_path, series);
  if (io::ReadEstimates(cfg.output_path).size() != series.size()) {
    throw io::IoError(cfg.output_path + " did not parse back completely");
  }
  out << "wrote " << series.size() << " " << ToString(series.mode)
      << " estimates to " << cfg.output_path << '\n';

  const auto truth = io::TruthFromSamples(samples);
  std::string metrics_path = cfg.metrics_path;
  if (metrics_path.empty() && truth) metrics_path = cfg.output_path + ".metrics";
  if (metrics_path.empty()) return 0;

  io::MetricsReport report;
  report.mode = std::string(ToString(series.mode));
  if (cfg.mode == EstimateMode::kFgSliding) report.window = cfg.window;
  report.samples = series.size();
  report.noise = cfg.noise;
  if (truth) report.rmse = ComputeRmse(series, *truth);
  io::WriteFileAtomic(metrics_path, io::FormatMetrics(report));
  io::ReadConfig(metrics_path);
  if (report.rmse) {
    out << "rmse_beta = " << report.rmse->beta * io::kRadToDeg
        << " deg, rmse_r = " << report.rmse->r * io::kRadToDeg << " deg/s\n";
  } else {
    out << "no beta_gt column: metrics unavailable\n";
  }
  out << "wrote metrics to " << metrics_path << '\n';
  return 0;
}

int RunEval(const RunConfig& cfg, std::ostream& out) {
  const std::vector<Sample> samples = io::ReadSamples(cfg.input_path, cfg.degrees);
  const auto truth = io::TruthFromSamples(samples);
  if (!truth) {
    throw io::IoError(cfg.input_path + ": every row needs beta_gt for eval");
  }
  std::vector<io::EvalEntry> entries;
  for (const auto& [label, path] : cfg.series) {
    const EstimateSeries series = io::ReadEstimates(path);
    if (series.size() != samples.size()) {
      throw io::IoError(path + " has " + std::to_string(series.size()) +
                        " rows but the truth has " +
                        std::to_string(samples.size()));
    }
    entries.push_back(io::EvalEntry{label, ComputeRmse(series, *truth)});
  }
  const std::string report = io::FormatEvalReport(entries);
  out << report;
  if (!cfg.output_path.empty()) {
    io::WriteFileAtomic(cfg.output_path, report);
    if (io::ReadFile(cfg.output_path) != report) {
      throw io::IoError(cfg.output_path + " did not read back identically");
    }
  }
  return 0;
}

int RunDumpSystem(const RunConfig& cfg, std::ostream& out) {
  const std::vector<Sample> samples = io::ReadSamples(cfg.input_path, cfg.degrees);
  if (cfg.start + cfg.window > samples.size()) {
    throw UsageError("window [" + std::to_string(cfg.start) + ", " +
                     std::to_string(cfg.start + cfg.window) +
                     ") exceeds the " + std::to_string(samples.size()) +
                     " available samples");
  }
  WindowProblem problem;
  problem.params = cfg.params;
  problem.noise = cfg.noise;
  problem.prior_state = cfg.initial_state;
  problem.samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(cfg.start),
                         samples.begin() +
                             static_cast<std::ptrdiff_t>(cfg.start + cfg.window));
  problem.linearization_states =
      ForwardPropagate(problem.samples, cfg.initial_state, cfg.params);
  const SparseSystem sys = Assemble(problem);
  const std::string text = io::FormatSystem(sys);
  io::WriteFileAtomic(cfg.output_path, text);
  std::istringstream check(io::ReadFile(cfg.output_path));
  io::ParseSystem(check, cfg.output_path);
  out << "wrote " << sys.nrows << "x" << sys.ncols << " system with "
      << sys.entries.size() << " nonzeros to " << cfg.output_path << '\n';
  return 0;
}

void AddVehicleOptions(CLI::App* app, VehicleParams& p) {
  app->add_option("--mass", p.mass, "vehicle mass [kg]")->capture_default_str();
  app->add_option("--yaw-inertia", p.yaw_inertia, "yaw moment of inertia [kg m^2]")
      ->capture_default_str();
  app->add_option("--cf", p.cf, "front cornering stiffness [N/rad]")
      ->capture_default_str();
  app->add_option("--cr", p.cr, "rear cornering stiffness [N/rad]")
      ->capture_default_str();
  app->add_option("--lf", p.lf, "CoG to front axle [m]")->capture_default_str();
  app->add_option("--lr", p.lr, "CoG to rear axle [m]")->capture_default_str();
}

void AddNoiseOptions(CLI::App* app, NoiseConfig& n) {
  app->add_option("--sigma-beta", n.sigma_beta, "beta dynamics std-dev [rad]")
      ->capture_default_str();
  app->add_option("--sigma-r", n.sigma_r, "r dynamics std-dev [rad/s]")
      ->capture_default_str();
  app->add_option("--sigma-yaw-rate", n.sigma_yaw_rate,
                  "yaw-rate measurement std-dev [rad/s]")
      ->capture_default_str();
  app->add_option("--sigma-ay", n.sigma_ay,
                  "lateral acceleration std-dev [m/s^2]")
      ->capture_default_str();
  app->add_option("--sigma-prior-beta", n.sigma_prior_beta,
                  "prior std-dev on beta [rad]")
      ->capture_default_str();
  app->add_option("--sigma-prior-r", n.sigma_prior_r, "prior std-dev on r [rad/s]")
      ->capture_default_str();
}

void AddInitialOptions(CLI::App* app, State& s) {
  app->add_option("--initial-beta", s.beta, "initial sideslip guess [rad]")
      ->capture_default_str();
  app->add_option("--initial-r", s.r, "initial yaw-rate guess [rad/s]")
      ->capture_default_str();
}

// Moves "--config <file>" out of args and splices the file's entries in as
// "--key=value" right after the subcommand, so later command-line flags win.
std::vector<std::string> ExpandConfig(std::vector<std::string> args) {
  std::string config_path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (config_path.empty()) return args;
  if (args.size() < 2 || args[1].empty() || args[1][0] == '-') {
    throw UsageError("--config must follow a subcommand");
  }
  std::vector<std::string> injected;
  for (const auto& [key, value] : io::ReadConfig(config_path)) {
    if (key == "config") throw UsageError("config files cannot nest");
    injected.push_back("--" + key + "=" + value);
  }
  args.insert(args.begin() + 2, injected.begin(), injected.end());
  return args;
}

}  // namespace

void RunConfig::Validate() const {
  const auto require = [](const std::string& path, const char* flag) {
    if (path.empty()) throw UsageError(std::string(flag) + " is required");
  };
  params.Validate();
  noise.Validate();
  if (!initial_state.IsFinite()) throw UsageError("initial state must be finite");
  switch (command) {
    case Command::kSimulate:
      require(output_path, "--out");
      sim.Validate();
      break;
    case Command::kEstimate:
      require(input_path, "--in");
      require(output_path, "--out");
      if (mode == EstimateMode::kFgSliding && window < 1) {
        throw UsageError("--window must be >= 1 for fg-sliding");
      }
      if (solver.max_iter < 1 || !(solver.tol > 0.0)) {
        throw UsageError("--max-iter must be >= 1 and --tol > 0");
      }
      break;
    case Command::kEval:
      require(input_path, "--truth");
      if (series.empty()) throw UsageError("eval needs at least one --series");
      break;
    case Command::kDumpSystem:
      require(input_path, "--in");
      require(output_path, "--out");
      if (window < 1) throw UsageError("--window must be >= 1");
      break;
  }
}

int Run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.Validate();
    switch (config.command) {
      case Command::kSimulate: return RunSimulate(config, out);
      case Command::kEstimate: return RunEstimate(config, out);
      case Command::kEval: return RunEval(config, out);
      case Command::kDumpSystem: return RunDumpSystem(config, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

int Main(int argc, const char* const* argv, std::ostream& out,
         std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  try {
    args = ExpandConfig(std::move(args));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  RunConfig cfg;
  CLI::App app{"Vehicle sideslip estimation with factor graphs and a Kalman baseline",
               "sideslip"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  // simulate
  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic sample log");
  std::string speed_steps, steer_kind = "sine", steer_steps;
  double speed = 20.0, steer_value = 0.0, steer_amplitude = 0.03,
         steer_period = 4.0;
  sim->add_option("--out", cfg.output_path, "output sample CSV")->required();
  sim->add_option("--duration", cfg.sim.duration, "[s]")->capture_default_str();
  sim->add_option("--dt", cfg.sim.dt, "[s]")->capture_default_str();
  sim->add_option("--speed", speed, "constant speed [m/s]")->capture_default_str();
  sim->add_option("--speed-steps", speed_steps,
                  "piecewise-constant speed 't:u,t:u,...'");
  sim->add_option("--steer", steer_kind, "steering profile")
      ->check(CLI::IsMember({"constant", "sine", "steps"}))
      ->capture_default_str();
  sim->add_option("--steer-value", steer_value, "constant steering [rad]");
  sim->add_option("--steer-amplitude", steer_amplitude, "sine amplitude [rad]")
      ->capture_default_str();
  sim->add_option("--steer-period", steer_period, "sine period [s]")
      ->capture_default_str();
  sim->add_option("--steer-steps", steer_steps, "step schedule 't:delta,...'");
  sim->add_option("--noise-yaw-rate", cfg.sim.noise_yaw_rate,
                  "gyroscope noise std-dev [rad/s]")
      ->capture_default_str();
  sim->add_option("--noise-ay", cfg.sim.noise_ay,
                  "accelerometer noise std-dev [m/s^2]")
      ->capture_default_str();
  sim->add_option("--seed", cfg.sim.seed, "noise seed")->capture_default_str();
  AddVehicleOptions(sim, cfg.params);
  AddInitialOptions(sim, cfg.initial_state);

  // estimate
  CLI::App* est = app.add_subcommand("estimate", "estimate sideslip from a sample log");
  std::string mode_name;
  est->add_option("--mode", mode_name, "estimator")
      ->check(CLI::IsMember({"fg-sliding", "fg-batch", "kf"}))
      ->required();
  est->add_option("--in", cfg.input_path, "input sample CSV")->required();
  est->add_option("--out", cfg.output_path, "output estimate CSV")->required();
  est->add_option("--metrics", cfg.metrics_path,
                  "metrics file (default <out>.metrics when beta_gt is present)");
  est->add_option("--window", cfg.window, "fixed-lag window length M")
      ->capture_default_str();
  est->add_flag("--degrees", cfg.degrees,
                "input angles in deg and yaw rate in deg/s");
  est->add_option("--max-iter", cfg.solver.max_iter, "Gauss-Newton iterations")
      ->capture_default_str();
  est->add_option("--tol", cfg.solver.tol, "Gauss-Newton update tolerance")
      ->capture_default_str();
  AddVehicleOptions(est, cfg.params);
  AddNoiseOptions(est, cfg.noise);
  AddInitialOptions(est, cfg.initial_state);

  // eval
  CLI::App* ev = app.add_subcommand("eval", "compare estimate files against truth");
  std::vector<std::string> series_args;
  ev->add_option("--truth", cfg.input_path, "sample CSV with beta_gt")->required();
  ev->add_option("--series", series_args,
                 "label=estimate.csv, or a path labelled by its mode; the first "
                 "series is compared against the others")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->required();
  ev->add_option("--out", cfg.output_path, "also write the report here");
  ev->add_flag("--degrees", cfg.degrees, "truth angles in deg");

  // dump-system
  CLI::App* dump =
      app.add_subcommand("dump-system", "write the assembled system of one window");
  std::size_t dump_window = 3;
  dump->add_option("--in", cfg.input_path, "input sample CSV")->required();
  dump->add_option("--out", cfg.output_path, "output triplet file")->required();
  dump->add_option("--start", cfg.start, "first sample of the window")
      ->capture_default_str();
  dump->add_option("--window", dump_window, "window length")->capture_default_str();
  dump->add_flag("--degrees", cfg.degrees, "input angles in deg");
  AddVehicleOptions(dump, cfg.params);
  AddNoiseOptions(dump, cfg.noise);
  AddInitialOptions(dump, cfg.initial_state);

  std::vector<const char*> cargs;
  for (const auto& a : args) cargs.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::ParseError& e) {
    const int status = app.exit(e, out, err);
    return status == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) {
      cfg.command = Command::kSimulate;
      if (!speed_steps.empty()) {
        cfg.sim.speed.segments = ParseBreakpoints(speed_steps, "--speed-steps");
      } else {
        cfg.sim.speed.segments = {{0.0, speed}};
      }
      if (steer_kind == "constant") {
        cfg.sim.steering = ConstantSteer{steer_value};
      } else if (steer_kind == "sine") {
        cfg.sim.steering = SineSteer{steer_amplitude, steer_period};
      } else {
        cfg.sim.steering = StepSteer{ParseBreakpoints(steer_steps, "--steer-steps")};
      }
    } else if (est->parsed()) {
      cfg.command = Command::kEstimate;
      cfg.mode = *ParseEstimateMode(mode_name);
    } else if (ev->parsed()) {
      cfg.command = Command::kEval;
      for (const std::string& s : series_args) {
        const auto eq = s.find('=');
        if (eq != std::string::npos) {
          cfg.series.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        } else {
          cfg.series.emplace_back(
              std::string(ToString(io::ReadEstimates(s).mode)), s);
        }
      }
    } else {
      cfg.command = Command::kDumpSystem;
      cfg.window = dump_window;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return Run(cfg, out, err);
}

}  // namespace sideslip::cli
