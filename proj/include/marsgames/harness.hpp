#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "marsgames/eq_solvers.hpp"
#include "marsgames/instances.hpp"
#include "marsgames/io.hpp"

namespace marsgames {

enum class RunMode { kLearn, kStatic };

struct ExperimentConfig {
  // Either generator parameters or a path to an MGSpec JSON document.
  json instance;
  std::optional<std::filesystem::path> instance_file;
  int episodes = 0;  // K
  EquilibriumKind solver = EquilibriumKind::kCCE;
  double bonus_scale = 1.0;
  double delta = 0.1;
  int snapshot_stride = 1;
  std::vector<uint64_t> seeds{0};
  std::filesystem::path output_dir = "results";
  std::vector<EquilibriumKind> regret_kinds;  // defaults to {solver}
  int workers = 1;
  double slope_window = 0.5;  // trailing fraction of the grid used by fit_slope
  RunMode mode = RunMode::kLearn;
  // Static mode: "fixture" or a path to a policy JSON document.
  std::string static_policy = "fixture";
};

// Parses and validates a JSON config. Unknown fields raise ParseError;
// invalid values raise ValidationError listing every problem. Relative paths
// are resolved against the config file's directory.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig config_from_json(const json& doc,
                                  const std::filesystem::path& base_dir = {});
json config_to_json(const ExperimentConfig& config);

struct KindSummary {
  EquilibriumKind kind = EquilibriumKind::kCCE;
  double naive_cum = 0.0;
  double balanced_cum = 0.0;
  std::optional<double> slope;  // log-log slope of balanced_cum
};

struct SeedSummary {
  uint64_t seed = 0;
  std::vector<KindSummary> kinds;
  std::optional<double> certified_eps;  // certify_approx of the output policy
  std::optional<double> delta_v;
  std::optional<int> certified_episode;
  double wall_seconds = 0.0;
  std::optional<std::string> error;
};

struct Aggregate {
  double median = 0.0, min = 0.0, max = 0.0;
};

struct RunSummary {
  std::vector<SeedSummary> seeds;
  // Keyed by "<kind>.naive_cum", "<kind>.balanced_cum", "<kind>.slope",
  // "certified_eps", "delta_v".
  std::vector<std::pair<std::string, Aggregate>> aggregates;
  bool ok() const;
};

// Runs every seed, writes per-seed CSV and plot data files plus
// summary.json (deterministic) and timing.json (wall clock) to output_dir.
RunSummary run_experiment(const ExperimentConfig& config);

// OLS slope of log(value) on log(k) over the trailing `window` fraction of
// the series. Needs at least 8 points (InsufficientData) and positive
// coordinates inside the window (DomainError).
double fit_slope(const std::vector<std::pair<double, double>>& series,
                 double window = 0.5);

// Reads (episode, column) pairs from a regret CSV.
std::vector<std::pair<double, double>> read_csv_series(
    const std::filesystem::path& path, const std::string& column);

// Verbosity from MARS_GAMES_LOG: error, warn, info (default), debug.
enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };
LogLevel log_level();
void log(LogLevel level, const std::string& message);

}  // namespace marsgames
