#include "marsgames/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "marsgames/errors.hpp"
#include "marsgames/mars_vi.hpp"
#include "marsgames/regret_eval.hpp"

namespace marsgames {

namespace fs = std::filesystem;

LogLevel log_level() {
  const char* env = std::getenv("MARS_GAMES_LOG");
  if (env == nullptr) return LogLevel::kInfo;
  const std::string value(env);
  if (value == "error") return LogLevel::kError;
  if (value == "warn") return LogLevel::kWarn;
  if (value == "debug") return LogLevel::kDebug;
  return LogLevel::kInfo;
}

void log(LogLevel level, const std::string& message) {
  if (level > log_level()) return;
  static std::mutex mutex;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::lock_guard<std::mutex> lock(mutex);
  std::cerr << "[" << names[static_cast<int>(level)] << "] " << message << '\n';
}

namespace {

const char* const kConfigFields[] = {
    "instance", "K",       "solver",       "C",          "delta",
    "snapshot_stride",     "seeds",        "output_dir", "regret_kinds",
    "workers",  "slope_window", "mode",    "static_policy"};

template <typename T>
T get_field(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config field '") + key + "': " + e.what());
  }
}

std::string mode_name(RunMode mode) { return mode == RunMode::kLearn ? "learn" : "static"; }

}  // namespace

ExperimentConfig config_from_json(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(std::begin(kConfigFields), std::end(kConfigFields), key) ==
        std::end(kConfigFields)) {
      throw ParseError("unknown config field '" + key + "'");
    }
  }
  ExperimentConfig cfg;
  if (!doc.contains("instance")) throw ParseError("config field 'instance' is required");
  if (!doc.contains("K")) throw ParseError("config field 'K' is required");
  const json& instance = doc.at("instance");
  if (instance.is_string()) {
    fs::path path = instance.get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    cfg.instance_file = path;
  } else if (instance.is_object()) {
    cfg.instance = instance;
  } else {
    throw ParseError("config field 'instance' must be an object or a file path");
  }
  cfg.episodes = get_field<int>(doc, "K");
  if (doc.contains("solver")) cfg.solver = parse_equilibrium_kind(get_field<std::string>(doc, "solver"));
  if (doc.contains("C")) cfg.bonus_scale = get_field<double>(doc, "C");
  if (doc.contains("delta")) cfg.delta = get_field<double>(doc, "delta");
  if (doc.contains("snapshot_stride")) cfg.snapshot_stride = get_field<int>(doc, "snapshot_stride");
  if (doc.contains("seeds")) cfg.seeds = get_field<std::vector<uint64_t>>(doc, "seeds");
  if (doc.contains("output_dir")) cfg.output_dir = get_field<std::string>(doc, "output_dir");
  if (doc.contains("regret_kinds")) {
    for (const auto& k : get_field<std::vector<std::string>>(doc, "regret_kinds")) {
      cfg.regret_kinds.push_back(parse_equilibrium_kind(k));
    }
  } else {
    cfg.regret_kinds = {cfg.solver};
  }
  if (doc.contains("workers")) cfg.workers = get_field<int>(doc, "workers");
  if (doc.contains("slope_window")) cfg.slope_window = get_field<double>(doc, "slope_window");
  if (doc.contains("mode")) {
    const auto mode = get_field<std::string>(doc, "mode");
    if (mode == "learn") {
      cfg.mode = RunMode::kLearn;
    } else if (mode == "static") {
      cfg.mode = RunMode::kStatic;
    } else {
      throw ParseError("config field 'mode': expected learn or static");
    }
  }
  if (doc.contains("static_policy")) {
    cfg.static_policy = get_field<std::string>(doc, "static_policy");
    if (cfg.static_policy != "fixture" && fs::path(cfg.static_policy).is_relative() &&
        !base_dir.empty()) {
      cfg.static_policy = (base_dir / cfg.static_policy).string();
    }
  }

  std::vector<std::string> problems;
  if (cfg.episodes < 1) problems.push_back("K must be >= 1");
  if (cfg.seeds.empty()) problems.push_back("seeds must be nonempty");
  if (!(cfg.bonus_scale > 0.0)) problems.push_back("C must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) problems.push_back("delta must lie in (0, 1]");
  if (cfg.snapshot_stride < 1) problems.push_back("snapshot_stride must be >= 1");
  if (cfg.workers < 1) problems.push_back("workers must be >= 1");
  if (!(cfg.slope_window > 0.0 && cfg.slope_window <= 1.0)) {
    problems.push_back("slope_window must lie in (0, 1]");
  }
  if (cfg.regret_kinds.empty()) problems.push_back("regret_kinds must be nonempty");
  if (cfg.instance_file && !fs::exists(*cfg.instance_file)) {
    problems.push_back("instance file " + cfg.instance_file->string() + " does not exist");
  }
  if (cfg.mode == RunMode::kStatic && cfg.static_policy != "fixture" &&
      !fs::exists(cfg.static_policy)) {
    problems.push_back("static policy file " + cfg.static_policy + " does not exist");
  }
  if (!cfg.instance_file) {
    try {
      make_instance(cfg.instance);
    } catch (const Error& e) {
      problems.push_back(std::string("instance: ") + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid config:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

json config_to_json(const ExperimentConfig& cfg) {
  std::vector<std::string> kinds;
  for (auto k : cfg.regret_kinds) kinds.push_back(to_string(k));
  json out{{"instance", cfg.instance_file ? json(cfg.instance_file->string()) : cfg.instance},
           {"K", cfg.episodes},
           {"solver", to_string(cfg.solver)},
           {"C", cfg.bonus_scale},
           {"delta", cfg.delta},
           {"snapshot_stride", cfg.snapshot_stride},
           {"seeds", cfg.seeds},
           {"output_dir", cfg.output_dir.string()},
           {"regret_kinds", kinds},
           {"workers", cfg.workers},
           {"slope_window", cfg.slope_window},
           {"mode", mode_name(cfg.mode)},
           {"static_policy", cfg.static_policy}};
  return out;
}

double fit_slope(const std::vector<std::pair<double, double>>& series, double window) {
  if (series.size() < 8) {
    throw InsufficientData("slope fit needs at least 8 points, got " +
                           std::to_string(series.size()));
  }
  if (!(window > 0.0 && window <= 1.0)) throw DomainError("slope window must lie in (0, 1]");
  const size_t n = series.size();
  const size_t start = static_cast<size_t>(std::floor(n * (1.0 - window)));
  if (n - start < 2) throw InsufficientData("slope window holds fewer than 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(n - start);
  for (size_t i = start; i < n; ++i) {
    const auto [k, v] = series[i];
    if (!(k > 0.0 && v > 0.0)) throw DomainError("slope fit needs positive coordinates");
    const double x = std::log(k), y = std::log(v);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = count * sxx - sx * sx;
  if (!(denom > 0.0)) throw InsufficientData("slope window has no spread in k");
  return (count * sxy - sx * sy) / denom;
}

std::vector<std::pair<double, double>> read_csv_series(const fs::path& path,
                                                       const std::string& column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  const auto header = split(line);
  const auto find = [&](const std::string& name) -> size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(path.string() + ": no column '" + name + "'");
    return static_cast<size_t>(it - header.begin());
  };
  const size_t k_col = find("episode"), v_col = find(column);
  std::vector<std::pair<double, double>> series;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() <= std::max(k_col, v_col) || cells[v_col].empty()) continue;
    try {
      series.emplace_back(std::stod(cells[k_col]), std::stod(cells[v_col]));
    } catch (const std::exception&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return series;
}

bool RunSummary::ok() const {
  return std::all_of(seeds.begin(), seeds.end(), [](const SeedSummary& s) { return !s.error; });
}

namespace {

std::string format_number(double value) {
  char buf[40];
  // Adding +0.0 turns -0 into 0.
  std::snprintf(buf, sizeof(buf), "%.17g", value + 0.0);
  return buf;
}

std::string series_file(const RegretLedger& ledger, bool balanced) {
  std::string out;
  for (const auto& row : ledger.rows) {
    out += std::to_string(row.episode) + " " +
           format_number(balanced ? row.balanced_cum : row.naive_cum) + "\n";
  }
  return out;
}

std::optional<double> ledger_slope(const RegretLedger& ledger, double window) {
  std::vector<std::pair<double, double>> series;
  for (const auto& row : ledger.rows) series.emplace_back(row.episode, row.balanced_cum);
  try {
    return fit_slope(series, window);
  } catch (const Error&) {
    return std::nullopt;
  }
}

struct ResolvedInstance {
  InstanceDescriptor descriptor;
  std::optional<JointPolicy> static_policy;
};

ResolvedInstance resolve(const ExperimentConfig& cfg) {
  ResolvedInstance out;
  if (cfg.instance_file) {
    out.descriptor.kind = "file";
    out.descriptor.params = json{{"kind", "file"}, {"path", cfg.instance_file->string()}};
    out.descriptor.spec = spec_from_json(read_json_file(*cfg.instance_file));
  } else {
    out.descriptor = make_instance(cfg.instance);
  }
  require_valid(out.descriptor.spec);
  if (cfg.mode == RunMode::kStatic) {
    if (cfg.static_policy == "fixture") {
      if (!out.descriptor.fixture_policy) {
        throw ValidationError("instance defines no fixture policy for static mode");
      }
      out.static_policy = out.descriptor.fixture_policy;
    } else {
      out.static_policy = policy_from_json(read_json_file(cfg.static_policy));
    }
    const auto problems = validate_policy(out.descriptor.spec, *out.static_policy);
    if (!problems.empty()) throw ValidationError("static policy: " + problems.front());
  }
  return out;
}

std::string learner_csv(const RunResult& result, int num_agents) {
  std::string out = "episode";
  for (int m = 1; m <= num_agents; ++m) out += ",v_upper_" + std::to_string(m);
  for (int m = 1; m <= num_agents; ++m) out += ",v_lower_" + std::to_string(m);
  out += ",gap_statistic,raw_gap,delta_v,certified\n";
  for (const auto& r : result.records) {
    out += std::to_string(r.episode);
    for (double v : r.v_upper) out += "," + format_number(v);
    for (double v : r.v_lower) out += "," + format_number(v);
    out += "," + format_number(r.gap_statistic) + "," + format_number(r.raw_gap) + "," +
           format_number(r.delta_v) + "," + (r.certified ? "1" : "0") + "\n";
  }
  return out;
}

SeedSummary run_seed(const ExperimentConfig& cfg, const ResolvedInstance& inst,
                     uint64_t seed) {
  const auto started = std::chrono::steady_clock::now();
  SeedSummary summary;
  summary.seed = seed;
  const MGSpec& spec = inst.descriptor.spec;
  const fs::path dir = cfg.output_dir / ("seed_" + std::to_string(seed));
  fs::create_directories(dir);

  std::vector<RegretLedger> ledgers;
  for (auto kind : cfg.regret_kinds) ledgers.emplace_back(kind, spec.betas, spec.horizon);

  if (cfg.mode == RunMode::kStatic) {
    for (auto& ledger : ledgers) {
      const auto gaps = episode_gaps(spec, *inst.static_policy, ledger.kind);
      for (int k = 1; k <= cfg.episodes; k += cfg.snapshot_stride) {
        accumulate(ledger, k, gaps, std::min(cfg.snapshot_stride, cfg.episodes - k + 1));
      }
    }
  } else {
    LearnerConfig lc;
    lc.solver = cfg.solver;
    lc.bonus_scale = cfg.bonus_scale;
    lc.delta = cfg.delta;
    lc.episodes = cfg.episodes;
    lc.seed = seed;
    lc.snapshot_stride = cfg.snapshot_stride;
    const auto result = run(spec, lc);
    for (auto& ledger : ledgers) {
      const JointPolicy* previous = nullptr;
      std::vector<double> gaps;
      for (const auto& snap : result.snapshots) {
        if (snap.policy.get() != previous) {
          gaps = episode_gaps(spec, *snap.policy, ledger.kind);
          previous = snap.policy.get();
        }
        auto& row = accumulate(ledger, snap.episode, gaps, snap.weight);
        const auto& record = result.records[row.episode - 1];
        row.delta_v = record.delta_v;
        if (result.records[snap.episode - 1].certified && snap.weight == 1) {
          row.eps_certified = row.balanced_inc;
        }
      }
    }
    summary.delta_v = result.certified.delta_v;
    summary.certified_episode = result.certified.episode;
    summary.certified_eps = certify_approx(spec, *result.certified.policy, cfg.solver);
    write_text_file(dir / "learner.csv", learner_csv(result, spec.num_agents()));
    write_text_file(dir / "certified_policy.json",
                    policy_to_json(*result.certified.policy).dump(2) + "\n");
  }

  for (const auto& ledger : ledgers) {
    const std::string kind = to_string(ledger.kind);
    write_text_file(dir / ("regret_" + kind + ".csv"), ledger_to_csv(ledger));
    write_text_file(dir / (kind + "_naive_cum.dat"), series_file(ledger, false));
    write_text_file(dir / (kind + "_balanced_cum.dat"), series_file(ledger, true));
    summary.kinds.push_back({ledger.kind, ledger.naive_cum, ledger.balanced_cum,
                             ledger_slope(ledger, cfg.slope_window)});
  }
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return summary;
}

Aggregate aggregate(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  Aggregate out;
  out.min = values.front();
  out.max = values.back();
  const size_t n = values.size();
  out.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return out;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary_to_json(const ExperimentConfig& cfg, const ResolvedInstance& inst,
                     const RunSummary& summary) {
  json seeds = json::array();
  for (const auto& s : summary.seeds) {
    json kinds = json::object();
    for (const auto& k : s.kinds) {
      kinds[to_string(k.kind)] = {{"naive_cum", k.naive_cum},
                                  {"balanced_cum", k.balanced_cum},
                                  {"slope", optional_json(k.slope)}};
    }
    json entry{{"seed", s.seed},
               {"regret", kinds},
               {"certified_eps", optional_json(s.certified_eps)},
               {"delta_v", optional_json(s.delta_v)},
               {"certified_episode", s.certified_episode ? json(*s.certified_episode) : json(nullptr)}};
    if (s.error) entry["error"] = *s.error;
    seeds.push_back(std::move(entry));
  }
  json aggregates = json::object();
  for (const auto& [name, agg] : summary.aggregates) {
    aggregates[name] = {{"median", agg.median}, {"min", agg.min}, {"max", agg.max}};
  }
  json config = config_to_json(cfg);
  // Neither the worker count nor the destination influences results.
  config.erase("workers");
  config.erase("output_dir");
  return json{{"config", std::move(config)},
              {"instance", descriptor_to_json(inst.descriptor)},
              {"cumulative_extension",
               cfg.snapshot_stride > 1 ? "piecewise_constant" : "exact"},
              {"seeds", std::move(seeds)},
              {"aggregates", std::move(aggregates)}};
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
  const auto started = std::chrono::steady_clock::now();
  const ResolvedInstance inst = resolve(cfg);
  fs::create_directories(cfg.output_dir);
  write_text_file(cfg.output_dir / "spec.json", spec_to_json(inst.descriptor.spec).dump() + "\n");

  RunSummary summary;
  summary.seeds.resize(cfg.seeds.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next++; i < cfg.seeds.size(); i = next++) {
      const uint64_t seed = cfg.seeds[i];
      log(LogLevel::kInfo, "seed " + std::to_string(seed) + ": starting");
      try {
        summary.seeds[i] = run_seed(cfg, inst, seed);
        log(LogLevel::kInfo, "seed " + std::to_string(seed) + ": done");
      } catch (const std::exception& e) {
        summary.seeds[i].seed = seed;
        summary.seeds[i].error = e.what();
        log(LogLevel::kError, "seed " + std::to_string(seed) + ": " + e.what());
      }
    }
  };
  const int threads = std::min<int>(cfg.workers, static_cast<int>(cfg.seeds.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  auto collect = [&](const std::string& name, auto getter) {
    std::vector<double> values;
    for (const auto& s : summary.seeds) {
      if (s.error) continue;
      if (auto v = getter(s)) values.push_back(*v);
    }
    if (!values.empty()) summary.aggregates.emplace_back(name, aggregate(values));
  };
  for (size_t j = 0; j < cfg.regret_kinds.size(); ++j) {
    const std::string kind = to_string(cfg.regret_kinds[j]);
    collect(kind + ".naive_cum", [j](const SeedSummary& s) -> std::optional<double> {
      return s.kinds[j].naive_cum;
    });
    collect(kind + ".balanced_cum", [j](const SeedSummary& s) -> std::optional<double> {
      return s.kinds[j].balanced_cum;
    });
    collect(kind + ".slope", [j](const SeedSummary& s) { return s.kinds[j].slope; });
  }
  collect("certified_eps", [](const SeedSummary& s) { return s.certified_eps; });
  collect("delta_v", [](const SeedSummary& s) { return s.delta_v; });

  write_text_file(cfg.output_dir / "summary.json",
                  summary_to_json(cfg, inst, summary).dump(2) + "\n");
  json timing{{"total_seconds",
               std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()},
              {"seeds", json::array()}};
  for (const auto& s : summary.seeds) {
    timing["seeds"].push_back({{"seed", s.seed}, {"wall_seconds", s.wall_seconds}});
  }
  write_text_file(cfg.output_dir / "timing.json", timing.dump(2) + "\n");
  return summary;
}

}  // namespace marsgames
