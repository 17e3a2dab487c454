// Command-line front end: gen, run, eval, slope.
//
// Exit codes: 0 success, 1 config/usage error, 2 runtime failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "marsgames/errors.hpp"
#include "marsgames/harness.hpp"
#include "marsgames/instances.hpp"
#include "marsgames/io.hpp"
#include "marsgames/regret_eval.hpp"
#include "marsgames/risk_dp.hpp"

namespace fs = std::filesystem;
using namespace marsgames;

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct GenOptions {
  std::string kind;
  std::vector<double> betas;
  int horizon = 3;
  int episodes = 1000;
  double beta_star = 1.0;
  int machine = 1;
  std::string regime = "exp";
  uint64_t seed = 0;
  int states = 2;
  std::vector<int> actions{2, 2};
  double sparsity = 0.0;
  std::string out;
};

fs::path sidecar(const fs::path& out, const std::string& suffix) {
  fs::path p = out;
  p.replace_extension();
  return p.string() + suffix;
}

int do_gen(const GenOptions& opt) {
  json params{{"kind", opt.kind}};
  if (opt.kind == "bias") {
    params["betas"] = opt.betas;
    params["H"] = opt.horizon;
    params["K"] = opt.episodes;
  } else if (opt.kind == "lower_bound") {
    params["beta_star"] = opt.beta_star;
    params["H"] = opt.horizon;
    params["K"] = opt.episodes;
    params["machine"] = opt.machine;
    params["regime"] = opt.regime;
    params["other_betas"] = opt.betas;
  } else {
    params["seed"] = opt.seed;
    params["S"] = opt.states;
    params["H"] = opt.horizon;
    params["action_sizes"] = opt.actions;
    params["betas"] = opt.betas.empty() ? std::vector<double>(opt.actions.size(), 0.5)
                                        : opt.betas;
    params["sparsity"] = opt.sparsity;
  }
  const auto descriptor = make_instance(params);
  const fs::path out(opt.out);
  write_text_file(out, spec_to_json(descriptor.spec).dump() + "\n");
  write_text_file(sidecar(out, ".descriptor.json"),
                  json{{"kind", descriptor.kind}, {"params", descriptor.params}}.dump(2) + "\n");
  if (descriptor.fixture_policy) {
    write_text_file(sidecar(out, ".policy.json"),
                    policy_to_json(*descriptor.fixture_policy).dump(2) + "\n");
  }
  return 0;
}

int do_eval(const std::string& spec_path, const std::string& policy_path,
            const std::string& kind_text) {
  const auto kind = parse_equilibrium_kind(kind_text);
  const MGSpec spec = spec_from_json(read_json_file(spec_path));
  require_valid(spec);
  const JointPolicy policy = policy_from_json(read_json_file(policy_path));
  const auto problems = validate_policy(spec, policy);
  if (!problems.empty()) throw ValidationError("policy: " + problems.front());
  const auto gaps = episode_gaps(spec, policy, kind);
  std::vector<double> values, normalized;
  for (int m = 0; m < spec.num_agents(); ++m) {
    values.push_back(initial_value(spec, eval_policy(spec, policy, m)));
    normalized.push_back(gaps[m] / phi(spec.horizon, spec.betas[m]));
  }
  json out{{"kind", to_string(kind)},
           {"values", values},
           {"gaps", gaps},
           {"normalized_gaps", normalized},
           {"eps", certify_approx(spec, policy, kind)}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive Markov game learner and experiment harness"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a game instance");
  gen_cmd->add_option("--kind", gen.kind, "bias | lower_bound | random")
      ->required()
      ->check(CLI::IsMember({"bias", "lower_bound", "random"}));
  gen_cmd->add_option("--betas", gen.betas, "Risk parameters (bias, random) or other agents' betas (lower_bound)")
      ->delimiter(',');
  gen_cmd->add_option("--horizon,-H", gen.horizon, "Horizon H");
  gen_cmd->add_option("--episodes,-K", gen.episodes, "Episode count K the instance is tuned for");
  gen_cmd->add_option("--beta-star", gen.beta_star, "Risk parameter of the most sensitive agent");
  gen_cmd->add_option("--machine", gen.machine, "Bandit machine 1 or 2")->check(CLI::Range(1, 2));
  gen_cmd->add_option("--regime", gen.regime, "exp | inv_h")->check(CLI::IsMember({"exp", "inv_h"}));
  gen_cmd->add_option("--seed", gen.seed, "Generator seed");
  gen_cmd->add_option("--states,-S", gen.states, "State count");
  gen_cmd->add_option("--actions", gen.actions, "Per-agent action counts")->delimiter(',');
  gen_cmd->add_option("--sparsity", gen.sparsity, "Fraction of zeroed transition entries");
  gen_cmd->add_option("--out,-o", gen.out, "Output MGSpec JSON")->required();

  std::string config_path, out_dir;
  int workers = 0;
  auto* run_cmd = app.add_subcommand("run", "Run an experiment config");
  run_cmd->add_option("--config,-c", config_path, "Experiment config JSON")->required();
  run_cmd->add_option("--out", out_dir, "Override the output directory");
  run_cmd->add_option("--workers", workers, "Override the worker count");

  std::string spec_path, policy_path, kind = "cce";
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a fixed policy's equilibrium gaps");
  eval_cmd->add_option("--spec", spec_path, "MGSpec JSON")->required();
  eval_cmd->add_option("--policy", policy_path, "Policy JSON")->required();
  eval_cmd->add_option("--kind", kind, "ne | ce | cce")->check(CLI::IsMember({"ne", "ce", "cce"}));

  std::string csv_path, column = "balanced_cum";
  double window = 0.5;
  auto* slope_cmd = app.add_subcommand("slope", "Fit a log-log slope to a regret CSV column");
  slope_cmd->add_option("--csv", csv_path, "Regret CSV")->required();
  slope_cmd->add_option("--column", column, "Column to fit");
  slope_cmd->add_option("--window", window, "Trailing fraction of rows used");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*gen_cmd) return do_gen(gen);
    if (*run_cmd) {
      ExperimentConfig cfg = load_config(config_path);
      if (!out_dir.empty()) cfg.output_dir = out_dir;
      if (workers > 0) cfg.workers = workers;
      const auto summary = run_experiment(cfg);
      log(LogLevel::kInfo, "wrote " + (cfg.output_dir / "summary.json").string());
      return summary.ok() ? 0 : kRuntimeError;
    }
    if (*eval_cmd) return do_eval(spec_path, policy_path, kind);
    if (*slope_cmd) {
      std::cout.precision(17);
      std::cout << fit_slope(read_csv_series(csv_path, column), window) << '\n';
      return 0;
    }
  } catch (const ParseError& e) {
    log(LogLevel::kError, e.what());
    return kConfigError;
  } catch (const ValidationError& e) {
    log(LogLevel::kError, e.what());
    return kConfigError;
  } catch (const ParameterError& e) {
    log(LogLevel::kError, e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    log(LogLevel::kError, e.what());
    return kRuntimeError;
  }
  return 0;
}
