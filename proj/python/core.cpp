// Python bindings. Structured values cross the boundary as JSON text; the
// marsgames package converts them to and from dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "marsgames/errors.hpp"
#include "marsgames/harness.hpp"
#include "marsgames/instances.hpp"
#include "marsgames/io.hpp"
#include "marsgames/mars_vi.hpp"
#include "marsgames/regret_eval.hpp"
#include "marsgames/risk_dp.hpp"

namespace py = pybind11;
using namespace marsgames;

namespace {

MGSpec load_spec(const std::string& text) {
  MGSpec spec = spec_from_json(json::parse(text));
  require_valid(spec);
  return spec;
}

JointPolicy load_policy(const MGSpec& spec, const std::string& text) {
  JointPolicy policy = policy_from_json(json::parse(text));
  const auto problems = validate_policy(spec, policy);
  if (!problems.empty()) throw ValidationError("policy: " + problems.front());
  return policy;
}

std::string instance(const std::string& params) {
  const auto d = make_instance(json::parse(params));
  json out{{"kind", d.kind}, {"params", d.params}, {"spec", spec_to_json(d.spec)}};
  if (d.fixture_policy) out["fixture_policy"] = policy_to_json(*d.fixture_policy);
  return out.dump();
}

double value(const std::string& spec_text, const std::string& policy_text, int m,
             const std::string& which) {
  const MGSpec spec = load_spec(spec_text);
  const JointPolicy policy = load_policy(spec, policy_text);
  if (m < 0 || m >= spec.num_agents()) throw IndexError("agent index out of range");
  if (which == "eval") return initial_value(spec, eval_policy(spec, policy, m));
  if (which == "best_response") return initial_value(spec, best_response(spec, policy, m).table);
  if (which == "best_modification") {
    return initial_value(spec, best_modification(spec, policy, m).table);
  }
  throw ParameterError("unknown value kind '" + which + "'");
}

std::vector<double> gaps(const std::string& spec_text, const std::string& policy_text,
                         const std::string& kind) {
  const MGSpec spec = load_spec(spec_text);
  return episode_gaps(spec, load_policy(spec, policy_text), parse_equilibrium_kind(kind));
}

double certify_policy(const std::string& spec_text, const std::string& policy_text,
               const std::string& kind) {
  const MGSpec spec = load_spec(spec_text);
  return certify_approx(spec, load_policy(spec, policy_text), parse_equilibrium_kind(kind));
}

std::string solve(const std::string& game_text, const std::string& kind) {
  const GameMatrix game = game_from_json(json::parse(game_text));
  const auto eq = solve_equilibrium(game, parse_equilibrium_kind(kind));
  return json{{"probs", eq.probs}, {"kind", to_string(eq.kind)},
              {"max_violation", eq.max_violation}}
      .dump();
}

double verify_game(const std::string& game_text, const std::vector<double>& probs,
                   const std::string& kind) {
  return verify(game_from_json(json::parse(game_text)), probs, parse_equilibrium_kind(kind));
}

std::string learn(const std::string& spec_text, const std::string& kind, double bonus_scale,
                  double delta, int episodes, uint64_t seed) {
  const MGSpec spec = load_spec(spec_text);
  LearnerConfig cfg;
  cfg.solver = parse_equilibrium_kind(kind);
  cfg.bonus_scale = bonus_scale;
  cfg.delta = delta;
  cfg.episodes = episodes;
  cfg.seed = seed;
  const auto result = run(spec, cfg);
  json records = json::array();
  for (const auto& r : result.records) {
    records.push_back({{"episode", r.episode},
                       {"v_upper", r.v_upper},
                       {"v_lower", r.v_lower},
                       {"gap_statistic", r.gap_statistic},
                       {"raw_gap", r.raw_gap},
                       {"delta_v", r.delta_v},
                       {"certified", r.certified}});
  }
  json out{{"records", records},
           {"delta_v", result.certified.delta_v},
           {"certified_episode", result.certified.episode},
           {"final_policy", policy_to_json(result.final_state.policy())}};
  if (result.certified.policy) out["certified_policy"] = policy_to_json(*result.certified.policy);
  return out.dump();
}

std::string experiment(const std::string& config_text) {
  const auto cfg = config_from_json(json::parse(config_text));
  const auto summary = run_experiment(cfg);
  json out = read_json_file(cfg.output_dir / "summary.json");
  out["ok"] = summary.ok();
  return out.dump();
}

double slope(const std::vector<double>& xs, const std::vector<double>& ys, double window) {
  if (xs.size() != ys.size()) throw ParameterError("x and y lengths differ");
  std::vector<std::pair<double, double>> series;
  for (size_t i = 0; i < xs.size(); ++i) series.emplace_back(xs[i], ys[i]);
  return fit_slope(series, window);
}

}  // namespace

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Risk-sensitive Markov game core";

  auto base = py::register_exception<Error>(mod, "MarsGamesError", PyExc_RuntimeError);
  py::register_exception<ParameterError>(mod, "ParameterError", base.ptr());
  py::register_exception<ValidationError>(mod, "ValidationError", base.ptr());
  py::register_exception<ParseError>(mod, "ParseError", base.ptr());
  py::register_exception<DomainError>(mod, "DomainError", base.ptr());
  py::register_exception<SolverFailure>(mod, "SolverFailure", base.ptr());
  py::register_exception<NotProductPolicy>(mod, "NotProductPolicy", base.ptr());
  py::register_exception<InsufficientData>(mod, "InsufficientData", base.ptr());

  mod.def("phi", &phi, py::arg("u"), py::arg("beta"));
  mod.def("make_instance", &instance, py::arg("params_json"));
  mod.def("value", &value, py::arg("spec_json"), py::arg("policy_json"), py::arg("agent"),
          py::arg("which"));
  mod.def("episode_gaps", &gaps, py::arg("spec_json"), py::arg("policy_json"), py::arg("kind"));
  mod.def("certify_approx", &certify_policy, py::arg("spec_json"), py::arg("policy_json"),
          py::arg("kind"));
  mod.def("solve", &solve, py::arg("game_json"), py::arg("kind"));
  mod.def("verify", &verify_game, py::arg("game_json"), py::arg("probs"), py::arg("kind"));
  mod.def("learn", &learn, py::arg("spec_json"), py::arg("kind"), py::arg("bonus_scale"),
          py::arg("delta"), py::arg("episodes"), py::arg("seed"),
          py::call_guard<py::gil_scoped_release>());
  mod.def("run_experiment", &experiment, py::arg("config_json"),
          py::call_guard<py::gil_scoped_release>());
  mod.def("fit_slope", &slope, py::arg("xs"), py::arg("ys"), py::arg("window") = 0.5);
}
