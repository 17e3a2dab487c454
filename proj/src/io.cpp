#include "marsgames/io.hpp"

#include <fstream>
#include <sstream>

#include "marsgames/errors.hpp"

namespace marsgames {

namespace {

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

const json& nested(const json& node, size_t index, size_t expected,
                   const std::string& path) {
  if (!node.is_array() || node.size() != expected) {
    throw ParseError("array '" + path + "' must have length " +
                     std::to_string(expected));
  }
  return node[index];
}

double number(const json& node, const std::string& path) {
  if (!node.is_number()) throw ParseError("'" + path + "' must be a number");
  return node.get<double>();
}

}  // namespace

json spec_to_json(const MGSpec& spec) {
  const int H = spec.horizon, S = spec.num_states, A = spec.joint_actions(),
            M = spec.num_agents();
  json transitions = json::array();
  json rewards = json::array();
  for (int h = 0; h < H; ++h) {
    json th = json::array();
    for (int s = 0; s < S; ++s) {
      json ts = json::array();
      for (int a = 0; a < A; ++a) {
        const auto row = spec.transition_row(h, s, a);
        ts.push_back(std::vector<double>(row.begin(), row.end()));
      }
      th.push_back(std::move(ts));
    }
    transitions.push_back(std::move(th));
    json rh = json::array();
    for (int m = 0; m < M; ++m) {
      json rm = json::array();
      for (int s = 0; s < S; ++s) {
        std::vector<double> row(A);
        for (int a = 0; a < A; ++a) row[a] = spec.reward(h, m, s, a);
        rm.push_back(std::move(row));
      }
      rh.push_back(std::move(rm));
    }
    rewards.push_back(std::move(rh));
  }
  return json{{"H", H},
              {"S", S},
              {"action_sizes", spec.action_sizes},
              {"betas", spec.betas},
              {"initial_state", spec.initial_state},
              {"encoding", kJointEncoding},
              {"transitions", std::move(transitions)},
              {"rewards", std::move(rewards)}};
}

MGSpec spec_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("Markov game document must be an object");
  if (doc.contains("encoding") && doc.at("encoding") != kJointEncoding) {
    throw ParseError("unsupported joint action encoding");
  }
  const int H = field<int>(doc, "H");
  const int S = field<int>(doc, "S");
  auto sizes = field<std::vector<int>>(doc, "action_sizes");
  auto betas = field<std::vector<double>>(doc, "betas");
  const int s0 = field<int>(doc, "initial_state");
  if (H < 1 || S < 1 || sizes.empty()) throw ParseError("H, S and action_sizes must be positive");
  for (int n : sizes) {
    if (n < 1) throw ParseError("action set sizes must be positive");
  }
  MGSpec spec(H, S, sizes, betas, s0);
  const int A = spec.joint_actions(), M = spec.num_agents();
  const json& transitions = doc.contains("transitions") ? doc.at("transitions") : json();
  const json& rewards = doc.contains("rewards") ? doc.at("rewards") : json();
  for (int h = 0; h < H; ++h) {
    const auto& th = nested(transitions, h, H, "transitions");
    for (int s = 0; s < S; ++s) {
      const auto& ts = nested(th, s, S, "transitions[h]");
      for (int a = 0; a < A; ++a) {
        const auto& ta = nested(ts, a, A, "transitions[h][s]");
        for (int s2 = 0; s2 < S; ++s2) {
          spec.transition(h, s, a, s2) =
              number(nested(ta, s2, S, "transitions[h][s][a]"), "transitions");
        }
      }
    }
    const auto& rh = nested(rewards, h, H, "rewards");
    for (int m = 0; m < M; ++m) {
      const auto& rm = nested(rh, m, M, "rewards[h]");
      for (int s = 0; s < S; ++s) {
        const auto& rs = nested(rm, s, S, "rewards[h][m]");
        for (int a = 0; a < A; ++a) {
          spec.reward(h, m, s, a) = number(nested(rs, a, A, "rewards[h][m][s]"), "rewards");
        }
      }
    }
  }
  return spec;
}

json policy_to_json(const JointPolicy& policy) {
  json dist = json::array();
  for (int h = 0; h < policy.horizon; ++h) {
    json dh = json::array();
    for (int s = 0; s < policy.num_states; ++s) {
      const auto row = policy.at(h, s);
      dh.push_back(std::vector<double>(row.begin(), row.end()));
    }
    dist.push_back(std::move(dh));
  }
  return json{{"H", policy.horizon},
              {"S", policy.num_states},
              {"action_sizes", policy.space.sizes()},
              {"encoding", kJointEncoding},
              {"is_product", policy.is_product},
              {"dist", std::move(dist)}};
}

JointPolicy policy_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("policy document must be an object");
  const int H = field<int>(doc, "H");
  const int S = field<int>(doc, "S");
  auto sizes = field<std::vector<int>>(doc, "action_sizes");
  const bool product = doc.contains("is_product") ? field<bool>(doc, "is_product") : false;
  if (H < 1 || S < 1 || sizes.empty()) throw ParseError("H, S and action_sizes must be positive");
  JointPolicy policy(H, S, JointActionSpace(sizes), product);
  const int A = policy.space.joint_size();
  const json& dist = doc.contains("dist") ? doc.at("dist") : json();
  for (int h = 0; h < H; ++h) {
    const auto& dh = nested(dist, h, H, "dist");
    for (int s = 0; s < S; ++s) {
      const auto& ds = nested(dh, s, S, "dist[h]");
      auto row = policy.at(h, s);
      for (int a = 0; a < A; ++a) row[a] = number(nested(ds, a, A, "dist[h][s]"), "dist");
    }
  }
  return policy;
}

json game_to_json(const GameMatrix& game) {
  return json{{"M", game.num_agents()},
              {"action_sizes", game.space.sizes()},
              {"payoffs", game.payoffs}};
}

GameMatrix game_from_json(const json& doc) {
  GameMatrix game(field<std::vector<int>>(doc, "action_sizes"));
  auto payoffs = field<std::vector<std::vector<double>>>(doc, "payoffs");
  if (static_cast<int>(payoffs.size()) != game.num_agents()) {
    throw ParseError("payoffs must have one row per agent");
  }
  for (const auto& row : payoffs) {
    if (static_cast<int>(row.size()) != game.space.joint_size()) {
      throw ParseError("payoff row has wrong length");
    }
  }
  game.payoffs = std::move(payoffs);
  return game;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace marsgames
