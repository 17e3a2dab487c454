#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "marsgames/eq_solvers.hpp"
#include "marsgames/game_model.hpp"

namespace marsgames {

using json = nlohmann::json;

inline constexpr const char* kJointEncoding = "agent1_most_significant";

// {"H","S","action_sizes","betas","initial_state","encoding",
//  "transitions":[h][s][a][s'],"rewards":[h][m][s][a]}
json spec_to_json(const MGSpec& spec);
// Structural checks only; value invariants are left to validate_spec.
// Throws ParseError on malformed documents.
MGSpec spec_from_json(const json& doc);

// {"H","S","action_sizes","is_product","dist":[h][s][a]}
json policy_to_json(const JointPolicy& policy);
JointPolicy policy_from_json(const json& doc);

// Debug dump {"M","action_sizes","payoffs":[m][a]}.
json game_to_json(const GameMatrix& game);
GameMatrix game_from_json(const json& doc);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace marsgames
