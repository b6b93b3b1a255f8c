// strategy_json.hpp: JSON schema for strategies, rules and vectors, plus the
// short command-line spellings.
#pragma once

#include <json.hpp>

#include <string>

#include "qmonty/hilbert.hpp"
#include "qmonty/rules.hpp"
#include "qmonty/strategies.hpp"

namespace qmonty {

using Json = nlohmann::json;

// Complex numbers are [re, im]; a plain number is read as a real value.
Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);
Json vec_to_json(const Vec3& v);
Vec3 vec_from_json(const Json& j);
// Rows of complex entries.
Json mat_to_json(const Mat3& m);
Mat3 mat_from_json(const Json& j);
// Normalizes the parsed vector; throws ConfigError for malformed input.
StateVector state_from_json(const Json& j);

Json rules_to_json(const RuleSet& rules);
RuleSet rules_from_json(const Json& j);

// Hosts: {"kind": "haar" | "axes" | "real" | "finite" | "entangled" | "ignore" |
// "complete_vn" | "perturbed" | "restarting", ...parameters}.
Json host_to_json(const HostStrategy& host);
HostStrategy host_from_json(const Json& j);

// Players: {"kind": "stick" | "switch" | "cheat_finite" | "cheat_real" | "angle" |
// "bayes" | "random", ...parameters}.
Json player_to_json(const PlayerStrategy& player);
PlayerStrategy player_from_json(const Json& j);

// Command-line spellings such as "haar", "finite:100", "perturbed:0.5",
// "angle:0.785", inline JSON objects, or "@path" to a JSON file.
HostStrategy parse_host_spec(const std::string& spec);
PlayerStrategy parse_player_spec(const std::string& spec);

// Short comma-free labels used in reports.
std::string host_label(const HostStrategy& host);
std::string player_label(const PlayerStrategy& player);

// The Fourier basis (1, ω^k, ω^2k)/√3, default observable of "entangled-povm".
std::vector<StateVector> fourier_basis();

// Kinds and parameters accepted by the schema, for front-end menus.
Json strategy_catalog();

} // namespace qmonty
