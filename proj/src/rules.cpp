#include "qmonty/rules.hpp"

#include <algorithm>
#include <array>
#include <string>
#include <utility>

#include "qmonty/errors.hpp"

namespace qmonty {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 7> kVariants{{
    {Variant::strict, "strict"},
    {Variant::reveal_wins, "reveal_wins"},
    {Variant::restart_on_reveal, "restart_on_reveal"},
    {Variant::touch_allowed, "touch_allowed"},
    {Variant::open_players_door, "open_players_door"},
    {Variant::complete_vn, "complete_vn"},
    {Variant::triple_choice, "triple_choice"},
}};

std::string canonical(std::string_view name) {
    std::string s(name);
    std::replace(s.begin(), s.end(), '-', '_');
    return s;
}

} // namespace

std::string_view to_string(Variant v) {
    for (const auto& [value, name] : kVariants) {
        if (value == v) return name;
    }
    return "unknown";
}

std::string_view to_string(DegeneracyPolicy d) {
    return d == DegeneracyPolicy::random ? "random" : "deterministic";
}

Variant parse_variant(std::string_view name) {
    const std::string s = canonical(name);
    for (const auto& [value, vname] : kVariants) {
        if (vname == s) return value;
    }
    // Short aliases used on the command line.
    if (s == "touch") return Variant::touch_allowed;
    if (s == "restart") return Variant::restart_on_reveal;
    if (s == "triple") return Variant::triple_choice;
    throw ConfigError("unknown rule variant '" + std::string(name) + "'");
}

DegeneracyPolicy parse_degeneracy(std::string_view name) {
    if (name == "random") return DegeneracyPolicy::random;
    if (name == "deterministic") return DegeneracyPolicy::deterministic;
    throw ConfigError("unknown degeneracy policy '" + std::string(name) + "'");
}

} // namespace qmonty
