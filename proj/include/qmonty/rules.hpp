// rules.hpp: rule variants the referee enforces.
#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace qmonty {

enum class Variant {
    strict,             // q ⊥ p and q must not reveal the prize
    reveal_wins,        // a revealed prize ends the game as a player win
    restart_on_reveal,  // a revealed prize restarts the game
    touch_allowed,      // host equalizes the closed doors after opening
    open_players_door,  // no first choice; host opens any door
    complete_vn,        // host performs a complete von Neumann measurement
    triple_choice,      // player names p, p', p''; host opens p' or p''
};

// What a classical host does when the player picked the prize ray itself,
// leaving a whole circle of legal doors.
enum class DegeneracyPolicy { random, deterministic };

struct RuleSet {
    Variant variant = Variant::strict;
    // Significant decimal digits kept in the announced door vector.
    std::optional<int> announce_precision_digits;
    DegeneracyPolicy degeneracy = DegeneracyPolicy::random;
    int max_restarts = 1000;
};

std::string_view to_string(Variant v);
std::string_view to_string(DegeneracyPolicy d);
// Accepts the canonical names; '-' is read as '_'. Throws ConfigError.
Variant parse_variant(std::string_view name);
DegeneracyPolicy parse_degeneracy(std::string_view name);

} // namespace qmonty
