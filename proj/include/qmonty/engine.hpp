// engine.hpp: the referee. Runs the four stages of one game, performs every
// measurement and records a replayable transcript.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qmonty/hilbert.hpp"
#include "qmonty/rules.hpp"
#include "qmonty/strategies.hpp"
#include "qmonty/strategy_json.hpp"

namespace qmonty {

enum class Stage { prepared, chosen, opened, finished, aborted };

std::string_view to_string(Stage s);

// Each real and imaginary part rounded to `digits` significant decimal
// digits. The result is not renormalized.
Vec3 truncate_announcement(const Vec3& chi, int digits);

// One pass through stages 1 to 3. restart_on_reveal appends a new attempt
// for every restart.
struct Attempt {
    std::optional<Vec3> prize;                 // classical prize ray
    std::optional<std::size_t> catalog_index;  // finite catalogs / axes
    std::optional<Vec3> phi;
    std::vector<Vec3> others;  // p', p'' under triple_choice
    std::optional<std::size_t> notepad_outcome;
    std::string notepad_label;
    std::optional<Vec3> chi;        // q as the host chose it (phase-normalized)
    std::optional<Vec3> announced;  // what the player was shown
    bool degenerate = false;
    std::vector<Vec3> vn_basis;  // complete_vn: q', q''
    std::optional<std::size_t> vn_outcome;
    std::optional<bool> door_yes;
};

struct Transcript {
    RuleSet rules;
    std::shared_ptr<const HostStrategy> host;
    StreamId stream;
    std::vector<Attempt> attempts;
    std::optional<Vec3> p_prime;  // as submitted
    bool snapped = false;         // p' projected into (1 - q)H after truncation
    std::optional<bool> final_yes;
    bool won = false;
    Stage stage = Stage::prepared;
    int restarts = 0;
};

Json transcript_to_json(const Transcript& t);

struct Announcement {
    Vec3 chi;        // phase-normalized door
    Vec3 announced;  // chi, truncated when the rules ask for it
    bool degenerate = false;
    bool door_yes = false;
    Stage stage = Stage::opened;  // prepared after a restart
};

// One game. A session is single-threaded; it may be moved between threads
// whole but never shared.
class GameSession {
public:
    // Stage 1: the host prepares the prize. Throws ConfigError for host and
    // variant combinations the referee refuses.
    GameSession(RuleSet rules, std::shared_ptr<const HostStrategy> host, RandomStream rng);

    GameSession(GameSession&&) noexcept = default;
    GameSession& operator=(GameSession&&) noexcept = default;
    GameSession(const GameSession&) = delete;
    GameSession& operator=(const GameSession&) = delete;

    // Stage 2. Throws InvalidProjector, IncompleteTriple, WrongStage.
    void player_choose(const Projector& p);
    void player_choose(const Projector& p, const Projector& p1, const Projector& p2);

    // Stage 3. Throws HostViolation when the door reveals the prize under
    // rules that forbid it, RuleViolation for an illegal door.
    Announcement host_open_door();

    // Stage 4. Throws RuleViolation unless p' ⊥ q.
    bool player_final(const Projector& p_prime);

    // Replaces the prize state by the equalized mixture (p + (1 - p - q))/2.
    void apply_variant_touch();
    // Secret complete measurement in the basis (q, q', q''); the prize
    // collapses onto q' or q''.
    void apply_variant_complete_vn(const std::vector<StateVector>& basis);

    Stage stage() const { return stage_; }
    const RuleSet& rules() const { return rules_; }
    const HostStrategy& host() const { return *host_; }
    const PrizeState& prize_state() const { return prize_; }
    const Notepad& notepad() const { return notepad_; }
    const std::optional<Projector>& p() const { return p_; }
    const std::optional<Projector>& q() const { return q_; }
    const std::optional<Projector>& p_prime() const { return p_prime_; }
    const std::vector<StateVector>& others() const { return others_; }
    int restart_count() const { return transcript_.restarts; }
    bool won() const { return transcript_.won; }
    const Transcript& transcript() const { return transcript_; }

private:
    void prepare();
    void require_stage(Stage expected, const char* op) const;
    void abort_with(const std::string& why);
    Attempt& attempt() { return transcript_.attempts.back(); }

    RuleSet rules_;
    std::shared_ptr<const HostStrategy> host_;
    RandomStream rng_;
    Stage stage_ = Stage::prepared;
    PrizeState prize_;
    Notepad notepad_;
    std::optional<Projector> p_;
    std::optional<Projector> q_;
    std::optional<Projector> p_prime_;
    std::vector<StateVector> others_;
    Transcript transcript_;
};

GameSession new_session(const RuleSet& rules, std::shared_ptr<const HostStrategy> host,
                        RandomStream rng);

// Re-runs a serialized transcript from its seed and recorded choices and
// returns the new transcript, which must serialize identically.
Transcript replay(const Json& transcript);

} // namespace qmonty
