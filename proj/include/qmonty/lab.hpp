// lab.hpp: seeded Monte Carlo experiments and their closed-form oracles.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmonty/engine.hpp"

namespace qmonty {

struct ExperimentConfig {
    HostStrategy host = HaarHost{};
    PlayerStrategy player = SwitchPlayer{};
    RuleSet rules;
    std::uint64_t trials = 1000;
    std::uint64_t seed = 0;
    std::string format = "csv";
    // Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned threads = 0;
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& config);

struct WinStats {
    std::uint64_t trials = 0;
    std::uint64_t wins = 0;
    std::uint64_t aborted = 0;  // restart cap reached; counted as losses
    std::uint64_t restarts = 0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t seed = 0;
};

// 95% Wilson score interval.
WinStats make_stats(std::uint64_t trials, std::uint64_t wins, std::uint64_t seed);

// Thrown when a run stops on an engine error; carries the failing game.
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, std::uint64_t trial, Json transcript, bool host_violation)
        : Error(what), trial_(trial), transcript_(std::move(transcript)),
          host_violation_(host_violation) {}
    std::uint64_t trial() const { return trial_; }
    const Json& transcript() const { return transcript_; }
    bool host_violation() const { return host_violation_; }

private:
    std::uint64_t trial_;
    Json transcript_;
    bool host_violation_;
};

struct GameResult {
    bool won = false;
    bool aborted = false;
    int restarts = 0;
};

// Plays one full game with a resolved player. The session draws from
// `session_rng`, the player from `player_rng`.
GameResult play_game(const RuleSet& rules, const std::shared_ptr<const HostStrategy>& host,
                     const PlayerStrategy& player, RandomStream session_rng,
                     RandomStream& player_rng, Transcript* transcript = nullptr);

// Trial i uses substream (seed, i, 0) for the referee and (seed, i, 1) for
// the player, so results do not depend on the thread count.
WinStats run_trials(const ExperimentConfig& config);

// Closed-form win probability for catalogued host/player/rule triples.
std::optional<double> analytic_value(const HostStrategy& host, const PlayerStrategy& player,
                                     const RuleSet& rules);

// Binomial standard error sqrt(w(1-w)/n).
double binomial_sigma(double w, std::uint64_t trials);

// Exact for entangled hosts (reduced state of Ω), sampled otherwise.
DensityOperator mean_density_estimate(const HostStrategy& host, std::uint64_t n, std::uint64_t seed);

// Conditional state after door q for a Haar host: p/3 + 2/3 (1 - p - q).
struct ConditionalModel {
    Projector p;
    Projector q;
    DensityOperator rho_q;
};

ConditionalModel haar_conditional_model(const StateVector& phi, const StateVector& chi);

// (1/3) sin²θ + (2/3) cos²θ.
double theta_prediction(double theta);

struct SweepPoint {
    double theta = 0.0;
    WinStats stats;
    double predicted = 0.0;
};

// Angle player against `host`, one seeded run per grid point. Point k uses
// master seed mix64(seed + k).
std::vector<SweepPoint> theta_sweep(const HostStrategy& host, const std::vector<double>& thetas,
                                    std::uint64_t trials, std::uint64_t seed, unsigned threads = 0);

struct ProbeEntry {
    std::string label;
    PlayerStrategy player;
    WinStats stats;
};

struct ProbeResult {
    ProbeEntry best;
    std::vector<ProbeEntry> tried;
};

// Runs a fixed family of candidate players against `host` (budget trials
// each) and reports the best estimate. Exploratory only.
ProbeResult best_response_probe(const HostStrategy& host, std::uint64_t budget, std::uint64_t seed,
                                unsigned threads = 0);

} // namespace qmonty
