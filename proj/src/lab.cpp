#include "qmonty/lab.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

namespace qmonty {

namespace {

constexpr double kWilsonZ = 1.959963984540054;

bool is_classical_legal(const HostStrategy& host) {
    return !std::holds_alternative<IgnoreNotepadHost>(host);
}

struct ChunkResult {
    std::uint64_t wins = 0;
    std::uint64_t aborted = 0;
    std::uint64_t restarts = 0;
    std::optional<std::uint64_t> failed_trial;
    std::string message;
    Json transcript;
    bool host_violation = false;
};

} // namespace

// ================================================================= config

ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("host")) c.host = host_from_json(j.at("host"));
        if (j.contains("player")) c.player = player_from_json(j.at("player"));
        if (j.contains("rules")) c.rules = rules_from_json(j.at("rules"));
        c.trials = j.value("trials", c.trials);
        c.seed = j.value("seed", c.seed);
        c.format = j.value("format", c.format);
        c.threads = j.value("threads", c.threads);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed experiment config: ") + e.what());
    }
    if (c.trials < 1) throw ConfigError("trials must be at least 1");
    if (c.format != "csv" && c.format != "json") throw ConfigError("format must be csv or json");
    return c;
}

Json config_to_json(const ExperimentConfig& c) {
    return Json{{"host", host_to_json(c.host)}, {"player", player_to_json(c.player)},
                {"rules", rules_to_json(c.rules)}, {"trials", c.trials},
                {"seed", c.seed}, {"format", c.format}, {"threads", c.threads}};
}

// ================================================================== stats

WinStats make_stats(std::uint64_t trials, std::uint64_t wins, std::uint64_t seed) {
    WinStats s;
    s.trials = trials;
    s.wins = wins;
    s.seed = seed;
    if (trials == 0) {
        s.ci_high = 1.0;
        return s;
    }
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(wins) / n;
    const double z2 = kWilsonZ * kWilsonZ;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = kWilsonZ / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    s.estimate = p;
    s.ci_low = std::clamp(std::min(center - half, p), 0.0, 1.0);
    s.ci_high = std::clamp(std::max(center + half, p), 0.0, 1.0);
    return s;
}

double binomial_sigma(double w, std::uint64_t trials) {
    return std::sqrt(w * (1.0 - w) / static_cast<double>(trials));
}

// ================================================================== games

GameResult play_game(const RuleSet& rules, const std::shared_ptr<const HostStrategy>& host,
                     const PlayerStrategy& player, RandomStream session_rng,
                     RandomStream& player_rng, Transcript* transcript) {
    GameSession session(rules, host, std::move(session_rng));
    GameResult result;
    try {
        const bool triple = rules.variant == Variant::triple_choice;
        for (;;) {
            FirstChoice first;
            if (rules.variant != Variant::open_players_door) {
                first = player_first(player, triple, player_rng);
                const Projector p = Projector::onto(*first.phi);
                if (triple) {
                    session.player_choose(p, Projector::onto(first.others[0]),
                                          Projector::onto(first.others[1]));
                } else {
                    session.player_choose(p);
                }
            }
            const Announcement ann = session.host_open_door();
            if (ann.stage == Stage::prepared) continue;  // restart
            if (ann.stage == Stage::opened) {
                const StateVector final_choice =
                    player_final_choice(player, first, ann.announced, player_rng);
                session.player_final(Projector::onto(final_choice));
            }
            break;
        }
    } catch (...) {
        if (transcript) *transcript = session.transcript();
        throw;
    }
    result.won = session.won();
    result.aborted = session.stage() == Stage::aborted;
    result.restarts = session.restart_count();
    if (transcript) *transcript = session.transcript();
    return result;
}

WinStats run_trials(const ExperimentConfig& config) {
    if (config.trials < 1) throw ConfigError("trials must be at least 1");
    validate(config.host);
    auto host = std::make_shared<const HostStrategy>(config.host);
    const PlayerStrategy player = resolve_player(config.player, config.host);

    unsigned threads = config.threads ? config.threads : std::thread::hardware_concurrency();
    threads = static_cast<unsigned>(
        std::clamp<std::uint64_t>(threads, 1, std::max<std::uint64_t>(1, config.trials / 256)));

    std::vector<ChunkResult> chunks(threads);
    auto work = [&](unsigned t) {
        const std::uint64_t begin = config.trials * t / threads;
        const std::uint64_t end = config.trials * (t + 1) / threads;
        ChunkResult& out = chunks[t];
        for (std::uint64_t i = begin; i < end; ++i) {
            RandomStream player_rng = RandomStream::substream(config.seed, i, 1);
            Transcript tr;
            try {
                const GameResult g = play_game(config.rules, host, player,
                                               RandomStream::substream(config.seed, i, 0), player_rng, &tr);
                out.wins += g.won ? 1 : 0;
                out.aborted += g.aborted ? 1 : 0;
                out.restarts += static_cast<std::uint64_t>(g.restarts);
            } catch (const std::exception& e) {
                out.failed_trial = i;
                out.message = e.what();
                out.host_violation = dynamic_cast<const HostViolation*>(&e) != nullptr;
                out.transcript = transcript_to_json(tr);
                return;
            }
        }
    };

    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
        for (auto& th : pool) th.join();
    }

    WinStats total;
    std::uint64_t wins = 0, aborted = 0, restarts = 0;
    for (const auto& c : chunks) {
        if (c.failed_trial) {
            // Chunks are ordered, so the first failure found is the earliest trial.
            throw RunAborted("trial " + std::to_string(*c.failed_trial) + ": " + c.message,
                             *c.failed_trial, c.transcript, c.host_violation);
        }
        wins += c.wins;
        aborted += c.aborted;
        restarts += c.restarts;
    }
    total = make_stats(config.trials, wins, config.seed);
    total.aborted = aborted;
    total.restarts = restarts;
    return total;
}

// ================================================================ oracles

std::optional<double> analytic_value(const HostStrategy& host, const PlayerStrategy& player,
                                     const RuleSet& rules) {
    const bool truncated = rules.announce_precision_digits.has_value();
    const bool cheat = std::holds_alternative<FiniteSetCheatPlayer>(player) ||
                       std::holds_alternative<RealCheatPlayer>(player);
    switch (rules.variant) {
        case Variant::complete_vn:
            if (std::holds_alternative<CompleteVNHost>(host)) return 0.5;
            return std::nullopt;
        case Variant::touch_allowed:
            if (is_classical_legal(host)) return 0.5;
            return std::nullopt;
        case Variant::open_players_door:
            if (!cheat && !std::holds_alternative<BayesOptimalPlayer>(player) && is_classical_legal(host)) {
                return 0.5;
            }
            return std::nullopt;
        case Variant::triple_choice: {
            const auto* e = std::get_if<EntangledHost>(&host);
            if (!e || e->policy != NotepadPolicy::transpose_of_player_triple) return std::nullopt;
            if (std::holds_alternative<SwitchPlayer>(player)) return 2.0 / 3.0;
            if (std::holds_alternative<StickPlayer>(player)) return 1.0 / 3.0;
            if (std::holds_alternative<RandomPlayer>(player)) return 0.5;
            return std::nullopt;
        }
        case Variant::reveal_wins:
            if (std::holds_alternative<IgnoreNotepadHost>(host)) {
                if (std::holds_alternative<SwitchPlayer>(player)) return 2.0 / 3.0;
                return std::nullopt;
            }
            break;  // legal hosts never reveal: same as strict
        case Variant::restart_on_reveal:
            if (std::holds_alternative<RestartingHost>(host) ||
                std::holds_alternative<IgnoreNotepadHost>(host)) {
                return std::nullopt;
            }
            break;
        case Variant::strict:
            break;
    }
    if (!is_classical_legal(host)) return std::nullopt;

    // Stick wins with tr(ρ̄ p), switch with 1 - tr(ρ̄ p); a Haar-random first
    // choice averages tr(ρ̄ p) to 1/3 for every host.
    auto stick_value = [&](const std::optional<StateVector>& phi) -> std::optional<double> {
        if (!phi) return 1.0 / 3.0;
        const auto rho = exact_mean_density(host);
        if (!rho) return std::nullopt;
        return (phi->vec().adjoint() * rho->matrix() * phi->vec())(0, 0).real();
    };
    if (const auto* p = std::get_if<StickPlayer>(&player)) return stick_value(p->phi);
    if (const auto* p = std::get_if<SwitchPlayer>(&player)) {
        auto s = stick_value(p->phi);
        if (!s) return std::nullopt;
        return 1.0 - *s;
    }
    if (std::holds_alternative<RandomPlayer>(player)) return 0.5;
    if (const auto* p = std::get_if<AngleSweepPlayer>(&player)) {
        if (std::holds_alternative<HaarHost>(host)) return theta_prediction(p->theta);
        return std::nullopt;
    }
    if (std::holds_alternative<BayesOptimalPlayer>(player)) {
        if (std::holds_alternative<HaarHost>(host)) return 2.0 / 3.0;
        return std::nullopt;
    }
    if (truncated) return std::nullopt;
    if (std::holds_alternative<FiniteSetCheatPlayer>(player)) {
        if (std::holds_alternative<AxesHost>(host) || std::holds_alternative<FiniteSetHost>(host)) return 1.0;
        if (const auto* e = std::get_if<EntangledHost>(&host);
            e && e->policy == NotepadPolicy::fixed_povm) {
            return 1.0;
        }
        return std::nullopt;
    }
    if (std::holds_alternative<RealCheatPlayer>(player)) {
        if (std::holds_alternative<RealVectorHost>(host)) return 1.0;
        return std::nullopt;
    }
    return std::nullopt;
}

DensityOperator mean_density_estimate(const HostStrategy& host, std::uint64_t n, std::uint64_t seed) {
    if (const auto* e = std::get_if<EntangledHost>(&host); e) {
        (void)e;
        return reduced_state(maximally_entangled(), Factor::first);
    }
    if (n < 1) throw ConfigError("mean density needs at least one sample");
    Mat3 sum = Mat3::Zero();
    for (std::uint64_t i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::substream(seed, i, 0);
        const HostPreparation prep = host_prepare(host, rng);
        sum += game_state(prep.prize).matrix();
    }
    Mat3 rho = sum / static_cast<double>(n);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOperator(rho);
}

ConditionalModel haar_conditional_model(const StateVector& phi, const StateVector& chi) {
    return {Projector::onto(phi), Projector::onto(chi), haar_conditional_state(phi, chi)};
}

double theta_prediction(double theta) {
    const double s = std::sin(theta), c = std::cos(theta);
    return s * s / 3.0 + 2.0 * c * c / 3.0;
}

std::vector<SweepPoint> theta_sweep(const HostStrategy& host, const std::vector<double>& thetas,
                                    std::uint64_t trials, std::uint64_t seed, unsigned threads) {
    std::vector<SweepPoint> out;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        ExperimentConfig c;
        c.host = host;
        c.player = AngleSweepPlayer{thetas[k], std::nullopt};
        c.trials = trials;
        c.seed = seed + k;
        c.threads = threads;
        out.push_back({thetas[k], run_trials(c), theta_prediction(thetas[k])});
    }
    return out;
}

ProbeResult best_response_probe(const HostStrategy& host, std::uint64_t budget, std::uint64_t seed,
                                unsigned threads) {
    const StateVector diag = StateVector::normalized(Vec3(1.0, 1.0, 1.0));
    std::vector<std::pair<std::string, PlayerStrategy>> candidates{
        {"stick", StickPlayer{}},
        {"switch", SwitchPlayer{}},
        {"angle:pi/8", AngleSweepPlayer{std::numbers::pi / 8, std::nullopt}},
        {"angle:pi/4", AngleSweepPlayer{std::numbers::pi / 4, std::nullopt}},
        {"cheat-finite:axes", FiniteSetCheatPlayer{standard_basis(), diag}},
        {"cheat-real", RealCheatPlayer{}},
    };
    // Bayes players need a posterior model of the host; skip hosts without one.
    try {
        const BayesModel model = bayes_model_for(host, 4096, seed ^ 0xb5ad4eceda1ce2a9ULL);
        candidates.push_back({"bayes", BayesOptimalPlayer{model, std::nullopt}});
        candidates.push_back({"bayes:diag", BayesOptimalPlayer{model, diag}});
        candidates.push_back({"bayes:real-cheat-phi", BayesOptimalPlayer{model, real_cheat_phi()}});
    } catch (const ConfigError&) {
    }

    ProbeResult result;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        ExperimentConfig c;
        c.host = host;
        c.player = candidates[k].second;
        c.trials = budget;
        c.seed = seed + k;
        c.threads = threads;
        ProbeEntry entry{candidates[k].first, candidates[k].second, run_trials(c)};
        if (result.tried.empty() || entry.stats.estimate > result.best.stats.estimate) {
            result.best = entry;
        }
        result.tried.push_back(std::move(entry));
    }
    return result;
}

} // namespace qmonty
