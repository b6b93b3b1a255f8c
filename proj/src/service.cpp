#include "qmonty/service.hpp"

#include <httplib.h>

#include <atomic>
#include <random>
#include <sstream>
#include <vector>

namespace qmonty {

namespace {

class SessionNotFound : public Error {
    using Error::Error;
};

Json stats_json(std::uint64_t played, std::uint64_t wins, std::uint64_t aborted) {
    const WinStats s = make_stats(played, wins, 0);
    return Json{{"trials", s.trials}, {"wins", s.wins},        {"aborted", aborted},
                {"estimate", s.estimate}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}};
}

Json optional_double(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::stringstream in(path);
    std::string part;
    while (std::getline(in, part, '/')) {
        if (!part.empty()) parts.push_back(part);
    }
    return parts;
}

StateVector input_state(const Json& j, const char* what) {
    try {
        return StateVector::normalized(vec_from_json(j));
    } catch (const DegenerateInput&) {
        throw ConfigError(std::string(what) + " must be a non-zero vector");
    }
}

} // namespace

struct SessionRecord {
    std::mutex mutex;
    std::string id;
    RuleSet rules;
    std::shared_ptr<const HostStrategy> host;
    bool disclose = true;
    std::uint64_t seed = 0;
    std::uint64_t game = 0;
    std::optional<GameSession> session;
    std::optional<Vec3> announced;
    std::uint64_t played = 0;
    std::uint64_t wins = 0;
    std::uint64_t aborted = 0;
    Json last_outcome;
    std::int64_t created_unix = 0;
    std::atomic<Clock::rep> last_used{0};
};

namespace {

void start_game(SessionRecord& rec) {
    rec.session.emplace(rec.rules, rec.host, RandomStream::substream(rec.seed, rec.game, 0));
    rec.announced.reset();
}

// Books the finished game and starts the next one.
Json finish_game(SessionRecord& rec, bool aborted) {
    const Transcript& t = rec.session->transcript();
    ++rec.played;
    rec.wins += t.won ? 1 : 0;
    rec.aborted += aborted ? 1 : 0;
    rec.last_outcome = Json{{"game", rec.game},
                            {"won", t.won},
                            {"aborted", aborted},
                            {"p_prime", t.p_prime ? vec_to_json(*t.p_prime) : Json(nullptr)},
                            {"transcript", transcript_to_json(t)}};
    ++rec.game;
    start_game(rec);
    return rec.last_outcome;
}

Json stage_fields(const SessionRecord& rec) {
    const GameSession& s = *rec.session;
    Json j{{"session_id", rec.id},
           {"game", rec.game},
           {"stage", std::string(to_string(s.stage()))},
           {"restarts", s.restart_count()},
           {"stats", stats_json(rec.played, rec.wins, rec.aborted)}};
    j["p"] = s.p() ? vec_to_json(s.p()->ray().vec()) : Json(nullptr);
    Json others = Json::array();
    for (const auto& o : s.others()) others.push_back(vec_to_json(o.vec()));
    j["others"] = others;
    j["chi"] = rec.announced ? vec_to_json(*rec.announced) : Json(nullptr);
    return j;
}

// The vector the named strategy would play now, without committing it.
StateVector suggestion(SessionRecord& rec, const std::string& mode) {
    const GameSession& s = *rec.session;
    if (s.stage() != Stage::opened || !rec.announced) {
        throw WrongStage("suggestions need an opened door");
    }
    FirstChoice first;
    if (s.p()) first.phi = s.p()->ray();
    first.others = s.others();
    PlayerStrategy player;
    if (mode == "stick") {
        player = StickPlayer{};
    } else if (mode == "switch") {
        player = SwitchPlayer{};
    } else if (mode == "random") {
        player = RandomPlayer{};
    } else if (mode == "cheat_finite" || mode == "cheat_real") {
        if (!rec.disclose) throw ConfigError("cheat hints need a disclosed host strategy");
        if (mode == "cheat_finite") {
            if (!host_catalog(*rec.host)) {
                throw ConfigError("host '" + host_kind(*rec.host) + "' has no finite catalog to cheat with");
            }
            player = resolve_player(FiniteSetCheatPlayer{}, *rec.host);
        } else {
            if (!std::holds_alternative<RealVectorHost>(*rec.host)) {
                throw ConfigError("the real-vector cheat needs a real-vector host");
            }
            player = RealCheatPlayer{};
        }
    } else {
        throw ConfigError("unknown mode '" + mode + "'");
    }
    RandomStream rng = RandomStream::substream(rec.seed, rec.game, 2);
    return player_final_choice(player, first, *rec.announced, rng);
}

} // namespace

int http_status(const std::string& code) {
    if (code == "invalid_input") return 400;
    if (code == "not_found") return 404;
    if (code == "rule_violation" || code == "wrong_stage") return 409;
    return 500;
}

ApiError api_error_from_current_exception() {
    try {
        throw;
    } catch (const SessionNotFound& e) {
        return {"not_found", e.what(), ""};
    } catch (const RuleViolation& e) {
        return {"rule_violation", e.what(), "RuleViolation"};
    } catch (const HostViolation& e) {
        return {"rule_violation", e.what(), "HostViolation"};
    } catch (const WrongStage& e) {
        return {"wrong_stage", e.what(), ""};
    } catch (const Error& e) {
        return {"invalid_input", e.what(), ""};
    } catch (const Json::exception& e) {
        return {"invalid_input", e.what(), "json"};
    } catch (const std::invalid_argument& e) {
        return {"invalid_input", e.what(), ""};
    } catch (const std::exception& e) {
        return {"internal", e.what(), ""};
    }
}

GameService::GameService(ServiceConfig config) : config_(std::move(config)) {
    std::random_device rd;
    salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

GameService::~GameService() = default;

std::size_t GameService::session_count() const {
    std::lock_guard lock(mutex_);
    return sessions_.size();
}

std::size_t GameService::expire_idle() {
    const auto now = config_.clock().time_since_epoch().count();
    const auto limit = std::chrono::duration_cast<Clock::duration>(config_.idle_timeout).count();
    std::lock_guard lock(mutex_);
    std::size_t dropped = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        if (now - it->second->last_used.load() > limit) {
            it = sessions_.erase(it);
            ++dropped;
        } else {
            ++it;
        }
    }
    return dropped;
}

std::shared_ptr<SessionRecord> GameService::find(const std::string& id) {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionNotFound("no session '" + id + "'");
    it->second->last_used = config_.clock().time_since_epoch().count();
    return it->second;
}

ApiResponse GameService::handle(const std::string& method, const std::string& path,
                                const std::string& body, const std::map<std::string, std::string>& query) {
    try {
        expire_idle();
        const Json request = body.empty() ? Json::object() : Json::parse(body);
        const auto parts = split_path(path);
        if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1") {
            throw SessionNotFound("no route " + method + " " + path);
        }
        if (parts[2] == "strategies" && parts.size() == 3 && method == "GET") {
            return {200, strategy_catalog()};
        }
        if (parts[2] != "sessions") throw SessionNotFound("no route " + method + " " + path);
        if (parts.size() == 3 && method == "POST") return create_session(request);
        if (parts.size() < 4) throw SessionNotFound("no route " + method + " " + path);

        auto rec = find(parts[3]);
        std::lock_guard lock(rec->mutex);
        if (parts.size() == 4 && method == "GET") return get_session(*rec);
        if (parts.size() == 5 && parts[4] == "door" && method == "POST") return open_door(*rec, request);
        if (parts.size() == 5 && parts[4] == "final" && method == "POST") return final_choice(*rec, request);
        if (parts.size() == 5 && parts[4] == "hint" && method == "GET") {
            auto mode = query.find("mode");
            if (mode == query.end()) throw ConfigError("hint needs ?mode=");
            return hint(*rec, mode->second);
        }
        throw SessionNotFound("no route " + method + " " + path);
    } catch (...) {
        const ApiError e = api_error_from_current_exception();
        return {http_status(e.code), Json{{"code", e.code}, {"message", e.message}, {"detail", e.detail}}};
    }
}

ApiResponse GameService::create_session(const Json& body) {
    auto rec = std::make_shared<SessionRecord>();
    rec->host = std::make_shared<const HostStrategy>(
        body.contains("host") ? (body.at("host").is_string()
                                     ? parse_host_spec(body.at("host").get<std::string>())
                                     : host_from_json(body.at("host")))
                              : HostStrategy{HaarHost{}});
    rec->rules = body.contains("rules") ? rules_from_json(body.at("rules")) : RuleSet{};
    rec->disclose = body.value("disclose_host", true);
    {
        std::lock_guard lock(mutex_);
        const std::uint64_t n = ++counter_;
        rec->seed = body.contains("seed") ? body.at("seed").get<std::uint64_t>() : mix64(salt_ ^ mix64(n));
        char id[17];
        std::snprintf(id, sizeof id, "%016llx", static_cast<unsigned long long>(mix64(salt_ + n)));
        rec->id = id;
    }
    start_game(*rec);  // may throw ConfigError before the session is registered
    rec->created_unix = std::chrono::duration_cast<std::chrono::seconds>(
                            std::chrono::system_clock::now().time_since_epoch())
                            .count();
    rec->last_used = config_.clock().time_since_epoch().count();
    {
        std::lock_guard lock(mutex_);
        sessions_[rec->id] = rec;
    }
    std::lock_guard lock(rec->mutex);
    ApiResponse r = get_session(*rec);
    r.status = 201;
    return r;
}

ApiResponse GameService::get_session(SessionRecord& rec) {
    Json j = stage_fields(rec);
    j["created_at"] = rec.created_unix;
    j["rules"] = rules_to_json(rec.rules);
    j["disclose_host"] = rec.disclose;
    j["host"] = rec.disclose ? host_to_json(*rec.host) : Json{{"kind", "hidden"}};
    j["seed"] = rec.seed;
    j["last_outcome"] = rec.last_outcome.is_null() ? Json(nullptr) : rec.last_outcome;
    if (rec.disclose) {
        j["analytic"] = {{"stick", optional_double(analytic_value(*rec.host, StickPlayer{}, rec.rules))},
                         {"switch", optional_double(analytic_value(*rec.host, SwitchPlayer{}, rec.rules))}};
    }
    return {200, j};
}

ApiResponse GameService::open_door(SessionRecord& rec, const Json& body) {
    GameSession& s = *rec.session;
    if (body.contains("triple")) {
        const Json& t = body.at("triple");
        if (!t.is_array() || t.size() != 3) throw ConfigError("'triple' needs three vectors");
        s.player_choose(Projector::onto(input_state(t[0], "p")), Projector::onto(input_state(t[1], "p'")),
                        Projector::onto(input_state(t[2], "p''")));
    } else if (body.contains("phi")) {
        s.player_choose(Projector::onto(input_state(body.at("phi"), "phi")));
    } else if (rec.rules.variant != Variant::open_players_door) {
        throw ConfigError("door request needs 'phi' or 'triple'");
    }

    Announcement ann;
    try {
        ann = s.host_open_door();
    } catch (const HostViolation&) {
        finish_game(rec, true);
        throw;
    } catch (const RuleViolation&) {
        if (s.stage() == Stage::aborted) finish_game(rec, true);
        throw;
    }
    Json out;
    if (ann.stage == Stage::opened) {
        rec.announced = ann.announced;
        out = stage_fields(rec);
    } else if (ann.stage == Stage::prepared) {
        out = stage_fields(rec);
        out["restarted"] = true;
        out["revealed"] = vec_to_json(ann.announced);
    } else {
        const Json outcome = finish_game(rec, ann.stage == Stage::aborted);
        out = stage_fields(rec);
        out["outcome"] = outcome;
        out["revealed"] = vec_to_json(ann.announced);
    }
    out["chi"] = vec_to_json(ann.announced);
    out["degenerate"] = ann.degenerate;
    out["door_yes"] = ann.door_yes;
    return {200, out};
}

ApiResponse GameService::final_choice(SessionRecord& rec, const Json& body) {
    GameSession& s = *rec.session;
    if (s.stage() != Stage::opened) {
        throw WrongStage("final choice needs stage 'opened', session is '" +
                         std::string(to_string(s.stage())) + "'");
    }
    StateVector v = body.contains("p_prime") ? input_state(body.at("p_prime"), "p_prime")
                                             : suggestion(rec, body.value("mode", std::string()));
    const bool won = s.player_final(Projector::onto(v));
    const bool snapped = s.transcript().snapped;
    const Json outcome = finish_game(rec, false);
    Json out = stage_fields(rec);
    out["won"] = won;
    out["snapped"] = snapped;
    out["outcome"] = outcome;
    return {200, out};
}

ApiResponse GameService::hint(SessionRecord& rec, const std::string& mode) {
    const StateVector v = suggestion(rec, mode);
    return {200, Json{{"mode", mode}, {"p_prime", vec_to_json(v.vec())}}};
}

void GameService::mount(httplib::Server& server) {
    auto handler = [this](const httplib::Request& req, httplib::Response& res) {
        std::map<std::string, std::string> query;
        for (const auto& [k, v] : req.params) query.emplace(k, v);
        const ApiResponse r = handle(req.method, req.path, req.body, query);
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json; charset=utf-8");
    };
    server.Get(R"(/api/v1/.*)", handler);
    server.Post(R"(/api/v1/.*)", handler);
}

int serve(int port, const std::string& host, ServiceConfig config) {
    httplib::Server server;
    GameService service(std::move(config));
    service.mount(server);
    if (!server.bind_to_port(host, port)) return 1;
    return server.listen_after_bind() ? 0 : 1;
}

} // namespace qmonty
