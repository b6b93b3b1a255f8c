#include "qmonty/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace qmonty {

namespace {

Json optional_vec(const std::optional<Vec3>& v) {
    return v ? vec_to_json(*v) : Json(nullptr);
}

std::optional<Vec3> read_optional_vec(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return vec_from_json(j.at(key));
}

Stage parse_stage(const std::string& s) {
    for (Stage st : {Stage::prepared, Stage::chosen, Stage::opened, Stage::finished, Stage::aborted}) {
        if (to_string(st) == s) return st;
    }
    throw ConfigError("unknown stage '" + s + "'");
}

double round_significant(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
    return std::stod(buf);
}

void require_rank_one(const Projector& p, const char* what) {
    if (!p.is_rank_one()) {
        throw InvalidProjector(std::string(what) + " must be a one-dimensional projection, got rank " +
                               std::to_string(p.rank()));
    }
}

} // namespace

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::prepared: return "prepared";
        case Stage::chosen: return "chosen";
        case Stage::opened: return "opened";
        case Stage::finished: return "finished";
        case Stage::aborted: return "aborted";
    }
    return "unknown";
}

Vec3 truncate_announcement(const Vec3& chi, int digits) {
    if (digits < 1) throw ConfigError("announcement precision needs at least one digit");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
        out(i) = Complex(round_significant(chi(i).real(), digits),
                         round_significant(chi(i).imag(), digits));
    }
    return out;
}

// ================================================================ session

GameSession::GameSession(RuleSet rules, std::shared_ptr<const HostStrategy> host, RandomStream rng)
    : rules_(rules), host_(std::move(host)), rng_(std::move(rng)), prize_(StateVector::basis(0)) {
    if (!host_) throw ConfigError("session needs a host strategy");
    validate(*host_);
    if (rules_.variant == Variant::complete_vn && !std::holds_alternative<CompleteVNHost>(*host_)) {
        throw ConfigError("complete_vn needs a host with a fixed, publicly known prize vector");
    }
    if (rules_.announce_precision_digits && *rules_.announce_precision_digits < 1) {
        throw ConfigError("announcement precision needs at least one digit");
    }
    transcript_.rules = rules_;
    transcript_.host = host_;
    transcript_.stream = rng_.id();
    prepare();
}

GameSession new_session(const RuleSet& rules, std::shared_ptr<const HostStrategy> host,
                        RandomStream rng) {
    return GameSession(rules, std::move(host), std::move(rng));
}

void GameSession::prepare() {
    HostPreparation prep = host_prepare(*host_, rng_);
    prize_ = std::move(prep.prize);
    notepad_ = std::move(prep.notepad);
    if (auto povm = host_early_observable(*host_)) {
        NotepadOutcome out = measure_notepad(std::get<JointState>(prize_), *povm, rng_);
        notepad_.outcome = out.index;
        notepad_.outcome_label = out.label;
        prize_ = std::move(out.post);
    }
    p_.reset();
    q_.reset();
    others_.clear();
    stage_ = Stage::prepared;

    Attempt a;
    if (notepad_.prize) a.prize = notepad_.prize->vec();
    a.catalog_index = notepad_.catalog_index;
    if (notepad_.outcome) {
        a.notepad_outcome = notepad_.outcome;
        a.notepad_label = notepad_.outcome_label;
    }
    transcript_.attempts.push_back(std::move(a));
    transcript_.stage = stage_;
}

void GameSession::require_stage(Stage expected, const char* op) const {
    if (stage_ != expected) {
        throw WrongStage(std::string(op) + " needs stage '" + std::string(to_string(expected)) +
                         "', session is '" + std::string(to_string(stage_)) + "'");
    }
}

void GameSession::abort_with(const std::string& why) {
    stage_ = Stage::aborted;
    transcript_.stage = stage_;
    throw HostViolation(why);
}

void GameSession::player_choose(const Projector& p) {
    require_stage(Stage::prepared, "player_choose");
    if (rules_.variant == Variant::open_players_door) {
        throw WrongStage("open_players_door omits the first choice");
    }
    if (rules_.variant == Variant::triple_choice) {
        throw IncompleteTriple("triple_choice needs p, p' and p''");
    }
    require_rank_one(p, "p");
    p_ = p;
    attempt().phi = p.ray().vec();
    stage_ = Stage::chosen;
    transcript_.stage = stage_;
}

void GameSession::player_choose(const Projector& p, const Projector& p1, const Projector& p2) {
    require_stage(Stage::prepared, "player_choose");
    if (rules_.variant != Variant::triple_choice) {
        throw RuleViolation("a triple of projections is only accepted under triple_choice");
    }
    require_rank_one(p, "p");
    require_rank_one(p1, "p'");
    require_rank_one(p2, "p''");
    const Mat3 sum = p.matrix() + p1.matrix() + p2.matrix();
    if (max_abs_entry(sum - Mat3::Identity()) > kEps) {
        throw IncompleteTriple("p + p' + p'' must equal the identity");
    }
    p_ = p;
    others_ = {p1.ray(), p2.ray()};
    Attempt& a = attempt();
    a.phi = p.ray().vec();
    a.others = {others_[0].vec(), others_[1].vec()};
    stage_ = Stage::chosen;
    transcript_.stage = stage_;
}

Announcement GameSession::host_open_door() {
    if (rules_.variant == Variant::open_players_door) {
        require_stage(Stage::prepared, "host_open_door");
    } else {
        require_stage(Stage::chosen, "host_open_door");
    }

    DoorRequest request;
    request.variant = rules_.variant;
    if (p_) request.phi = p_->ray();
    request.others = others_;
    request.degeneracy = rules_.degeneracy;

    Attempt& a = attempt();
    if (auto query = host_notepad_observable(*host_, notepad_, request, rng_)) {
        NotepadOutcome out = measure_notepad(std::get<JointState>(prize_), query->povm, rng_);
        notepad_.outcome = out.index;
        notepad_.outcome_label = out.label;
        notepad_.observable_rays = std::move(query->rays);
        prize_ = std::move(out.post);
        a.notepad_outcome = out.index;
        a.notepad_label = out.label;
    }

    DoorChoice door = host_pick_door(*host_, notepad_, request, rng_);
    const StateVector chi = normalize_phase(door.chi);
    const Projector q = Projector::onto(chi);
    a.chi = chi.vec();
    a.degenerate = door.degenerate;
    for (const auto& v : door.vn_basis) a.vn_basis.push_back(v.vec());

    if (p_ && overlap2(p_->ray(), chi) > kEps) {
        stage_ = Stage::aborted;
        transcript_.stage = stage_;
        throw RuleViolation("door q is not orthogonal to the player's choice p");
    }
    if (rules_.variant == Variant::triple_choice) {
        const bool listed = std::any_of(others_.begin(), others_.end(), [&](const StateVector& o) {
            return overlap2(o, chi) >= 1.0 - kEps;
        });
        if (!listed) {
            stage_ = Stage::aborted;
            transcript_.stage = stage_;
            throw RuleViolation("under triple_choice the door must be p' or p''");
        }
    }
    q_ = q;

    Announcement ann;
    ann.chi = chi.vec();
    ann.announced = rules_.announce_precision_digits
                        ? truncate_announcement(chi.vec(), *rules_.announce_precision_digits)
                        : chi.vec();
    ann.degenerate = door.degenerate;
    a.announced = ann.announced;

    if (rules_.variant == Variant::complete_vn) {
        std::vector<StateVector> basis{chi};
        basis.insert(basis.end(), door.vn_basis.begin(), door.vn_basis.end());
        apply_variant_complete_vn(basis);
        ann.stage = stage_;
        return ann;
    }

    MeasureOutcome<PrizeState> m = lueders_measure(prize_, q, rng_);
    a.door_yes = m.yes;
    prize_ = std::move(m.post);
    ann.door_yes = m.yes;

    if (m.yes) {
        switch (rules_.variant) {
            case Variant::reveal_wins:
                transcript_.won = true;
                stage_ = Stage::finished;
                transcript_.stage = stage_;
                ann.stage = stage_;
                return ann;
            case Variant::restart_on_reveal:
                if (transcript_.restarts >= rules_.max_restarts) {
                    stage_ = Stage::aborted;
                    transcript_.stage = stage_;
                    ann.stage = stage_;
                    return ann;
                }
                ++transcript_.restarts;
                prepare();
                ann.stage = stage_;
                return ann;
            default:
                abort_with("door q revealed the prize under '" + std::string(to_string(rules_.variant)) +
                           "' rules");
        }
    }

    stage_ = Stage::opened;
    transcript_.stage = stage_;
    if (rules_.variant == Variant::touch_allowed) apply_variant_touch();
    ann.stage = stage_;
    return ann;
}

void GameSession::apply_variant_touch() {
    if (rules_.variant != Variant::touch_allowed) {
        throw RuleViolation("the host may only touch the prize under touch_allowed");
    }
    require_stage(Stage::opened, "apply_variant_touch");
    if (!p_ || !q_) throw WrongStage("touching the prize needs both p and q");
    const Mat3 closed_other = Mat3::Identity() - p_->matrix() - q_->matrix();
    prize_ = DensityOperator(0.5 * (p_->matrix() + closed_other));
}

void GameSession::apply_variant_complete_vn(const std::vector<StateVector>& basis) {
    if (rules_.variant != Variant::complete_vn) {
        throw RuleViolation("complete measurement only under complete_vn");
    }
    if (basis.size() != 3) throw RuleViolation("complete_vn needs q, q' and q''");
    const Projector q = Projector::onto(basis[0]);
    const Mat3 sum = q.matrix() + basis[1].vec() * basis[1].vec().adjoint() +
                     basis[2].vec() * basis[2].vec().adjoint();
    if (max_abs_entry(sum - Mat3::Identity()) > kEps) {
        throw RuleViolation("q + q' + q'' must equal the identity");
    }
    if (p_ && overlap2(p_->ray(), basis[0]) > kEps) {
        throw RuleViolation("door q is not orthogonal to the player's choice p");
    }
    const auto* prize = std::get_if<StateVector>(&prize_);
    if (!prize) throw RuleViolation("complete_vn needs a pure prize vector");
    if (overlap2(*prize, basis[0]) > kEps) {
        throw RuleViolation("door q is not orthogonal to the prize vector");
    }
    const double w1 = overlap2(basis[1], *prize);
    const double w2 = overlap2(basis[2], *prize);
    const std::size_t outcome = rng_.uniform() * (w1 + w2) < w1 ? 1 : 2;
    prize_ = basis[outcome];
    q_ = q;
    Attempt& a = attempt();
    a.vn_outcome = outcome;
    a.door_yes = false;
    stage_ = Stage::opened;
    transcript_.stage = stage_;
}

bool GameSession::player_final(const Projector& p_prime) {
    require_stage(Stage::opened, "player_final");
    require_rank_one(p_prime, "p'");
    StateVector v = p_prime.ray();
    const StateVector chi = q_->ray();
    transcript_.p_prime = v.vec();

    double tol = kEps;
    if (rules_.announce_precision_digits) {
        tol = std::max(kEps, std::pow(10.0, 2.0 * (1 - *rules_.announce_precision_digits)));
    }
    const double leak = overlap2(v, chi);
    if (leak > tol) throw RuleViolation("final choice p' is not orthogonal to the open door q");
    if (rules_.announce_precision_digits && leak > 0.0) {
        // The player only saw a rounded door; project onto (1 - q)H.
        v = StateVector::normalized(v.vec() - inner(chi.vec(), v.vec()) * chi.vec());
        transcript_.snapped = true;
    }
    const Projector final_p = Projector::onto(v);
    MeasureOutcome<PrizeState> m = lueders_measure(prize_, final_p, rng_);
    prize_ = std::move(m.post);
    p_prime_ = final_p;
    transcript_.final_yes = m.yes;
    transcript_.won = m.yes;
    stage_ = Stage::finished;
    transcript_.stage = stage_;
    return m.yes;
}

// ============================================================= transcript

Json transcript_to_json(const Transcript& t) {
    Json attempts = Json::array();
    for (const auto& a : t.attempts) {
        Json others = Json::array();
        for (const auto& o : a.others) others.push_back(vec_to_json(o));
        Json vn = Json::array();
        for (const auto& o : a.vn_basis) vn.push_back(vec_to_json(o));
        attempts.push_back({
            {"prize", optional_vec(a.prize)},
            {"catalog_index", a.catalog_index ? Json(*a.catalog_index) : Json(nullptr)},
            {"p", optional_vec(a.phi)},
            {"others", others},
            {"notepad_outcome", a.notepad_outcome ? Json(*a.notepad_outcome) : Json(nullptr)},
            {"notepad_label", a.notepad_label},
            {"chi", optional_vec(a.chi)},
            {"announced", optional_vec(a.announced)},
            {"degenerate", a.degenerate},
            {"vn_basis", vn},
            {"vn_outcome", a.vn_outcome ? Json(*a.vn_outcome) : Json(nullptr)},
            {"door_yes", a.door_yes ? Json(*a.door_yes) : Json(nullptr)},
        });
    }
    return Json{
        {"rules", rules_to_json(t.rules)},
        {"host", t.host ? host_to_json(*t.host) : Json(nullptr)},
        {"stream", {{"master", t.stream.master}, {"index", t.stream.index}, {"lane", t.stream.lane}}},
        {"attempts", attempts},
        {"p_prime", optional_vec(t.p_prime)},
        {"snapped", t.snapped},
        {"final_yes", t.final_yes ? Json(*t.final_yes) : Json(nullptr)},
        {"won", t.won},
        {"stage", std::string(to_string(t.stage))},
        {"restarts", t.restarts},
    };
}

Transcript replay(const Json& j) {
    try {
        const RuleSet rules = rules_from_json(j.at("rules"));
        auto host = std::make_shared<const HostStrategy>(host_from_json(j.at("host")));
        const Json& s = j.at("stream");
        const StreamId id{s.at("master").get<std::uint64_t>(), s.at("index").get<std::uint64_t>(),
                          s.at("lane").get<std::uint64_t>()};
        GameSession session(rules, host, RandomStream(id));
        try {
            for (const Json& a : j.at("attempts")) {
                if (session.stage() != Stage::prepared) break;
                if (auto phi = read_optional_vec(a, "p")) {
                    const Projector p = Projector::onto(StateVector(*phi));
                    const Json& others = a.at("others");
                    if (others.size() == 2) {
                        session.player_choose(p, Projector::onto(StateVector(vec_from_json(others[0]))),
                                              Projector::onto(StateVector(vec_from_json(others[1]))));
                    } else {
                        session.player_choose(p);
                    }
                }
                if (a.at("chi").is_null()) break;
                session.host_open_door();
            }
            if (session.stage() == Stage::opened) {
                if (auto pp = read_optional_vec(j, "p_prime")) {
                    session.player_final(Projector::onto(StateVector(*pp)));
                }
            }
        } catch (const HostViolation&) {
            // The recorded game aborted the same way.
        } catch (const RuleViolation&) {
        }
        const Stage expected = parse_stage(j.at("stage").get<std::string>());
        (void)expected;
        return session.transcript();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed transcript: ") + e.what());
    }
}

} // namespace qmonty
