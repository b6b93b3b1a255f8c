#include "qmonty/strategy_json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qmonty {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double number_field(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) bad(std::string("'") + key + "' must be a number");
    return j.at(key).get<double>();
}

std::optional<StateVector> optional_state(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return state_from_json(j.at(key));
}

std::vector<StateVector> states_from_json(const Json& j) {
    if (!j.is_array()) bad("expected an array of vectors");
    std::vector<StateVector> out;
    for (const auto& v : j) out.push_back(state_from_json(v));
    return out;
}

Json states_to_json(const std::vector<StateVector>& states) {
    Json out = Json::array();
    for (const auto& v : states) out.push_back(vec_to_json(v.vec()));
    return out;
}

PrepKind parse_prep(const Json& j) {
    const std::string s = j.value("preparation", std::string("haar"));
    if (s == "haar") return PrepKind::haar;
    if (s == "axes") return PrepKind::axes;
    bad("unknown preparation '" + s + "'");
}

const char* prep_name(PrepKind k) { return k == PrepKind::axes ? "axes" : "haar"; }

Povm povm_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) bad("'povm' must be a non-empty array of effects");
    std::vector<Effect> effects;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const Json& e = j[i];
        std::string label = e.value("label", std::to_string(i));
        if (e.contains("effect")) {
            effects.push_back({label, mat_from_json(e.at("effect"))});
        } else if (e.contains("vector")) {
            const StateVector v = state_from_json(e.at("vector"));
            const double w = number_field(e, "weight", 1.0);
            effects.push_back({label, w * (v.vec() * v.vec().adjoint())});
        } else {
            bad("each POVM effect needs 'effect' or 'vector'");
        }
    }
    try {
        return Povm(std::move(effects));
    } catch (const std::invalid_argument& e) {
        bad(std::string("invalid POVM: ") + e.what());
    }
}

Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        bad("malformed JSON in " + origin + ": " + e.what());
    }
}

// Returns the JSON object named by `spec` when it is inline JSON or @file.
std::optional<Json> json_spec(const std::string& spec) {
    if (!spec.empty() && spec.front() == '{') return parse_json_text(spec, "strategy spec");
    if (!spec.empty() && spec.front() == '@') {
        std::ifstream in(spec.substr(1));
        if (!in) throw IoError("cannot read '" + spec.substr(1) + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_json_text(buf.str(), spec.substr(1));
    }
    return std::nullopt;
}

std::pair<std::string, std::string> split_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) return {spec, ""};
    return {spec.substr(0, colon), spec.substr(colon + 1)};
}

double parse_number(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        const double x = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return x;
    } catch (const std::exception&) {
        bad("bad number '" + text + "' in " + what);
    }
}

} // namespace

// ================================================================ vectors

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    bad("complex numbers are [re, im] pairs");
}

Json vec_to_json(const Vec3& v) {
    Json out = Json::array();
    for (int i = 0; i < 3; ++i) out.push_back(complex_to_json(v(i)));
    return out;
}

Vec3 vec_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 3) bad("vectors have exactly 3 complex entries");
    Vec3 v;
    for (int i = 0; i < 3; ++i) v(i) = complex_from_json(j[i]);
    return v;
}

Json mat_to_json(const Mat3& m) {
    Json out = Json::array();
    for (int r = 0; r < 3; ++r) out.push_back(vec_to_json(m.row(r).transpose()));
    return out;
}

Mat3 mat_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 3) bad("matrices are 3 rows of 3 complex entries");
    Mat3 m;
    for (int r = 0; r < 3; ++r) m.row(r) = vec_from_json(j[r]).transpose();
    return m;
}

StateVector state_from_json(const Json& j) {
    const Vec3 v = vec_from_json(j);
    // Serialized unit vectors are taken verbatim so replays stay bit-exact.
    if (std::abs(v.norm() - 1.0) < 1e-12) return StateVector(v);
    try {
        return StateVector::normalized(v);
    } catch (const DegenerateInput&) {
        bad("zero vector where a state was expected");
    }
}

// ================================================================== rules

Json rules_to_json(const RuleSet& rules) {
    Json j{{"variant", std::string(to_string(rules.variant))},
           {"degeneracy", std::string(to_string(rules.degeneracy))},
           {"max_restarts", rules.max_restarts}};
    if (rules.announce_precision_digits) j["digits"] = *rules.announce_precision_digits;
    return j;
}

RuleSet rules_from_json(const Json& j) {
    if (j.is_string()) {
        RuleSet r;
        r.variant = parse_variant(j.get<std::string>());
        return r;
    }
    if (!j.is_object()) bad("rules must be an object or a variant name");
    RuleSet r;
    r.variant = parse_variant(j.value("variant", std::string("strict")));
    r.degeneracy = parse_degeneracy(j.value("degeneracy", std::string("random")));
    r.max_restarts = j.value("max_restarts", 1000);
    if (r.max_restarts < 0) bad("max_restarts must be non-negative");
    if (j.contains("digits") && !j.at("digits").is_null()) {
        const int d = j.at("digits").get<int>();
        if (d < 1) bad("digits must be at least 1");
        r.announce_precision_digits = d;
    }
    return r;
}

// ================================================================== hosts

Json host_to_json(const HostStrategy& host) {
    Json j = std::visit(
        Overloaded{
            [](const AxesHost& h) { return Json{{"basis", states_to_json(h.basis)}}; },
            [](const FiniteSetHost& h) {
                return Json{{"vectors", states_to_json(h.vectors)}, {"probabilities", h.probabilities}};
            },
            [](const RealVectorHost&) { return Json::object(); },
            [](const HaarHost&) { return Json::object(); },
            [](const EntangledHost& h) {
                if (h.policy == NotepadPolicy::transpose_of_player_triple) {
                    return Json{{"policy", "transpose"}};
                }
                Json effects = Json::array();
                for (std::size_t i = 0; i < h.effect_rays.size(); ++i) {
                    const auto& e = h.povm->effects()[i];
                    effects.push_back({{"label", e.label},
                                       {"weight", h.effect_weights[i]},
                                       {"vector", vec_to_json(h.effect_rays[i].vec())}});
                }
                return Json{{"policy", "fixed_povm"},
                            {"canonical", true},
                            {"povm", effects},
                            {"measure_at_preparation", h.measure_at_preparation}};
            },
            [](const IgnoreNotepadHost& h) { return Json{{"preparation", prep_name(h.preparation)}}; },
            [](const CompleteVNHost& h) { return Json{{"prize", vec_to_json(h.prize.vec())}}; },
            [](const PerturbedHaarHost& h) {
                return Json{{"lambda", h.lambda},
                            {"anchor", h.anchor == Anchor::axes ? "axes" : "real"}};
            },
            [](const RestartingHost& h) {
                return Json{{"preparation", prep_name(h.preparation)}, {"abort_rate", h.abort_rate}};
            },
        },
        host);
    j["kind"] = host_kind(host);
    return j;
}

HostStrategy host_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        bad("host spec needs a string 'kind'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    HostStrategy host;
    if (kind == "axes") {
        AxesHost h;
        if (j.contains("basis")) h.basis = states_from_json(j.at("basis"));
        host = h;
    } else if (kind == "finite") {
        if (j.contains("random_count")) {
            host = random_finite_set_host(j.at("random_count").get<std::size_t>(),
                                          j.value("catalog_seed", std::uint64_t{0}));
        } else {
            FiniteSetHost h;
            h.vectors = states_from_json(j.value("vectors", Json::array()));
            if (j.contains("probabilities")) {
                h.probabilities = j.at("probabilities").get<std::vector<double>>();
            } else {
                h.probabilities.assign(h.vectors.size(), 1.0 / static_cast<double>(h.vectors.size()));
            }
            host = h;
        }
    } else if (kind == "real") {
        host = RealVectorHost{};
    } else if (kind == "haar") {
        host = HaarHost{};
    } else if (kind == "entangled") {
        const std::string policy = j.value("policy", std::string("transpose"));
        if (policy == "transpose") {
            host = make_entangled_transpose();
        } else if (policy == "fixed_povm" && j.value("canonical", false)) {
            std::vector<std::string> labels;
            std::vector<double> weights;
            std::vector<StateVector> rays;
            for (const auto& e : j.at("povm")) {
                labels.push_back(e.value("label", std::to_string(labels.size())));
                weights.push_back(number_field(e, "weight", 1.0));
                rays.push_back(state_from_json(e.at("vector")));
            }
            host = make_entangled_canonical(labels, weights, rays, j.value("measure_at_preparation", false));
        } else if (policy == "fixed_povm") {
            const Povm povm = j.contains("povm") ? povm_from_json(j.at("povm"))
                                                 : Povm::projective(fourier_basis());
            host = make_entangled_fixed_povm(povm, j.value("measure_at_preparation", false));
        } else {
            bad("unknown notepad policy '" + policy + "'");
        }
    } else if (kind == "ignore") {
        host = IgnoreNotepadHost{parse_prep(j)};
    } else if (kind == "complete_vn") {
        CompleteVNHost h;
        if (j.contains("prize")) h.prize = state_from_json(j.at("prize"));
        host = h;
    } else if (kind == "perturbed") {
        PerturbedHaarHost h;
        h.lambda = number_field(j, "lambda", 0.0);
        const std::string anchor = j.value("anchor", std::string("axes"));
        if (anchor == "axes") {
            h.anchor = Anchor::axes;
        } else if (anchor == "real") {
            h.anchor = Anchor::real;
        } else {
            bad("unknown anchor '" + anchor + "'");
        }
        host = h;
    } else if (kind == "restarting") {
        RestartingHost h;
        h.preparation = j.contains("preparation") ? parse_prep(j) : PrepKind::axes;
        h.abort_rate = number_field(j, "abort_rate", 0.5);
        host = h;
    } else {
        bad("unknown host kind '" + kind + "'");
    }
    validate(host);
    return host;
}

HostStrategy parse_host_spec(const std::string& spec) {
    if (auto j = json_spec(spec)) return host_from_json(*j);
    const auto [name, arg] = split_spec(spec);
    Json j;
    if (name == "haar" || name == "axes" || name == "real" || name == "ignore") {
        j = {{"kind", name}};
    } else if (name == "entangled") {
        j = {{"kind", "entangled"}, {"policy", "transpose"}};
    } else if (name == "entangled-povm") {
        j = {{"kind", "entangled"}, {"policy", "fixed_povm"}};
    } else if (name == "complete-vn" || name == "complete_vn") {
        j = {{"kind", "complete_vn"}};
    } else if (name == "finite") {
        const double n = arg.empty() ? 100.0 : parse_number(arg, "finite:N");
        if (n < 1 || n != std::floor(n)) bad("finite:N needs a positive integer");
        j = {{"kind", "finite"}, {"random_count", static_cast<std::size_t>(n)}, {"catalog_seed", 0}};
    } else if (name == "perturbed") {
        j = {{"kind", "perturbed"}, {"lambda", arg.empty() ? 0.0 : parse_number(arg, "perturbed:λ")}};
    } else if (name == "restarting") {
        j = {{"kind", "restarting"}, {"abort_rate", arg.empty() ? 0.5 : parse_number(arg, "restarting:r")}};
    } else {
        bad("unknown host '" + spec + "'");
    }
    return host_from_json(j);
}

std::string host_label(const HostStrategy& host) {
    return std::visit(
        Overloaded{
            [](const FiniteSetHost& h) { return "finite:" + std::to_string(h.vectors.size()); },
            [](const EntangledHost& h) {
                return std::string(h.policy == NotepadPolicy::fixed_povm ? "entangled-povm"
                                                                         : "entangled");
            },
            [](const CompleteVNHost&) { return std::string("complete-vn"); },
            [](const PerturbedHaarHost& h) {
                return "perturbed:" + format_number(h.lambda) +
                       (h.anchor == Anchor::real ? ":real" : "");
            },
            [](const RestartingHost& h) { return "restarting:" + format_number(h.abort_rate); },
            [&](const auto&) { return host_kind(host); },
        },
        host);
}

std::vector<StateVector> fourier_basis() {
    std::vector<StateVector> out;
    const double s = 1.0 / std::sqrt(3.0);
    for (int k = 0; k < 3; ++k) {
        Vec3 v;
        for (int m = 0; m < 3; ++m) v(m) = s * std::polar(1.0, 2.0 * std::numbers::pi * k * m / 3.0);
        out.push_back(StateVector::normalized(v));
    }
    return out;
}

// ================================================================ players

Json player_to_json(const PlayerStrategy& player) {
    auto with_phi = [](Json j, const std::optional<StateVector>& phi) {
        if (phi) j["phi"] = vec_to_json(phi->vec());
        return j;
    };
    Json j = std::visit(
        Overloaded{
            [&](const StickPlayer& p) { return with_phi(Json::object(), p.phi); },
            [&](const SwitchPlayer& p) { return with_phi(Json::object(), p.phi); },
            [&](const RandomPlayer& p) { return with_phi(Json::object(), p.phi); },
            [&](const RealCheatPlayer& p) { return with_phi(Json::object(), p.phi); },
            [&](const AngleSweepPlayer& p) { return with_phi(Json{{"theta", p.theta}}, p.phi); },
            [&](const FiniteSetCheatPlayer& p) {
                Json j{{"tolerance", p.tolerance}, {"best_guess", p.best_guess}};
                if (!p.known.empty()) j["known"] = states_to_json(p.known);
                return with_phi(j, p.phi);
            },
            [&](const BayesOptimalPlayer& p) {
                const auto* c = std::get_if<CatalogPosterior>(&p.model);
                Json j{{"model", !c ? "haar" : (c->vectors.empty() ? "host" : "catalog")}};
                if (c && !c->vectors.empty()) {
                    j["vectors"] = states_to_json(c->vectors);
                    j["weights"] = c->weights;
                    j["bandwidth"] = c->bandwidth;
                    j["haar_fallback"] = c->haar_fallback;
                }
                return with_phi(j, p.phi);
            },
        },
        player);
    j["kind"] = player_kind(player);
    return j;
}

PlayerStrategy player_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) {
        bad("player spec needs a string 'kind'");
    }
    const std::string kind = j.at("kind").get<std::string>();
    const auto phi = optional_state(j, "phi");
    if (kind == "stick") return StickPlayer{phi};
    if (kind == "switch") return SwitchPlayer{phi};
    if (kind == "random") return RandomPlayer{phi};
    if (kind == "cheat_real") return RealCheatPlayer{phi};
    if (kind == "angle") return AngleSweepPlayer{number_field(j, "theta", 0.0), phi};
    if (kind == "cheat_finite") {
        FiniteSetCheatPlayer p;
        p.phi = phi;
        if (j.contains("known")) p.known = states_from_json(j.at("known"));
        p.tolerance = number_field(j, "tolerance", p.tolerance);
        p.best_guess = j.value("best_guess", true);
        return p;
    }
    if (kind == "bayes") {
        const std::string model = j.value("model", std::string("host"));
        BayesOptimalPlayer p;
        p.phi = phi;
        if (model == "haar") {
            p.model = HaarPosterior{};
        } else if (model == "host") {
            p.model = CatalogPosterior{};
        } else if (model == "catalog") {
            CatalogPosterior c;
            c.vectors = states_from_json(j.at("vectors"));
            c.weights = j.at("weights").get<std::vector<double>>();
            c.bandwidth = number_field(j, "bandwidth", c.bandwidth);
            c.haar_fallback = j.value("haar_fallback", false);
            if (c.vectors.empty() || c.weights.size() != c.vectors.size()) {
                bad("bayes catalog needs one weight per vector");
            }
            p.model = c;
        } else {
            bad("unknown bayes model '" + model + "'");
        }
        return p;
    }
    bad("unknown player kind '" + kind + "'");
}

PlayerStrategy parse_player_spec(const std::string& spec) {
    if (auto j = json_spec(spec)) return player_from_json(*j);
    const auto [name, arg] = split_spec(spec);
    if (name == "stick") return StickPlayer{};
    if (name == "switch") return SwitchPlayer{};
    if (name == "random") return RandomPlayer{};
    if (name == "cheat-finite" || name == "cheat_finite") return FiniteSetCheatPlayer{};
    if (name == "cheat-real" || name == "cheat_real") return RealCheatPlayer{};
    if (name == "bayes") return BayesOptimalPlayer{CatalogPosterior{}, std::nullopt};
    if (name == "angle") {
        if (arg.empty()) bad("angle:θ needs an angle in radians");
        return AngleSweepPlayer{parse_number(arg, "angle:θ"), std::nullopt};
    }
    bad("unknown player '" + spec + "'");
}

std::string player_label(const PlayerStrategy& player) {
    return std::visit(
        Overloaded{
            [](const FiniteSetCheatPlayer&) { return std::string("cheat-finite"); },
            [](const RealCheatPlayer&) { return std::string("cheat-real"); },
            [](const AngleSweepPlayer& p) { return "angle:" + format_number(p.theta); },
            [&](const auto&) { return player_kind(player); },
        },
        player);
}

Json strategy_catalog() {
    return Json{
        {"hosts",
         Json::array({
             {{"kind", "haar"}, {"params", Json::array()}},
             {{"kind", "axes"}, {"params", {"basis"}}},
             {{"kind", "real"}, {"params", Json::array()}},
             {{"kind", "finite"}, {"params", {"vectors", "probabilities", "random_count", "catalog_seed"}}},
             {{"kind", "entangled"}, {"params", {"policy", "povm", "measure_at_preparation"}}},
             {{"kind", "ignore"}, {"params", {"preparation"}}},
             {{"kind", "complete_vn"}, {"params", {"prize"}}},
             {{"kind", "perturbed"}, {"params", {"lambda", "anchor"}}},
             {{"kind", "restarting"}, {"params", {"preparation", "abort_rate"}}},
         })},
        {"players",
         Json::array({
             {{"kind", "stick"}, {"params", {"phi"}}},
             {{"kind", "switch"}, {"params", {"phi"}}},
             {{"kind", "cheat_finite"}, {"params", {"phi", "known", "tolerance", "best_guess"}}},
             {{"kind", "cheat_real"}, {"params", {"phi"}}},
             {{"kind", "angle"}, {"params", {"theta", "phi"}}},
             {{"kind", "bayes"}, {"params", {"model", "phi"}}},
             {{"kind", "random"}, {"params", Json::array()}},
         })},
        {"variants",
         {"strict", "reveal_wins", "restart_on_reveal", "touch_allowed", "open_players_door",
          "complete_vn", "triple_choice"}},
        {"hint_modes", {"stick", "switch", "cheat_finite", "cheat_real"}},
    };
}

} // namespace qmonty
