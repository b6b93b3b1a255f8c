#include "qmonty/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace qmonty {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

StateVector conj_ray(const StateVector& v) {
    return StateVector(v.vec().conjugate());
}

StateVector pick_prepared(PrepKind kind, RandomStream& rng) {
    if (kind == PrepKind::axes) return StateVector::basis(static_cast<int>(rng.index(3)));
    return haar_random_unit(rng);
}

// Door orthogonal to v chosen without reference to a player's choice.
StateVector deterministic_complement(const StateVector& v) {
    int k = 0;
    for (int i = 1; i < 3; ++i) {
        if (std::abs(v[i]) < std::abs(v[k])) k = i;
    }
    return orthogonal_complement_vector(v, StateVector::basis(k));
}

// Legal door for a host whose prize (or collapsed prize) ray is `avoid`.
DoorChoice classical_door(const StateVector& avoid, const DoorRequest& req, RandomStream& rng) {
    if (req.variant == Variant::triple_choice && req.others.size() == 2) {
        const double o1 = overlap2(req.others[0], avoid);
        const double o2 = overlap2(req.others[1], avoid);
        return {o2 < o1 ? req.others[1] : req.others[0], false, {}};
    }
    if (!req.phi) {
        StateVector chi = req.degeneracy == DegeneracyPolicy::random
                              ? haar_random_in_complement(avoid, rng)
                              : deterministic_complement(avoid);
        return {normalize_phase(chi), true, {}};
    }
    return safe_door(*req.phi, avoid, req.degeneracy, rng);
}

bool is_orthonormal(const std::vector<StateVector>& basis) {
    for (std::size_t i = 0; i < basis.size(); ++i) {
        for (std::size_t j = i + 1; j < basis.size(); ++j) {
            if (std::abs(inner(basis[i], basis[j])) > kEps) return false;
        }
    }
    return true;
}

struct CanonicalRay {
    std::string label;
    StateVector phi;
    double weight;
};

std::vector<CanonicalRay> reduce_povm(const Povm& povm) {
    std::vector<CanonicalRay> merged;
    for (const auto& e : povm.effects()) {
        Eigen::SelfAdjointEigenSolver<Mat3> solver(e.op);
        const Eigen::Vector3d ev = solver.eigenvalues();
        if (ev(1) > kEps) {
            throw EffectRankTooHigh("effect '" + e.label + "' has rank >= 2; no safe door is guaranteed");
        }
        if (ev(2) <= kEps) continue;  // zero effect never fires
        StateVector phi = normalize_phase(StateVector::normalized(solver.eigenvectors().col(2)));
        auto same = std::find_if(merged.begin(), merged.end(), [&](const CanonicalRay& r) {
            return overlap2(r.phi, phi) >= 1.0 - kEps;
        });
        if (same != merged.end()) {
            same->weight += ev(2);
        } else {
            merged.push_back({e.label, phi, ev(2)});
        }
    }
    return merged;
}

} // namespace

std::vector<StateVector> standard_basis() {
    return {StateVector::basis(0), StateVector::basis(1), StateVector::basis(2)};
}

// =================================================================== hosts

AxesHost make_axes_host(std::vector<StateVector> basis) {
    AxesHost host{std::move(basis)};
    validate(host);
    return host;
}

FiniteSetHost make_finite_set_host(std::vector<StateVector> vectors,
                                   std::vector<double> probabilities) {
    FiniteSetHost host{std::move(vectors), std::move(probabilities)};
    validate(host);
    return host;
}

FiniteSetHost random_finite_set_host(std::size_t count, std::uint64_t catalog_seed) {
    if (count == 0) throw ConfigError("finite host needs at least one vector");
    RandomStream rng(catalog_seed);
    std::vector<StateVector> vectors;
    vectors.reserve(count);
    for (std::size_t i = 0; i < count; ++i) vectors.push_back(haar_random_unit(rng));
    return FiniteSetHost{std::move(vectors),
                         std::vector<double>(count, 1.0 / static_cast<double>(count))};
}

EntangledHost make_entangled_fixed_povm(const Povm& povm, bool measure_at_preparation) {
    std::vector<std::string> labels;
    std::vector<double> weights;
    std::vector<StateVector> rays;
    for (auto& r : reduce_povm(povm)) {
        labels.push_back(std::move(r.label));
        weights.push_back(r.weight);
        rays.push_back(std::move(r.phi));
    }
    return make_entangled_canonical(labels, weights, rays, measure_at_preparation);
}

EntangledHost make_entangled_canonical(const std::vector<std::string>& labels,
                                       const std::vector<double>& weights,
                                       const std::vector<StateVector>& rays,
                                       bool measure_at_preparation) {
    if (labels.size() != rays.size() || weights.size() != rays.size() || rays.empty()) {
        throw ConfigError("canonical POVM needs one label and weight per ray");
    }
    std::vector<Effect> effects;
    for (std::size_t i = 0; i < rays.size(); ++i) {
        effects.push_back({labels[i], weights[i] * (rays[i].vec() * rays[i].vec().adjoint())});
    }
    EntangledHost host;
    host.policy = NotepadPolicy::fixed_povm;
    try {
        host.povm = Povm(std::move(effects));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid POVM: ") + e.what());
    }
    host.effect_rays = rays;
    host.effect_weights = weights;
    host.measure_at_preparation = measure_at_preparation;
    return host;
}

EntangledHost make_entangled_transpose() { return EntangledHost{}; }

void validate(const HostStrategy& host) {
    std::visit(Overloaded{
                   [](const AxesHost& h) {
                       if (h.basis.size() != 3 || !is_orthonormal(h.basis)) {
                           throw ConfigError("axes host needs an orthonormal basis of 3 vectors");
                       }
                   },
                   [](const FiniteSetHost& h) {
                       if (h.vectors.empty()) throw ConfigError("finite host needs vectors");
                       if (h.vectors.size() != h.probabilities.size()) {
                           throw ConfigError("finite host: one probability per vector");
                       }
                       double total = 0.0;
                       for (double p : h.probabilities) {
                           if (!(p >= 0.0)) throw ConfigError("finite host: negative probability");
                           total += p;
                       }
                       if (std::abs(total - 1.0) > kEps) {
                           throw ConfigError("finite host: probabilities must sum to 1");
                       }
                   },
                   [](const EntangledHost& h) {
                       if (h.policy == NotepadPolicy::fixed_povm) {
                           if (!h.povm || h.effect_rays.size() != h.povm->size()) {
                               throw ConfigError("entangled fixed_povm host needs a canonical POVM");
                           }
                       }
                   },
                   [](const PerturbedHaarHost& h) {
                       if (!(h.lambda >= 0.0 && h.lambda <= 1.0)) {
                           throw ConfigError("perturbed host: lambda must lie in [0, 1]");
                       }
                   },
                   [](const RestartingHost& h) {
                       if (!(h.abort_rate >= 0.0 && h.abort_rate <= 1.0)) {
                           throw ConfigError("restarting host: abort_rate must lie in [0, 1]");
                       }
                   },
                   [](const auto&) {},
               },
               host);
}

std::string host_kind(const HostStrategy& host) {
    return std::visit(Overloaded{
                          [](const AxesHost&) { return std::string("axes"); },
                          [](const FiniteSetHost&) { return std::string("finite"); },
                          [](const RealVectorHost&) { return std::string("real"); },
                          [](const HaarHost&) { return std::string("haar"); },
                          [](const EntangledHost&) { return std::string("entangled"); },
                          [](const IgnoreNotepadHost&) { return std::string("ignore"); },
                          [](const CompleteVNHost&) { return std::string("complete_vn"); },
                          [](const PerturbedHaarHost&) { return std::string("perturbed"); },
                          [](const RestartingHost&) { return std::string("restarting"); },
                      },
                      host);
}

HostPreparation host_prepare(const HostStrategy& host, RandomStream& rng) {
    auto classical = [](StateVector v, std::optional<std::size_t> index = std::nullopt) {
        Notepad note;
        note.prize = v;
        note.catalog_index = index;
        return HostPreparation{PrizeState(std::move(v)), std::move(note)};
    };
    return std::visit(
        Overloaded{
            [&](const AxesHost& h) {
                const std::size_t k = rng.index(3);
                return classical(h.basis[k], k);
            },
            [&](const FiniteSetHost& h) {
                const std::size_t k = rng.discrete(h.probabilities);
                return classical(h.vectors[k], k);
            },
            [&](const RealVectorHost&) { return classical(random_real_unit(rng)); },
            [&](const HaarHost&) { return classical(haar_random_unit(rng)); },
            [&](const EntangledHost&) {
                return HostPreparation{PrizeState(maximally_entangled()), Notepad{}};
            },
            [&](const IgnoreNotepadHost& h) { return classical(pick_prepared(h.preparation, rng)); },
            [&](const CompleteVNHost& h) { return classical(h.prize); },
            [&](const PerturbedHaarHost& h) {
                if (rng.bernoulli(h.lambda)) {
                    if (h.anchor == Anchor::axes) {
                        const std::size_t k = rng.index(3);
                        return classical(StateVector::basis(static_cast<int>(k)), k);
                    }
                    return classical(random_real_unit(rng));
                }
                return classical(haar_random_unit(rng));
            },
            [&](const RestartingHost& h) { return classical(pick_prepared(h.preparation, rng)); },
        },
        host);
}

std::optional<Povm> host_early_observable(const HostStrategy& host) {
    if (const auto* e = std::get_if<EntangledHost>(&host)) {
        if (e->policy == NotepadPolicy::fixed_povm && e->measure_at_preparation) return e->povm;
    }
    return std::nullopt;
}

std::optional<NotepadQuery> host_notepad_observable(const HostStrategy& host,
                                                    const Notepad& notepad,
                                                    const DoorRequest& request,
                                                    RandomStream& rng) {
    const auto* e = std::get_if<EntangledHost>(&host);
    if (!e || notepad.outcome) return std::nullopt;
    if (e->policy == NotepadPolicy::fixed_povm) return NotepadQuery{*e->povm, {}};

    std::vector<StateVector> rays;
    if (request.phi && request.others.size() == 2) {
        rays = {*request.phi, request.others[0], request.others[1]};
    } else if (request.phi) {
        rays = random_completion(*request.phi, rng);
    } else {
        rays = random_completion(haar_random_unit(rng), rng);
    }
    // Measuring the transposes collapses the prize onto the rays themselves.
    std::vector<StateVector> conj_rays;
    for (const auto& r : rays) conj_rays.push_back(conj_ray(r));
    return NotepadQuery{Povm::projective(conj_rays, {"p", "p'", "p''"}), std::move(rays)};
}

DoorChoice safe_door(const StateVector& phi, const StateVector& avoid, DegeneracyPolicy policy,
                     RandomStream& rng) {
    try {
        return {orthogonal_complement_vector(phi, avoid), false, {}};
    } catch (const DegenerateInput&) {
        StateVector chi = policy == DegeneracyPolicy::random ? haar_random_in_complement(phi, rng)
                                                             : deterministic_complement(phi);
        return {normalize_phase(chi), true, {}};
    }
}

DoorChoice host_pick_door(const HostStrategy& host, const Notepad& notepad,
                          const DoorRequest& request, RandomStream& rng) {
    auto noted_prize = [&]() -> const StateVector& {
        if (!notepad.prize) throw std::logic_error("host_pick_door: classical notepad is empty");
        return *notepad.prize;
    };
    return std::visit(
        Overloaded{
            [&](const EntangledHost& h) -> DoorChoice {
                if (!notepad.outcome) {
                    throw std::logic_error("host_pick_door: quantum notepad was not measured");
                }
                const std::size_t x = *notepad.outcome;
                if (h.policy == NotepadPolicy::fixed_povm) {
                    // tr(qᵀ F_x) = 0  ⟺  χ ⊥ conj(φ_x), the collapsed prize ray.
                    return classical_door(conj_ray(h.effect_rays.at(x)), request, rng);
                }
                const auto& rays = notepad.observable_rays;
                if (x == 0) {
                    const std::size_t pick = rng.bernoulli(0.5) ? 2 : 1;
                    return {normalize_phase(rays[pick]), false, {}};
                }
                return {normalize_phase(rays[x == 1 ? 2 : 1]), false, {}};
            },
            [&](const IgnoreNotepadHost&) -> DoorChoice {
                if (request.variant == Variant::triple_choice && request.others.size() == 2) {
                    return {normalize_phase(request.others[rng.index(2)]), false, {}};
                }
                StateVector chi = request.phi ? haar_random_in_complement(*request.phi, rng)
                                              : haar_random_unit(rng);
                return {normalize_phase(chi), false, {}};
            },
            [&](const RestartingHost& h) -> DoorChoice {
                const StateVector& r = noted_prize();
                if (request.variant == Variant::restart_on_reveal && request.phi &&
                    rng.bernoulli(h.abort_rate)) {
                    const Vec3 aim = r.vec() - inner(request.phi->vec(), r.vec()) * request.phi->vec();
                    if (aim.norm() > 1e-6) {
                        return {normalize_phase(StateVector::normalized(aim)), false, {}};
                    }
                }
                return classical_door(r, request, rng);
            },
            [&](const CompleteVNHost& h) -> DoorChoice {
                DoorChoice door = classical_door(noted_prize(), request, rng);
                if (request.variant == Variant::complete_vn) {
                    const StateVector w = orthogonal_complement_vector(door.chi, h.prize);
                    const double s = 1.0 / std::sqrt(2.0);
                    door.vn_basis = {StateVector::normalized(s * (h.prize.vec() + w.vec())),
                                     StateVector::normalized(s * (h.prize.vec() - w.vec()))};
                }
                return door;
            },
            [&](const auto&) -> DoorChoice { return classical_door(noted_prize(), request, rng); },
        },
        host);
}

Povm canonical_povm_reduction(const Povm& povm) {
    std::vector<Effect> effects;
    for (const auto& r : reduce_povm(povm)) {
        effects.push_back({r.label, r.weight * (r.phi.vec() * r.phi.vec().adjoint())});
    }
    return Povm(std::move(effects));
}

FiniteSetHost finite_set_equivalent(const EntangledHost& host) {
    if (host.policy != NotepadPolicy::fixed_povm || !host.povm) {
        throw ConfigError("only fixed_povm entangled hosts have a finite-set equivalent");
    }
    FiniteSetHost out;
    for (std::size_t i = 0; i < host.povm->size(); ++i) {
        out.vectors.push_back(conj_ray(host.effect_rays[i]));
        out.probabilities.push_back(host.povm->effects()[i].op.trace().real() / 3.0);
    }
    return out;
}

std::optional<DensityOperator> exact_mean_density(const HostStrategy& host) {
    return std::visit(
        Overloaded{
            [](const FiniteSetHost& h) -> std::optional<DensityOperator> {
                Mat3 rho = Mat3::Zero();
                for (std::size_t i = 0; i < h.vectors.size(); ++i) {
                    rho += h.probabilities[i] * (h.vectors[i].vec() * h.vectors[i].vec().adjoint());
                }
                return DensityOperator(rho);
            },
            [](const CompleteVNHost& h) -> std::optional<DensityOperator> {
                return DensityOperator::pure(h.prize);
            },
            [](const auto&) -> std::optional<DensityOperator> {
                return DensityOperator::maximally_mixed();
            },
        },
        host);
}

std::optional<std::vector<StateVector>> host_catalog(const HostStrategy& host) {
    return std::visit(
        Overloaded{
            [](const AxesHost& h) -> std::optional<std::vector<StateVector>> { return h.basis; },
            [](const FiniteSetHost& h) -> std::optional<std::vector<StateVector>> { return h.vectors; },
            [](const EntangledHost& h) -> std::optional<std::vector<StateVector>> {
                if (h.policy != NotepadPolicy::fixed_povm) return std::nullopt;
                return finite_set_equivalent(h).vectors;
            },
            [](const CompleteVNHost& h) -> std::optional<std::vector<StateVector>> {
                return std::vector<StateVector>{h.prize};
            },
            [](const IgnoreNotepadHost& h) -> std::optional<std::vector<StateVector>> {
                if (h.preparation == PrepKind::axes) return standard_basis();
                return std::nullopt;
            },
            [](const RestartingHost& h) -> std::optional<std::vector<StateVector>> {
                if (h.preparation == PrepKind::axes) return standard_basis();
                return std::nullopt;
            },
            [](const auto&) -> std::optional<std::vector<StateVector>> { return std::nullopt; },
        },
        host);
}

// ================================================================= players

std::string player_kind(const PlayerStrategy& player) {
    return std::visit(Overloaded{
                          [](const StickPlayer&) { return std::string("stick"); },
                          [](const SwitchPlayer&) { return std::string("switch"); },
                          [](const FiniteSetCheatPlayer&) { return std::string("cheat_finite"); },
                          [](const RealCheatPlayer&) { return std::string("cheat_real"); },
                          [](const AngleSweepPlayer&) { return std::string("angle"); },
                          [](const BayesOptimalPlayer&) { return std::string("bayes"); },
                          [](const RandomPlayer&) { return std::string("random"); },
                      },
                      player);
}

StateVector real_cheat_phi() {
    return StateVector(Vec3(1.0, Complex(0.0, 1.0), 0.0) / std::sqrt(2.0));
}

BayesModel bayes_model_for(const HostStrategy& host, std::size_t samples, std::uint64_t seed) {
    auto exact = [](std::vector<StateVector> v, std::vector<double> w) -> BayesModel {
        return CatalogPosterior{std::move(v), std::move(w), 1e-6, false};
    };
    auto sampled = [&](const HostStrategy& source) -> BayesModel {
        if (samples == 0) throw ConfigError("bayes model: sample count must be positive");
        RandomStream rng(seed);
        CatalogPosterior model;
        model.bandwidth = 0.05;
        for (std::size_t i = 0; i < samples; ++i) {
            model.vectors.push_back(std::get<StateVector>(host_prepare(source, rng).prize));
        }
        model.weights.assign(samples, 1.0 / static_cast<double>(samples));
        return model;
    };
    return std::visit(
        Overloaded{
            [&](const HaarHost&) -> BayesModel { return HaarPosterior{}; },
            [&](const AxesHost& h) -> BayesModel {
                return exact(h.basis, std::vector<double>(3, 1.0 / 3.0));
            },
            [&](const FiniteSetHost& h) -> BayesModel { return exact(h.vectors, h.probabilities); },
            [&](const EntangledHost& h) -> BayesModel {
                // Door chosen among the transposed triple: the conditional state
                // is the same closed form as for the Haar host.
                if (h.policy == NotepadPolicy::transpose_of_player_triple) return HaarPosterior{};
                const FiniteSetHost eq = finite_set_equivalent(h);
                return exact(eq.vectors, eq.probabilities);
            },
            [&](const CompleteVNHost& h) -> BayesModel { return exact({h.prize}, {1.0}); },
            [&](const PerturbedHaarHost& h) -> BayesModel {
                if (h.anchor == Anchor::axes) {
                    CatalogPosterior m{standard_basis(), std::vector<double>(3, 1.0 / 3.0), 1e-6, true};
                    return m;
                }
                return sampled(host);
            },
            [&](const RealVectorHost&) -> BayesModel { return sampled(host); },
            [&](const auto&) -> BayesModel {
                throw ConfigError("no posterior model for host kind '" + host_kind(host) + "'");
            },
        },
        host);
}

namespace {
constexpr std::size_t kBayesSamples = 4096;
constexpr std::uint64_t kBayesSeed = 0x9e3779b97f4a7c15ULL;

// Above this size the span check costs more than it saves; ambiguous doors
// are still caught game by game.
constexpr std::size_t kSpanCheckLimit = 2000;
constexpr std::uint64_t kCheatSeed = 0x2545f4914f6cdd1dULL;

StateVector first_for_cheat(const FiniteSetCheatPlayer& p, RandomStream& rng) {
    if (p.phi) return *p.phi;
    const auto& known = p.known;
    if (known.size() > kSpanCheckLimit) return haar_random_unit(rng);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        StateVector phi = haar_random_unit(rng);
        bool clear = true;
        for (std::size_t a = 0; a < known.size() && clear; ++a) {
            for (std::size_t b = a + 1; b < known.size(); ++b) {
                if (std::abs(det3(phi.vec(), known[a].vec(), known[b].vec())) <= 1e-6) {
                    clear = false;
                    break;
                }
            }
        }
        if (clear) return phi;
    }
    throw CheatSetupFailed("no first choice avoids every span of two catalog vectors");
}

} // namespace

PlayerStrategy resolve_player(PlayerStrategy player, const HostStrategy& host) {
    if (auto* cheat = std::get_if<FiniteSetCheatPlayer>(&player); cheat && cheat->known.empty()) {
        auto catalog = host_catalog(host);
        if (!catalog) {
            throw ConfigError("finite-set cheat needs a host with a finite catalog, not '" +
                              host_kind(host) + "'");
        }
        cheat->known = std::move(*catalog);
    }
    if (auto* cheat = std::get_if<FiniteSetCheatPlayer>(&player); cheat && !cheat->phi) {
        // One first choice for the whole run, clear of every catalog span.
        RandomStream rng(kCheatSeed);
        cheat->phi = first_for_cheat(*cheat, rng);
    }
    if (auto* bayes = std::get_if<BayesOptimalPlayer>(&player)) {
        const auto* catalog = std::get_if<CatalogPosterior>(&bayes->model);
        if (catalog && catalog->vectors.empty()) {
            bayes->model = bayes_model_for(host, kBayesSamples, kBayesSeed);
        }
    }
    return player;
}

namespace {

StateVector switch_direction(const FirstChoice& first, const StateVector& chi, RandomStream& rng) {
    if (!first.phi) return haar_random_in_complement(chi, rng);
    return orthogonal_complement_vector(*first.phi, chi);
}

StateVector project_out(const StateVector& v, const StateVector& chi) {
    return StateVector::normalized(v.vec() - inner(chi.vec(), v.vec()) * chi.vec());
}

} // namespace

FirstChoice player_first(const PlayerStrategy& player, bool triple, RandomStream& rng) {
    auto chosen = [&](const std::optional<StateVector>& phi) {
        return phi ? *phi : haar_random_unit(rng);
    };
    StateVector phi = std::visit(
        Overloaded{
            [&](const FiniteSetCheatPlayer& p) { return first_for_cheat(p, rng); },
            [&](const RealCheatPlayer& p) { return p.phi ? *p.phi : real_cheat_phi(); },
            [&](const auto& p) { return chosen(p.phi); },
        },
        player);
    FirstChoice out;
    if (triple) {
        auto basis = random_completion(phi, rng);
        out.others = {basis[1], basis[2]};
    }
    out.phi = std::move(phi);
    return out;
}

StateVector player_final_choice(const PlayerStrategy& player, const FirstChoice& first,
                                const Vec3& announced_chi, RandomStream& rng) {
    const StateVector chi = StateVector::normalized(announced_chi);
    return std::visit(
        Overloaded{
            [&](const StickPlayer&) {
                return first.phi ? *first.phi : haar_random_in_complement(chi, rng);
            },
            [&](const SwitchPlayer&) { return switch_direction(first, chi, rng); },
            [&](const RandomPlayer&) { return haar_random_in_complement(chi, rng); },
            [&](const AngleSweepPlayer& p) {
                if (!first.phi) return haar_random_in_complement(chi, rng);
                const StateVector sw = switch_direction(first, chi, rng);
                return StateVector::normalized(std::cos(p.theta) * sw.vec() +
                                               std::sin(p.theta) * first.phi->vec());
            },
            [&](const FiniteSetCheatPlayer& p) {
                try {
                    return reconstruct_finite_prize(p.known, chi.vec(), p.tolerance);
                } catch (const CheatAmbiguous&) {
                    if (!p.best_guess) throw;
                }
                std::size_t best = 0;
                double best_overlap = std::numeric_limits<double>::infinity();
                for (std::size_t a = 0; a < p.known.size(); ++a) {
                    const double o = std::abs(inner(chi.vec(), p.known[a].vec()));
                    if (o < best_overlap) {
                        best_overlap = o;
                        best = a;
                    }
                }
                return project_out(p.known[best], chi);
            },
            [&](const RealCheatPlayer& p) {
                try {
                    const bool canonical =
                        !p.phi || overlap2(*p.phi, real_cheat_phi()) >= 1.0 - kEps;
                    if (first.phi && canonical &&
                        overlap2(*first.phi, real_cheat_phi()) >= 1.0 - kEps) {
                        return reconstruct_real_prize(chi.vec());
                    }
                    return reconstruct_real_prize_general(chi.vec());
                } catch (const CheatDegenerate&) {
                    return switch_direction(first, chi, rng);
                }
            },
            [&](const BayesOptimalPlayer& p) {
                const DensityOperator rho = posterior_state(p.model, first.phi, chi.vec());
                const Mat3 keep = Mat3::Identity() - chi.vec() * chi.vec().adjoint();
                const Mat3 m = keep * rho.matrix() * keep;
                const Eigen::Vector3d ev = hermitian_eigenvalues(m);
                if (ev(2) <= kEps || ev(2) - ev(1) <= kEps) return switch_direction(first, chi, rng);
                return project_out(StateVector::normalized(top_eigenvector(m)), chi);
            },
        },
        player);
}

StateVector reconstruct_finite_prize(const std::vector<StateVector>& known, const Vec3& chi,
                                     double tolerance) {
    const Vec3 unit = chi / chi.norm();
    std::optional<std::size_t> found;
    for (std::size_t a = 0; a < known.size(); ++a) {
        if (std::abs(inner(unit, known[a].vec())) < tolerance) {
            if (found) throw CheatAmbiguous("several catalog vectors are orthogonal to the door");
            found = a;
        }
    }
    if (!found) throw CheatAmbiguous("no catalog vector is orthogonal to the door");
    return known[*found];
}

StateVector reconstruct_real_prize(const Vec3& chi) {
    const Vec3 c = normalize_phase(Vec3(chi / chi.norm()));
    if (std::abs(c(0)) < 1e-6) {
        throw CheatDegenerate("first door component vanishes; the real prize is phase-ambiguous");
    }
    const Vec3 psi(-c(2).real(), c(2).imag(), c(0).real());
    return normalize_phase(StateVector::normalized(psi));
}

StateVector reconstruct_real_prize_general(const Vec3& chi) {
    const Eigen::Vector3d re = chi.real();
    const Eigen::Vector3d im = chi.imag();
    const Eigen::Vector3d v = re.cross(im) / chi.squaredNorm();
    if (v.norm() < 1e-6) {
        throw CheatDegenerate("door has parallel real and imaginary parts");
    }
    return normalize_phase(StateVector::normalized(v.cast<Complex>()));
}

DensityOperator haar_conditional_state(const StateVector& phi, const StateVector& chi) {
    const StateVector xi = orthogonal_complement_vector(phi, chi);
    const Mat3 rho = (phi.vec() * phi.vec().adjoint()) / 3.0 +
                     2.0 * (xi.vec() * xi.vec().adjoint()) / 3.0;
    return DensityOperator(rho);
}

DensityOperator posterior_state(const BayesModel& model, const std::optional<StateVector>& phi,
                                const Vec3& announced_chi) {
    const StateVector chi = StateVector::normalized(announced_chi);
    auto haar = [&]() {
        if (!phi) {
            const Mat3 keep = Mat3::Identity() - chi.vec() * chi.vec().adjoint();
            return DensityOperator(keep / 2.0);
        }
        return haar_conditional_state(*phi, chi);
    };
    return std::visit(
        Overloaded{
            [&](const HaarPosterior&) { return haar(); },
            [&](const CatalogPosterior& m) {
                const std::size_t n = m.vectors.size();
                std::vector<double> logw(n, -std::numeric_limits<double>::infinity());
                double dmin = std::numeric_limits<double>::infinity();
                const double two_h2 = 2.0 * m.bandwidth * m.bandwidth;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!(m.weights[i] > 0.0)) continue;
                    double d;
                    if (!phi) {
                        d = std::norm(inner(chi.vec(), m.vectors[i].vec()));
                    } else {
                        try {
                            const StateVector forced = orthogonal_complement_vector(*phi, m.vectors[i]);
                            d = std::max(0.0, 1.0 - overlap2(forced, chi));
                        } catch (const DegenerateInput&) {
                            d = 0.0;  // prize on the player's ray: every door ⊥ p is possible
                        }
                    }
                    dmin = std::min(dmin, d);
                    logw[i] = std::log(m.weights[i]) - d / two_h2;
                }
                if (m.haar_fallback && !(dmin <= 25.0 * m.bandwidth * m.bandwidth)) return haar();
                const double top = *std::max_element(logw.begin(), logw.end());
                Mat3 rho = Mat3::Zero();
                double total = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double w = std::exp(logw[i] - top);
                    if (w == 0.0) continue;
                    rho += w * (m.vectors[i].vec() * m.vectors[i].vec().adjoint());
                    total += w;
                }
                rho /= total;
                rho = 0.5 * (rho + rho.adjoint()).eval();
                return DensityOperator(rho);
            },
        },
        model);
}

} // namespace qmonty
