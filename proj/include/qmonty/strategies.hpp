// strategies.hpp: quiz-master (host) and player strategies.
//
// Hosts and players only *choose*: the referee in engine.hpp performs every
// physical measurement, including measurements on a quantum notepad.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qmonty/hilbert.hpp"
#include "qmonty/rules.hpp"

namespace qmonty {

// ================================================================= hosts

std::vector<StateVector> standard_basis();

// Prize on one of three orthonormal axes, each with probability 1/3.
struct AxesHost {
    std::vector<StateVector> basis = standard_basis();
};

// Prize drawn from a finite catalog with the given probabilities.
struct FiniteSetHost {
    std::vector<StateVector> vectors;
    std::vector<double> probabilities;
};

// Prize uniform on the real unit sphere.
struct RealVectorHost {};

// Prize uniform under the unitary group.
struct HaarHost {};

enum class NotepadPolicy { fixed_povm, transpose_of_player_triple };

// Prize maximally entangled with a 3-dimensional quantum notepad.
struct EntangledHost {
    NotepadPolicy policy = NotepadPolicy::transpose_of_player_triple;
    // fixed_povm only: canonical rank-1 POVM and the unit rays of its effects.
    std::optional<Povm> povm;
    std::vector<StateVector> effect_rays;
    std::vector<double> effect_weights;
    // fixed_povm only: measure the notepad right after preparation instead of
    // at door-opening time.
    bool measure_at_preparation = false;
};

enum class PrepKind { haar, axes };

// Opens a Haar-random door orthogonal to p without looking at the notepad.
// Only legal under rules that tolerate revealing the prize.
struct IgnoreNotepadHost {
    PrepKind preparation = PrepKind::haar;
};

// Prize fixed at a publicly known vector; host uses the complete von Neumann
// measurement when the rules allow it.
struct CompleteVNHost {
    StateVector prize = StateVector::basis(0);
};

enum class Anchor { axes, real };

// With probability lambda the prize comes from the anchor distribution
// (axes or real vectors), otherwise Haar. lambda = 0 is exactly Haar.
struct PerturbedHaarHost {
    double lambda = 0.0;
    Anchor anchor = Anchor::axes;
};

// Classical-notepad host that, under restart_on_reveal, aims the door at
// the prize with probability abort_rate, cancelling the round whenever the
// player's choice misses the prize.
struct RestartingHost {
    PrepKind preparation = PrepKind::axes;
    double abort_rate = 0.5;
};

using HostStrategy = std::variant<AxesHost, FiniteSetHost, RealVectorHost, HaarHost,
                                  EntangledHost, IgnoreNotepadHost, CompleteVNHost,
                                  PerturbedHaarHost, RestartingHost>;

AxesHost make_axes_host(std::vector<StateVector> basis);
FiniteSetHost make_finite_set_host(std::vector<StateVector> vectors,
                                   std::vector<double> probabilities);
// `count` Haar-random catalog vectors with equal weights.
FiniteSetHost random_finite_set_host(std::size_t count, std::uint64_t catalog_seed);
// Runs canonical_povm_reduction on the POVM.
EntangledHost make_entangled_fixed_povm(const Povm& povm, bool measure_at_preparation = false);
EntangledHost make_entangled_transpose();
// Fixed-POVM host from effects weight_x |ray_x⟩⟨ray_x| that are already
// canonical (distinct rays, unit vectors). Restores serialized hosts exactly.
EntangledHost make_entangled_canonical(const std::vector<std::string>& labels,
                                       const std::vector<double>& weights,
                                       const std::vector<StateVector>& rays,
                                       bool measure_at_preparation);

// Throws ConfigError when a host's parameters violate its invariants.
void validate(const HostStrategy& host);

// Short kind tag ("axes", "finite", ...), matching the JSON schema.
std::string host_kind(const HostStrategy& host);

// The host's private record of the preparation.
struct Notepad {
    std::optional<StateVector> prize;          // classical note of the prize ray
    std::optional<std::size_t> catalog_index;  // finite catalogs / axes
    std::optional<std::size_t> outcome;        // quantum notepad measurement result
    std::string outcome_label;
    // Game-space rays whose transposes formed the notepad observable
    // (transpose policy); outcome k collapses the prize onto rays[k].
    std::vector<StateVector> observable_rays;
};

struct HostPreparation {
    PrizeState prize;
    Notepad notepad;
};

HostPreparation host_prepare(const HostStrategy& host, RandomStream& rng);

// Everything the host may know about the player's first move.
struct DoorRequest {
    Variant variant = Variant::strict;
    std::optional<StateVector> phi;   // absent under open_players_door
    std::vector<StateVector> others;  // p', p'' rays under triple_choice
    DegeneracyPolicy degeneracy = DegeneracyPolicy::random;
};

struct NotepadQuery {
    Povm povm;
    std::vector<StateVector> rays;  // see Notepad::observable_rays
};

// Observable to measure on a quantum notepad right after preparation.
std::optional<Povm> host_early_observable(const HostStrategy& host);
// Observable to measure on a quantum notepad before opening a door;
// nullopt for classical notepads or when the notepad was already read.
std::optional<NotepadQuery> host_notepad_observable(const HostStrategy& host,
                                                    const Notepad& notepad,
                                                    const DoorRequest& request,
                                                    RandomStream& rng);

struct DoorChoice {
    StateVector chi;
    // True when the constraints left more than one legal door and the
    // degeneracy policy picked one.
    bool degenerate = false;
    // complete_vn only: the two projections q', q'' completing the basis.
    std::vector<StateVector> vn_basis;
};

DoorChoice host_pick_door(const HostStrategy& host, const Notepad& notepad,
                          const DoorRequest& request, RandomStream& rng);

// Door orthogonal to phi and to `avoid`; applies the degeneracy policy when
// the two are parallel.
DoorChoice safe_door(const StateVector& phi, const StateVector& avoid, DegeneracyPolicy policy,
                     RandomStream& rng);

// Merges effects sharing a ray. Throws EffectRankTooHigh for effects of rank >= 2.
Povm canonical_povm_reduction(const Povm& povm);

// The finite-set host with vectors conj(φ_x) and probabilities v_x / 3 that
// is strategically equivalent to a fixed-POVM entangled host.
FiniteSetHost finite_set_equivalent(const EntangledHost& host);

// Exact mean density operator of the host's preparation, when closed form.
std::optional<DensityOperator> exact_mean_density(const HostStrategy& host);

// Catalog of prize vectors a cheating player may assume (axes, finite sets,
// fixed-POVM entangled hosts through their finite equivalent).
std::optional<std::vector<StateVector>> host_catalog(const HostStrategy& host);

// =============================================================== players

struct StickPlayer {
    std::optional<StateVector> phi;
};

struct SwitchPlayer {
    std::optional<StateVector> phi;
};

// Knows the host's finite catalog and reads the prize off the announced door.
struct FiniteSetCheatPlayer {
    std::vector<StateVector> known;
    std::optional<StateVector> phi;
    double tolerance = 1e-6;
    // With an ambiguous announcement (e.g. truncated digits) pick the closest
    // candidate instead of raising CheatAmbiguous.
    bool best_guess = true;
};

// Universal cheat against real-vector hosts.
struct RealCheatPlayer {
    std::optional<StateVector> phi;  // default (1, i, 0)/√2
};

// Final choice cos θ · (switch) + sin θ · (stick).
struct AngleSweepPlayer {
    double theta = 0.0;
    std::optional<StateVector> phi;
};

struct HaarPosterior {};

// Posterior over a catalog of prize vectors, weighted by how closely the door
// each vector would force matches the announced one (bandwidth in 1 − |⟨χ_i|χ⟩|²
// units, Gaussian kernel). With haar_fallback the catalog is a set of atoms
// mixed with a Haar component: when no atom is consistent with the door the
// Haar posterior applies.
struct CatalogPosterior {
    std::vector<StateVector> vectors;
    std::vector<double> weights;
    double bandwidth = 1e-6;
    bool haar_fallback = false;
};

using BayesModel = std::variant<HaarPosterior, CatalogPosterior>;

// Plays the top eigenvector of (1 − q) ρ̂_q (1 − q) under its host model.
// An empty CatalogPosterior means "derive the model from the host"; see
// resolve_player.
struct BayesOptimalPlayer {
    BayesModel model;
    std::optional<StateVector> phi;
};

// Haar-random final door in the complement of q.
struct RandomPlayer {
    std::optional<StateVector> phi;
};

using PlayerStrategy = std::variant<StickPlayer, SwitchPlayer, FiniteSetCheatPlayer,
                                    RealCheatPlayer, AngleSweepPlayer, BayesOptimalPlayer,
                                    RandomPlayer>;

std::string player_kind(const PlayerStrategy& player);

// Closed form for Haar hosts, exact enumeration for finite catalogs, and a
// sampled catalog of `samples` preparations for other classical hosts.
// Throws ConfigError for hosts without a posterior model.
BayesModel bayes_model_for(const HostStrategy& host, std::size_t samples, std::uint64_t seed);

// Fills in host-derived knowledge (cheat catalogs, Bayes models) a player is
// assumed to have.
PlayerStrategy resolve_player(PlayerStrategy player, const HostStrategy& host);

struct FirstChoice {
    std::optional<StateVector> phi;
    std::vector<StateVector> others;  // p', p'' for triple_choice
};

FirstChoice player_first(const PlayerStrategy& player, bool triple, RandomStream& rng);

// p′ given the first choice and the announced (possibly truncated) door.
StateVector player_final_choice(const PlayerStrategy& player, const FirstChoice& first,
                                const Vec3& announced_chi, RandomStream& rng);

// The unique catalog vector orthogonal to χ within `tolerance`.
// Throws CheatAmbiguous for zero or several candidates.
StateVector reconstruct_finite_prize(const std::vector<StateVector>& known, const Vec3& chi,
                                     double tolerance = 1e-6);

// Ψ ∝ (−Re χ₃, Im χ₃, χ₁) after making χ₁ real, valid for Φ = (1, i, 0)/√2.
// Throws CheatDegenerate when |χ₁| < 1e-6.
StateVector reconstruct_real_prize(const Vec3& chi);

// Ψ ∝ Re χ × Im χ, valid for any Φ with independent real and imaginary parts.
// Throws CheatDegenerate when the cross product is below 1e-6.
StateVector reconstruct_real_prize_general(const Vec3& chi);

StateVector real_cheat_phi();

// ρ̂_q ascribed by a Bayes player to the game space after the announcement.
DensityOperator posterior_state(const BayesModel& model, const std::optional<StateVector>& phi,
                                const Vec3& announced_chi);

// Closed-form conditional state p/3 + 2/3 (1 − p − q) for Haar hosts.
DensityOperator haar_conditional_state(const StateVector& phi, const StateVector& chi);

} // namespace qmonty
