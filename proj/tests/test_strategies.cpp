#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmonty/strategies.hpp"
#include "qmonty/strategy_json.hpp"

using namespace qmonty;

namespace {

const StateVector kDiag = StateVector::normalized(Vec3(1.0, 1.0, 1.0));

Notepad classical_note(const StateVector& prize) {
    Notepad n;
    n.prize = prize;
    return n;
}

DoorRequest strict_request(const StateVector& phi) {
    DoorRequest r;
    r.phi = phi;
    return r;
}

bool same_ray(const Vec3& a, const Vec3& b, double tol = 1e-12) {
    return std::abs(std::norm(a.dot(b)) - a.squaredNorm() * b.squaredNorm()) < tol;
}

} // namespace

TEST(axes_host, prepares_basis_vectors_uniformly) {
    const HostStrategy host = AxesHost{};
    RandomStream rng(1);
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 30000; ++i) {
        const HostPreparation p = host_prepare(host, rng);
        ASSERT_TRUE(p.notepad.catalog_index.has_value());
        const auto k = *p.notepad.catalog_index;
        ASSERT_LT((std::get<StateVector>(p.prize).vec() - StateVector::basis(int(k)).vec()).norm(), 1e-15);
        ++counts[k];
    }
    for (int c : counts) EXPECT_NEAR(c / 30000.0, 1.0 / 3.0, 4 * oracle::sigma(1.0 / 3.0, 30000));
}

TEST(axes_host, door_for_diagonal_choice) {
    RandomStream rng(2);
    const DoorChoice d =
        host_pick_door(AxesHost{}, classical_note(StateVector::basis(0)), strict_request(kDiag), rng);
    EXPECT_FALSE(d.degenerate);
    EXPECT_TRUE(same_ray(d.chi.vec(), Vec3(0.0, 1.0, -1.0) / std::sqrt(2.0)));
}

TEST(classical_host, degenerate_choice_policies) {
    RandomStream rng(3);
    const StateVector e1 = StateVector::basis(0);
    DoorRequest req = strict_request(e1);
    const DoorChoice a = host_pick_door(HaarHost{}, classical_note(e1), req, rng);
    const DoorChoice b = host_pick_door(HaarHost{}, classical_note(e1), req, rng);
    EXPECT_TRUE(a.degenerate);
    EXPECT_LT(std::abs(inner(a.chi, e1)), 1e-12);
    EXPECT_GT((a.chi.vec() - b.chi.vec()).norm(), 1e-6);  // randomized
    req.degeneracy = DegeneracyPolicy::deterministic;
    const DoorChoice c = host_pick_door(HaarHost{}, classical_note(e1), req, rng);
    const DoorChoice d = host_pick_door(HaarHost{}, classical_note(e1), req, rng);
    EXPECT_TRUE(c.degenerate);
    EXPECT_LT((c.chi.vec() - d.chi.vec()).norm(), 1e-15);
    EXPECT_LT(std::abs(inner(c.chi, e1)), 1e-12);
}

TEST(finite_host, validation) {
    EXPECT_THROW(make_finite_set_host({StateVector::basis(0)}, {0.5}), ConfigError);
    EXPECT_THROW(make_finite_set_host({StateVector::basis(0)}, {1.0, 0.0}), ConfigError);
    EXPECT_THROW(make_finite_set_host({}, {}), ConfigError);
    EXPECT_NO_THROW(make_finite_set_host({StateVector::basis(0), StateVector::basis(1)}, {0.25, 0.75}));
    EXPECT_THROW(make_axes_host({StateVector::basis(0), StateVector::basis(0), StateVector::basis(2)}),
                 ConfigError);
    const FiniteSetHost r = random_finite_set_host(100, 5);
    EXPECT_EQ(r.vectors.size(), 100u);
    const FiniteSetHost again = random_finite_set_host(100, 5);
    EXPECT_LT((r.vectors[57].vec() - again.vectors[57].vec()).norm(), 1e-300);
}

TEST(real_cheat, reconstructs_real_prize) {
    RandomStream rng(4);
    const StateVector phi = real_cheat_phi();
    for (int i = 0; i < 2000; ++i) {
        const StateVector psi = random_real_unit(rng);
        const StateVector chi = orthogonal_complement_vector(phi, psi);
        StateVector guess = StateVector::basis(0);
        try {
            guess = reconstruct_real_prize(chi.vec());
        } catch (const CheatDegenerate&) {
            continue;
        }
        ASSERT_NEAR(overlap2(guess, psi), 1.0, 1e-9);
        ASSERT_NEAR(overlap2(reconstruct_real_prize_general(chi.vec()), psi), 1.0, 1e-9);
    }
}

TEST(real_cheat, formula_examples) {
    // χ ∝ (Ψ₃, −iΨ₃, −Ψ₁ + iΨ₂) for Φ = (1, i, 0)/√2 and real Ψ.
    const Vec3 psi = Vec3(0.6, 0.0, 0.8);
    const Vec3 chi(psi(2), Complex(0, -psi(2).real()), Complex(-psi(0).real(), psi(1).real()));
    EXPECT_LT(std::abs(real_cheat_phi().vec().dot(chi)), 1e-15);
    EXPECT_LT(std::abs(psi.dot(chi)), 1e-15);
    const StateVector r = reconstruct_real_prize(chi / chi.norm());
    EXPECT_NEAR(overlap2(r, StateVector(psi)), 1.0, 1e-15);
    EXPECT_THROW(reconstruct_real_prize(Vec3(0.0, 0.0, 1.0)), CheatDegenerate);
    EXPECT_THROW(reconstruct_real_prize_general(Vec3(1.0, 0.0, 0.0)), CheatDegenerate);
}

TEST(finite_cheat, reconstruction_and_ambiguity) {
    const auto basis = standard_basis();
    for (int k = 0; k < 3; ++k) {
        const StateVector chi = orthogonal_complement_vector(kDiag, basis[k]);
        EXPECT_NEAR(overlap2(reconstruct_finite_prize(basis, chi.vec()), basis[k]), 1.0, 1e-15);
    }
    // Door along e3 is orthogonal to both e1 and e2.
    EXPECT_THROW(reconstruct_finite_prize(basis, StateVector::basis(2).vec()), CheatAmbiguous);
    EXPECT_THROW(reconstruct_finite_prize({StateVector::basis(0)}, StateVector::basis(0).vec()),
                 CheatAmbiguous);
}

TEST(finite_cheat, first_choice_avoids_spans) {
    RandomStream rng(5);
    const FiniteSetHost host = random_finite_set_host(50, 9);
    const PlayerStrategy p = resolve_player(FiniteSetCheatPlayer{}, host);
    for (int i = 0; i < 20; ++i) {
        const FirstChoice f = player_first(p, false, rng);
        for (std::size_t a = 0; a < host.vectors.size(); ++a)
            for (std::size_t b = a + 1; b < host.vectors.size(); ++b)
                ASSERT_GT(std::abs(det3(f.phi->vec(), host.vectors[a].vec(), host.vectors[b].vec())), 1e-6);
    }
    // Two catalog entries on one ray: every first choice is coplanar with them.
    const FiniteSetCheatPlayer impossible{
        {StateVector::basis(0), StateVector(Complex(0, 1) * StateVector::basis(0).vec()), StateVector::basis(1)},
        std::nullopt};
    EXPECT_THROW(player_first(impossible, false, rng), CheatSetupFailed);
}

TEST(finite_cheat, needs_a_catalog) {
    EXPECT_THROW(resolve_player(FiniteSetCheatPlayer{}, HaarHost{}), ConfigError);
    const auto p = resolve_player(FiniteSetCheatPlayer{}, AxesHost{});
    EXPECT_EQ(std::get<FiniteSetCheatPlayer>(p).known.size(), 3u);
}

TEST(players, final_choices_are_orthogonal_to_the_door) {
    RandomStream rng(6);
    const std::vector<PlayerStrategy> players{StickPlayer{}, SwitchPlayer{}, RandomPlayer{},
                                              AngleSweepPlayer{0.3, std::nullopt},
                                              BayesOptimalPlayer{HaarPosterior{}, std::nullopt}};
    for (const auto& player : players) {
        for (int i = 0; i < 200; ++i) {
            const FirstChoice f = player_first(player, false, rng);
            const StateVector psi = haar_random_unit(rng);
            const StateVector chi = orthogonal_complement_vector(*f.phi, psi);
            const StateVector pp = player_final_choice(player, f, chi.vec(), rng);
            ASSERT_LT(std::abs(inner(pp, chi)), 1e-12) << player_kind(player);
        }
    }
}

TEST(players, switch_and_stick_single_game_values) {
    RandomStream rng(7);
    std::mt19937_64 g(8);
    for (int i = 0; i < 500; ++i) {
        const auto phi_o = oracle::haar(g), psi_o = oracle::haar(g);
        const StateVector phi(Vec3(phi_o[0], phi_o[1], phi_o[2])), psi(Vec3(psi_o[0], psi_o[1], psi_o[2]));
        const StateVector chi = orthogonal_complement_vector(phi, psi);
        FirstChoice f;
        f.phi = phi;
        const StateVector sw = player_final_choice(SwitchPlayer{}, f, chi.vec(), rng);
        const StateVector st = player_final_choice(StickPlayer{}, f, chi.vec(), rng);
        ASSERT_NEAR(overlap2(sw, psi), oracle::switch_win(phi_o, psi_o), 1e-12);
        ASSERT_NEAR(overlap2(st, psi), oracle::stick_win(phi_o, psi_o), 1e-12);
    }
}

TEST(players, angle_player_matches_conditional_trace) {
    std::mt19937_64 g(9);
    RandomStream rng(10);
    for (double theta : {0.0, 0.3, 1.0, 1.5}) {
        const auto phi_o = oracle::haar(g), psi_o = oracle::haar(g);
        const auto chi_o = oracle::perp(phi_o, psi_o);
        FirstChoice f;
        f.phi = StateVector(Vec3(phi_o[0], phi_o[1], phi_o[2]));
        const Vec3 chi(chi_o[0], chi_o[1], chi_o[2]);
        const StateVector pp = player_final_choice(AngleSweepPlayer{theta, std::nullopt}, f, chi, rng);
        const oracle::V pp_o{pp[0], pp[1], pp[2]};
        const double expected = std::sin(theta) * std::sin(theta) / 3.0 + 2.0 * std::cos(theta) * std::cos(theta) / 3.0;
        EXPECT_NEAR(oracle::conditional_trace(phi_o, chi_o, pp_o), expected, 1e-12);
    }
}

TEST(triple, random_completion_triple_and_transpose_door) {
    RandomStream rng(11);
    const EntangledHost host = make_entangled_transpose();
    for (int i = 0; i < 300; ++i) {
        const FirstChoice f = player_first(SwitchPlayer{}, true, rng);
        ASSERT_EQ(f.others.size(), 2u);
        DoorRequest req;
        req.variant = Variant::triple_choice;
        req.phi = f.phi;
        req.others = f.others;
        Notepad note;
        auto query = host_notepad_observable(host, note, req, rng);
        ASSERT_TRUE(query.has_value());
        const NotepadOutcome out = measure_notepad(maximally_entangled(), query->povm, rng);
        note.outcome = out.index;
        note.observable_rays = query->rays;
        const DoorChoice d = host_pick_door(host, note, req, rng);
        const bool listed = overlap2(d.chi, f.others[0]) > 1 - 1e-12 || overlap2(d.chi, f.others[1]) > 1 - 1e-12;
        ASSERT_TRUE(listed);
        ASSERT_LT(born_probability(out.post, Projector::onto(d.chi)), 1e-12);
    }
}

TEST(povm_reduction, merges_rays_and_rejects_rank_two) {
    // Two halves of the same ray plus the other two axes.
    const Mat3 e1 = StateVector::basis(0).vec() * StateVector::basis(0).vec().adjoint();
    const Mat3 e2 = StateVector::basis(1).vec() * StateVector::basis(1).vec().adjoint();
    const Mat3 e3 = StateVector::basis(2).vec() * StateVector::basis(2).vec().adjoint();
    const Povm split({{"a", 0.5 * e1}, {"b", 0.5 * e1}, {"c", e2}, {"d", e3}, {"z", Mat3::Zero()}});
    const Povm reduced = canonical_povm_reduction(split);
    ASSERT_EQ(reduced.size(), 3u);
    EXPECT_EQ(reduced.effects()[0].label, "a");
    double total = 0;
    for (const auto& e : reduced.effects()) total += e.op.trace().real();
    EXPECT_NEAR(total, 3.0, 1e-12);  // Σ v_x = 3
    EXPECT_THROW(canonical_povm_reduction(Povm({{"big", e1 + e2}, {"c", e3}})), EffectRankTooHigh);
}

TEST(povm_reduction, trine_weights_and_equivalent_catalog) {
    // Four-outcome rank-1 POVM: rays of a tetrahedral frame, weights 3/4.
    std::vector<Effect> effects;
    const std::vector<Vec3> rays{Vec3(1.0, 0.0, 0.0),
                                 Vec3(1.0 / 3.0, std::sqrt(8.0) / 3.0, 0.0),
                                 Vec3(1.0 / 3.0, -std::sqrt(2.0) / 3.0, Complex(0, std::sqrt(6.0) / 3.0)),
                                 Vec3(1.0 / 3.0, -std::sqrt(2.0) / 3.0, Complex(0, -std::sqrt(6.0) / 3.0))};
    Mat3 sum = Mat3::Zero();
    for (const auto& r : rays) sum += r * r.adjoint();
    const double w = 3.0 / sum.trace().real();
    for (std::size_t i = 0; i < rays.size(); ++i) {
        effects.push_back({std::to_string(i), w * (rays[i] * rays[i].adjoint())});
    }
    const Povm povm(effects);
    const EntangledHost host = make_entangled_fixed_povm(povm);
    const FiniteSetHost eq = finite_set_equivalent(host);
    ASSERT_EQ(eq.vectors.size(), 4u);
    double total = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        total += eq.probabilities[i];
        EXPECT_TRUE(same_ray(eq.vectors[i].vec(), rays[i].conjugate()));
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LT(max_abs_entry(exact_mean_density(eq)->matrix() - Mat3::Identity() / 3.0), 1e-12);
}

TEST(catalogs, per_host) {
    EXPECT_EQ(host_catalog(AxesHost{})->size(), 3u);
    EXPECT_FALSE(host_catalog(HaarHost{}).has_value());
    EXPECT_FALSE(host_catalog(RealVectorHost{}).has_value());
    EXPECT_FALSE(host_catalog(make_entangled_transpose()).has_value());
    EXPECT_EQ(host_catalog(make_entangled_fixed_povm(Povm::projective(fourier_basis())))->size(), 3u);
}

TEST(bayes, posterior_on_catalog_and_haar) {
    const FirstChoice f{kDiag, {}};
    const StateVector chi = orthogonal_complement_vector(kDiag, StateVector::basis(1));
    const DensityOperator rho = posterior_state(bayes_model_for(AxesHost{}, 0, 0), kDiag, chi.vec());
    EXPECT_NEAR(rho.matrix()(1, 1).real(), 1.0, 1e-9);
    const DensityOperator h = posterior_state(HaarPosterior{}, kDiag, chi.vec());
    EXPECT_NEAR((kDiag.vec().adjoint() * h.matrix() * kDiag.vec())(0, 0).real(), 1.0 / 3.0, 1e-12);
    RandomStream rng(12);
    const auto player = BayesOptimalPlayer{bayes_model_for(AxesHost{}, 0, 0), kDiag};
    EXPECT_NEAR(overlap2(player_final_choice(player, f, chi.vec(), rng), StateVector::basis(1)), 1.0, 1e-9);
    EXPECT_THROW(bayes_model_for(IgnoreNotepadHost{}, 10, 0), ConfigError);
}

TEST(ignore_host, opens_in_complement_of_choice) {
    RandomStream rng(13);
    for (int i = 0; i < 100; ++i) {
        const HostPreparation prep = host_prepare(IgnoreNotepadHost{}, rng);
        const DoorChoice d = host_pick_door(IgnoreNotepadHost{}, prep.notepad, strict_request(kDiag), rng);
        ASSERT_LT(std::abs(inner(d.chi, kDiag)), 1e-12);
    }
}

TEST(complete_vn_host, basis_at_45_degrees) {
    RandomStream rng(14);
    const CompleteVNHost host{StateVector::basis(0)};
    DoorRequest req = strict_request(kDiag);
    req.variant = Variant::complete_vn;
    const DoorChoice d = host_pick_door(host, classical_note(host.prize), req, rng);
    ASSERT_EQ(d.vn_basis.size(), 2u);
    EXPECT_NEAR(overlap2(d.vn_basis[0], host.prize), 0.5, 1e-12);
    EXPECT_NEAR(overlap2(d.vn_basis[1], host.prize), 0.5, 1e-12);
    EXPECT_LT(std::abs(inner(d.vn_basis[0], d.vn_basis[1])), 1e-12);
    EXPECT_LT(std::abs(inner(d.vn_basis[0], d.chi)), 1e-12);
}

TEST(perturbed_host, lambda_bounds) {
    EXPECT_THROW(validate(PerturbedHaarHost{1.5, Anchor::axes}), ConfigError);
    EXPECT_THROW(validate(RestartingHost{PrepKind::axes, -0.1}), ConfigError);
    RandomStream rng(15);
    int on_axis = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto prep = host_prepare(PerturbedHaarHost{1.0, Anchor::axes}, rng);
        on_axis += prep.notepad.catalog_index.has_value();
    }
    EXPECT_EQ(on_axis, 2000);
}
