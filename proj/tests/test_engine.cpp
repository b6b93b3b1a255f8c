#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "qmonty/engine.hpp"
#include "qmonty/lab.hpp"

using namespace qmonty;

namespace {

const StateVector kDiag = StateVector::normalized(Vec3(1.0, 1.0, 1.0));

std::shared_ptr<const HostStrategy> share(HostStrategy h) {
    return std::make_shared<const HostStrategy>(std::move(h));
}

RuleSet rules(Variant v) {
    RuleSet r;
    r.variant = v;
    return r;
}

// Finds a seed whose axes preparation puts the prize on e_k.
GameSession axes_session_with_prize(int k, Variant v = Variant::strict) {
    for (std::uint64_t s = 0;; ++s) {
        GameSession g(rules(v), share(AxesHost{}), RandomStream(s));
        if (g.notepad().catalog_index == static_cast<std::size_t>(k)) return g;
    }
}

} // namespace

TEST(session, axes_preparation_and_notepad) {
    GameSession g(rules(Variant::strict), share(AxesHost{}), RandomStream(1));
    EXPECT_EQ(g.stage(), Stage::prepared);
    ASSERT_TRUE(g.notepad().catalog_index.has_value());
    const auto& prize = std::get<StateVector>(g.prize_state());
    EXPECT_NEAR(std::abs(prize[static_cast<int>(*g.notepad().catalog_index)]), 1.0, 1e-15);
}

TEST(session, entangled_prize_is_omega) {
    GameSession g(rules(Variant::strict), share(make_entangled_transpose()), RandomStream(5));
    const auto& joint = std::get<JointState>(g.prize_state());
    EXPECT_LT((joint.vec() - maximally_entangled().vec()).norm(), 1e-15);
}

TEST(session, haar_preparation_is_seeded) {
    GameSession a(rules(Variant::strict), share(HaarHost{}), RandomStream(77));
    GameSession b(rules(Variant::strict), share(HaarHost{}), RandomStream(77));
    EXPECT_TRUE((std::get<StateVector>(a.prize_state()).vec().array() ==
                 std::get<StateVector>(b.prize_state()).vec().array())
                    .all());
}

TEST(session, complete_vn_needs_fixed_prize) {
    EXPECT_THROW(GameSession(rules(Variant::complete_vn), share(HaarHost{}), RandomStream(1)), ConfigError);
    EXPECT_NO_THROW(GameSession(rules(Variant::complete_vn), share(CompleteVNHost{}), RandomStream(1)));
}

TEST(stages, choose_validation) {
    GameSession g(rules(Variant::strict), share(HaarHost{}), RandomStream(2));
    Mat3 two = Mat3::Zero();
    two(0, 0) = two(1, 1) = 1.0;
    EXPECT_THROW(g.player_choose(Projector::from_matrix(two)), InvalidProjector);
    EXPECT_THROW(g.player_final(Projector::onto(kDiag)), WrongStage);
    EXPECT_THROW(g.host_open_door(), WrongStage);
    g.player_choose(Projector::onto(kDiag));
    EXPECT_EQ(g.stage(), Stage::chosen);
    EXPECT_THROW(g.player_choose(Projector::onto(kDiag)), WrongStage);
}

TEST(stages, triple_validation) {
    GameSession g(rules(Variant::triple_choice), share(make_entangled_transpose()), RandomStream(3));
    const auto e = standard_basis();
    EXPECT_THROW(g.player_choose(Projector::onto(e[0])), IncompleteTriple);
    EXPECT_THROW(g.player_choose(Projector::onto(e[0]), Projector::onto(e[1]), Projector::onto(e[1])),
                 IncompleteTriple);
    g.player_choose(Projector::onto(e[0]), Projector::onto(e[1]), Projector::onto(e[2]));
    EXPECT_EQ(g.stage(), Stage::chosen);
    GameSession s(rules(Variant::strict), share(HaarHost{}), RandomStream(3));
    EXPECT_THROW(s.player_choose(Projector::onto(e[0]), Projector::onto(e[1]), Projector::onto(e[2])),
                 RuleViolation);
}

TEST(door, axes_example_announcement) {
    GameSession g = axes_session_with_prize(0);
    g.player_choose(Projector::onto(kDiag));
    const Announcement a = g.host_open_door();
    EXPECT_EQ(a.stage, Stage::opened);
    EXPECT_FALSE(a.door_yes);
    EXPECT_NEAR(std::abs(a.announced(0)), 0.0, 1e-15);
    EXPECT_NEAR(a.announced(1).real(), 1.0 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(a.announced(2).real(), -1.0 / std::sqrt(2.0), 1e-15);
}

TEST(door, strict_legal_hosts_never_reveal) {
    const std::vector<HostStrategy> hosts{AxesHost{}, HaarHost{}, RealVectorHost{}, random_finite_set_host(20, 1),
                                          make_entangled_transpose(),
                                          make_entangled_fixed_povm(Povm::projective(standard_basis())),
                                          PerturbedHaarHost{0.5, Anchor::axes}, RestartingHost{}, CompleteVNHost{}};
    for (const auto& h : hosts) {
        auto host = share(h);
        for (std::uint64_t i = 0; i < 3000; ++i) {
            GameSession g(rules(Variant::strict), host, RandomStream::substream(9, i));
            RandomStream prng = RandomStream::substream(9, i, 1);
            g.player_choose(Projector::onto(haar_random_unit(prng)));
            const Announcement a = g.host_open_door();
            ASSERT_FALSE(a.door_yes) << host_kind(h);
            ASSERT_LT(overlap2(g.p()->ray(), g.q()->ray()), kEps);
        }
    }
}

TEST(door, ignore_host_violates_strict_rules) {
    auto host = share(IgnoreNotepadHost{});
    int violations = 0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        GameSession g(rules(Variant::strict), host, RandomStream(i));
        g.player_choose(Projector::onto(kDiag));
        try {
            g.host_open_door();
        } catch (const HostViolation&) {
            ++violations;
            EXPECT_EQ(g.stage(), Stage::aborted);
        }
    }
    EXPECT_GT(violations, 0);
}

TEST(door, reveal_wins_finishes_as_win) {
    auto host = share(IgnoreNotepadHost{PrepKind::axes});
    int reveals = 0;
    for (std::uint64_t i = 0; i < 300; ++i) {
        GameSession g(rules(Variant::reveal_wins), host, RandomStream(i));
        g.player_choose(Projector::onto(kDiag));
        const Announcement a = g.host_open_door();
        if (a.door_yes) {
            ++reveals;
            EXPECT_EQ(g.stage(), Stage::finished);
            EXPECT_TRUE(g.won());
        } else {
            EXPECT_EQ(g.stage(), Stage::opened);
        }
    }
    EXPECT_GT(reveals, 0);
}

TEST(door, restart_on_reveal_restarts_and_caps) {
    auto host = share(RestartingHost{PrepKind::axes, 1.0});
    int restarted = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        GameSession g(rules(Variant::restart_on_reveal), host, RandomStream(i));
        g.player_choose(Projector::onto(StateVector::basis(0)));
        const Announcement a = g.host_open_door();
        if (a.stage == Stage::prepared) {
            ++restarted;
            EXPECT_EQ(g.restart_count(), 1);
            EXPECT_EQ(g.transcript().attempts.size(), 2u);
        }
    }
    EXPECT_GT(restarted, 0);
    RuleSet capped = rules(Variant::restart_on_reveal);
    capped.max_restarts = 0;
    for (std::uint64_t i = 0; i < 50; ++i) {
        GameSession g(capped, host, RandomStream(i));
        g.player_choose(Projector::onto(StateVector::basis(0)));
        const Announcement a = g.host_open_door();
        if (a.door_yes) {
            EXPECT_EQ(a.stage, Stage::aborted);
            EXPECT_EQ(g.stage(), Stage::aborted);
        }
    }
}

TEST(door, triple_choice_opens_listed_door) {
    auto host = share(make_entangled_transpose());
    RandomStream prng(4);
    for (std::uint64_t i = 0; i < 2000; ++i) {
        GameSession g(rules(Variant::triple_choice), host, RandomStream(i));
        const auto b = random_completion(haar_random_unit(prng), prng);
        g.player_choose(Projector::onto(b[0]), Projector::onto(b[1]), Projector::onto(b[2]));
        const Announcement a = g.host_open_door();
        ASSERT_FALSE(a.door_yes);
        const Mat3 q = g.q()->matrix();
        const double d1 = max_abs_entry(q - Projector::onto(b[1]).matrix());
        const double d2 = max_abs_entry(q - Projector::onto(b[2]).matrix());
        ASSERT_LT(std::min(d1, d2), kEps);
    }
}

TEST(door, quantum_notepad_keeps_game_state) {
    auto host = share(make_entangled_fixed_povm(Povm::projective(fourier_basis())));
    GameSession g(rules(Variant::strict), host, RandomStream(6));
    g.player_choose(Projector::onto(kDiag));
    g.host_open_door();
    // After measurement the game factor is a pure ray orthogonal to q.
    const auto& joint = std::get<JointState>(g.prize_state());
    EXPECT_LT(born_probability(joint, *g.q()), 1e-12);
}

TEST(final, orthogonality_enforced) {
    GameSession g = axes_session_with_prize(0);
    g.player_choose(Projector::onto(kDiag));
    g.host_open_door();
    EXPECT_THROW(g.player_final(*g.q()), RuleViolation);
    EXPECT_THROW(g.player_final(Projector::onto(StateVector::basis(1))), RuleViolation);
    EXPECT_TRUE(g.player_final(Projector::onto(StateVector::basis(0))));
    EXPECT_EQ(g.stage(), Stage::finished);
}

TEST(final, switch_wins_with_oracle_probability) {
    // Fixed prize and choice: switch wins w.p. 1 - |<Φ|Ψ>|².
    const StateVector phi = kDiag;
    auto host = share(make_finite_set_host({StateVector::normalized(Vec3(1.0, Complex(0, 1), 0.3))}, {1.0}));
    const auto& psi = std::get<FiniteSetHost>(*host).vectors[0];
    const oracle::V phi_o{phi[0], phi[1], phi[2]}, psi_o{psi[0], psi[1], psi[2]};
    const double w = oracle::switch_win(phi_o, psi_o);
    const int n = 20000;
    int wins = 0;
    RandomStream prng(1);
    for (int i = 0; i < n; ++i) {
        GameSession g(rules(Variant::strict), host, RandomStream::substream(3, i));
        g.player_choose(Projector::onto(phi));
        const Announcement a = g.host_open_door();
        FirstChoice f{phi, {}};
        wins += g.player_final(Projector::onto(player_final_choice(SwitchPlayer{}, f, a.announced, prng)));
    }
    EXPECT_NEAR(wins / double(n), w, 4 * oracle::sigma(w, n));
}

TEST(variants, complete_vn_examples) {
    // q' = projector(prize): the collapse is a no-op and p' = q' always wins.
    GameSession g(rules(Variant::complete_vn), share(CompleteVNHost{}), RandomStream(1));
    g.player_choose(Projector::onto(StateVector::basis(1)));
    EXPECT_THROW(g.apply_variant_complete_vn({StateVector::basis(1), StateVector::basis(0), StateVector::basis(2)}),
                 RuleViolation);  // q not orthogonal to p
    g.apply_variant_complete_vn({StateVector::basis(2), StateVector::basis(0), StateVector::basis(1)});
    EXPECT_EQ(g.stage(), Stage::opened);
    EXPECT_TRUE(g.player_final(Projector::onto(StateVector::basis(0))));

    // Channel on I/3 in any basis gives I/3.
    const auto b = fourier_basis();
    Mat3 out = Mat3::Zero();
    const Mat3 rho = Mat3::Identity() / 3.0;
    for (const auto& v : b) {
        const Mat3 p = v.vec() * v.vec().adjoint();
        out += p * rho * p;
    }
    EXPECT_LT(max_abs_entry(out - rho), 1e-15);

    GameSession h(rules(Variant::complete_vn), share(CompleteVNHost{}), RandomStream(2));
    h.player_choose(Projector::onto(StateVector::basis(1)));
    EXPECT_THROW(h.apply_variant_complete_vn({StateVector::basis(0), StateVector::basis(1), StateVector::basis(2)}),
                 RuleViolation);  // q hits the prize
}

TEST(variants, touch_equalizes) {
    GameSession g(rules(Variant::touch_allowed), share(HaarHost{}), RandomStream(3));
    g.player_choose(Projector::onto(kDiag));
    g.host_open_door();
    const auto& rho = std::get<DensityOperator>(g.prize_state());
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
    EXPECT_NEAR(born_probability(rho, *g.p()), 0.5, 1e-12);
    const Projector other = Projector::from_matrix(Mat3::Identity() - g.p()->matrix() - g.q()->matrix());
    EXPECT_NEAR(born_probability(rho, other), 0.5, 1e-12);
    GameSession s(rules(Variant::strict), share(HaarHost{}), RandomStream(3));
    s.player_choose(Projector::onto(kDiag));
    s.host_open_door();
    EXPECT_THROW(s.apply_variant_touch(), RuleViolation);
}

TEST(variants, open_players_door_skips_stage_two) {
    GameSession g(rules(Variant::open_players_door), share(HaarHost{}), RandomStream(4));
    EXPECT_THROW(g.player_choose(Projector::onto(kDiag)), WrongStage);
    const Announcement a = g.host_open_door();
    EXPECT_EQ(a.stage, Stage::opened);
    EXPECT_FALSE(g.p().has_value());
    EXPECT_TRUE(g.transcript().attempts[0].degenerate);
}

TEST(truncation, examples) {
    const Vec3 chi = Vec3(0.0, 1.0, -1.0) / std::sqrt(2.0);
    const Vec3 t = truncate_announcement(chi, 3);
    EXPECT_EQ(t(0), Complex(0.0, 0.0));
    EXPECT_EQ(t(1), Complex(0.707, 0.0));
    EXPECT_EQ(t(2), Complex(-0.707, 0.0));
    RandomStream rng(5);
    for (int i = 0; i < 100; ++i) {
        const Vec3 v = haar_random_unit(rng).vec();
        ASSERT_TRUE((truncate_announcement(v, 17).array() == v.array()).all());
    }
    EXPECT_THROW(truncate_announcement(chi, 0), ConfigError);
}

TEST(truncation, final_choice_snapped_within_tolerance) {
    RuleSet r = rules(Variant::strict);
    r.announce_precision_digits = 4;
    GameSession g(r, share(HaarHost{}), RandomStream(6));
    g.player_choose(Projector::onto(kDiag));
    const Announcement a = g.host_open_door();
    EXPECT_GT((a.announced - a.chi).norm(), 0.0);
    RandomStream prng(1);
    const StateVector pp = player_final_choice(SwitchPlayer{}, FirstChoice{kDiag, {}}, a.announced, prng);
    g.player_final(Projector::onto(pp));
    EXPECT_TRUE(g.transcript().snapped);
    EXPECT_LT(overlap2(g.p_prime()->ray(), g.q()->ray()), 1e-20);
}

TEST(transcripts, replay_is_bit_identical) {
    struct Case {
        HostStrategy host;
        PlayerStrategy player;
        Variant variant;
    };
    const std::vector<Case> cases{
        {HaarHost{}, SwitchPlayer{}, Variant::strict},
        {AxesHost{}, FiniteSetCheatPlayer{standard_basis(), kDiag}, Variant::strict},
        {RealVectorHost{}, RealCheatPlayer{}, Variant::strict},
        {make_entangled_transpose(), SwitchPlayer{}, Variant::triple_choice},
        {make_entangled_fixed_povm(Povm::projective(fourier_basis()), true), StickPlayer{}, Variant::strict},
        {IgnoreNotepadHost{}, SwitchPlayer{}, Variant::reveal_wins},
        {CompleteVNHost{}, RandomPlayer{}, Variant::complete_vn},
        {HaarHost{}, StickPlayer{}, Variant::touch_allowed},
        {RestartingHost{}, SwitchPlayer{}, Variant::restart_on_reveal},
        {HaarHost{}, SwitchPlayer{}, Variant::open_players_door},
    };
    for (const auto& c : cases) {
        auto host = share(c.host);
        for (std::uint64_t i = 0; i < 50; ++i) {
            Transcript t;
            RandomStream prng = RandomStream::substream(21, i, 1);
            play_game(rules(c.variant), host, c.player, RandomStream::substream(21, i, 0), prng, &t);
            const Json original = transcript_to_json(t);
            const Json reparsed = Json::parse(original.dump());
            const Json again = transcript_to_json(replay(reparsed));
            ASSERT_EQ(again.dump(), original.dump()) << host_kind(c.host) << " " << i;
            ASSERT_EQ(t.stage, Stage::finished);
            if (t.attempts.back().chi && t.attempts.back().phi) {
                ASSERT_LT(std::norm(t.attempts.back().phi->dot(*t.attempts.back().chi)), kEps);
            }
            if (t.p_prime && t.attempts.back().chi) {
                ASSERT_LT(std::norm(t.p_prime->dot(*t.attempts.back().chi)), kEps);
            }
        }
    }
}

TEST(transcripts, json_shape) {
    Transcript t;
    RandomStream prng(1);
    play_game(rules(Variant::strict), share(AxesHost{}), SwitchPlayer{kDiag}, RandomStream(8), prng, &t);
    const Json j = transcript_to_json(t);
    for (const char* key : {"rules", "host", "stream", "attempts", "p_prime", "won", "stage", "restarts"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j.at("host").at("kind"), "axes");
    EXPECT_EQ(j.at("stream").at("master"), 8u);
    EXPECT_EQ(j.at("attempts")[0].at("chi").size(), 3u);
    EXPECT_EQ(j.at("attempts")[0].at("chi")[0].size(), 2u);  // [re, im]
    EXPECT_THROW(replay(Json::parse(R"({"rules":{}})")), ConfigError);
}
