// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "cspt/error.hpp"
#include "cspt/formula.hpp"
#include "cspt/structure.hpp"
#include "oracles.hpp"

using namespace cspt;

namespace {

ConstraintSet fixture(const std::string& name) {
    return load_constraint_set(std::string(CSPT_FIXTURE_DIR) + "/" + name + ".csp");
}

ConstraintSet single(const ConstraintTemplate& c) { return ConstraintSet("s", c.domain_size(), c.arity(), {c}); }

std::vector<int> levels_of(const BadnessReport& r) {
    std::vector<int> out;
    for (const auto& l : r.levels) {
        out.push_back(l ? *l : -1);
    }
    return out;
}

/// The fixtures plus `count` random binary sets over two or three values.
std::vector<ConstraintSet> corpus(std::size_t count, std::uint64_t seed) {
    std::vector<ConstraintSet> out;
    for (const char* f : {"ksat3", "xor2", "horn_like", "clause3_single", "molloy_example1", "molloy_example2"}) {
        out.push_back(fixture(f));
    }
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const int t = 2 + static_cast<int>(rng.below(2));
        out.push_back(oracle::random_set(rng, t, 2, 1 + rng.below(2)));
    }
    return out;
}

} // namespace

// ============================================================================
// Bad values
// ============================================================================

TEST(BadValues, Examples) {
    const auto m1 = bad_values(fixture("molloy_example1"));
    EXPECT_EQ(m1.good_values(), 0b1111);
    EXPECT_TRUE(m1.trace.empty());

    const std::vector<Tuple> one_first = {{1, 0}, {1, 1}};
    const auto r = bad_values(single(ConstraintTemplate::from_allowed("c", 2, 2, one_first)));
    EXPECT_EQ(levels_of(r), (std::vector<int>{0, -1}));

    const std::vector<Tuple> zero_row = {{0, 0}, {0, 1}, {0, 2}};
    const std::vector<Tuple> two_row = {{2, 1}, {2, 2}};
    const ConstraintSet cs("s", 3, 2,
                           {ConstraintTemplate::from_forbidden("Cp", 3, 2, zero_row),
                            ConstraintTemplate::from_forbidden("C", 3, 2, two_row)});
    const auto report = bad_values(cs);
    EXPECT_EQ(levels_of(report), (std::vector<int>{0, -1, 1}));
    ASSERT_EQ(report.trace.size(), 2u);
    EXPECT_EQ(report.trace[1].value, 2);
    EXPECT_EQ(report.trace[1].template_index, 1u);
    EXPECT_EQ(report.trace[1].position, 0u);
    EXPECT_EQ(report.trace[1].forcing_position, std::optional<std::size_t>(1));
}

TEST(BadValues, AgreesWithUnfoldingOracle) {
    for (std::uint64_t mask = 1; mask < 16; ++mask) {
        std::vector<Tuple> allowed;
        for (Value r = 0; r < 4; ++r) {
            if ((mask >> r) & 1u) {
                allowed.push_back({static_cast<Value>(r / 2), static_cast<Value>(r % 2)});
            }
        }
        const auto cs = single(ConstraintTemplate::from_allowed("c", 2, 2, allowed));
        ASSERT_EQ(levels_of(bad_values(cs)), oracle::bad_levels(cs)) << mask;
    }
    Rng rng(0);
    for (int i = 0; i < 1000; ++i) {
        const int t = 2 + static_cast<int>(rng.below(2));
        const auto cs = oracle::random_set(rng, t, 2, 1 + rng.below(2));
        ASSERT_EQ(levels_of(bad_values(cs)), oracle::bad_levels(cs)) << serialize_constraint_set(cs);
    }
    Rng wide(5);
    for (int i = 0; i < 300; ++i) {
        const int t = 2 + static_cast<int>(wide.below(3));
        const int k = 2 + static_cast<int>(wide.below(2));
        const auto cs = oracle::random_set(wide, t, k, 1 + wide.below(3));
        ASSERT_EQ(levels_of(bad_values(cs)), oracle::bad_levels(cs)) << serialize_constraint_set(cs);
    }
}

TEST(BadValues, WitnessesAreValid) {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const int t = 2 + static_cast<int>(rng.below(3));
        const int k = 2 + static_cast<int>(rng.below(2));
        const auto cs = oracle::random_set(rng, t, k, 1 + rng.below(3));
        const auto r = bad_values(cs);
        int last_level = 0;
        for (const auto& w : r.trace) {
            ASSERT_EQ(r.levels[w.value], std::optional<int>(w.level));
            ASSERT_GE(w.level, last_level);  // ordered by level
            last_level = w.level;
            for (const auto& s : cs[w.template_index].satisfying_tuples()) {
                if (s[w.position] != w.value) {
                    continue;
                }
                ASSERT_NE(w.level, 0) << "level-0 value occurs in a satisfying tuple";
                ASSERT_TRUE(w.forcing_position);
                const auto forced = r.levels[s[*w.forcing_position]];
                ASSERT_TRUE(forced && *forced < w.level);
            }
        }
        std::size_t bad = 0;
        for (const auto& l : r.levels) {
            bad += l ? 1 : 0;
        }
        ASSERT_EQ(bad, r.trace.size());
    }
}

TEST(BadValues, IdempotentOnGoodSubdomain) {
    // Binary sets only: a good value always has a partner tuple inside the
    // good values, so restricting the domain creates no new bad value.
    Rng rng(12);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const int t = 2 + static_cast<int>(rng.below(3));
        const auto cs = oracle::random_set(rng, t, 2, 1 + rng.below(3));
        const ValueSet good = bad_values(cs).good_values();
        std::vector<Value> relabel(static_cast<std::size_t>(t), 255);
        int g = 0;
        for (int v = 0; v < t; ++v) {
            if ((good >> v) & 1u) {
                relabel[static_cast<std::size_t>(v)] = static_cast<Value>(g++);
            }
        }
        if (g < 2) {
            continue;
        }
        std::vector<ConstraintTemplate> restricted;
        for (const auto& c : cs.templates()) {
            std::vector<Tuple> kept;
            for (const auto& s : c.satisfying_tuples()) {
                if (relabel[s[0]] != 255 && relabel[s[1]] != 255) {
                    kept.push_back({relabel[s[0]], relabel[s[1]]});
                }
            }
            restricted.push_back(ConstraintTemplate::from_allowed(c.name(), g, 2, kept));
        }
        const auto again = bad_values(ConstraintSet("r", g, 2, restricted));
        ASSERT_EQ(again.good_values(), full_value_set(g));
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

// ============================================================================
// Behavedness
// ============================================================================

TEST(Behavedness, WellBehavedExamples) {
    EXPECT_TRUE(is_well_behaved(fixture("ksat3")).holds);
    EXPECT_TRUE(is_well_behaved(fixture("xor2")).holds);
    const auto full = is_well_behaved(single(ConstraintTemplate::from_forbidden("full", 2, 2, {})));
    EXPECT_FALSE(full.holds);
    EXPECT_EQ(full.failure, WellBehavedResult::Failure::ConstantSatisfied);
    EXPECT_EQ(full.value, std::optional<Value>(0));
    const auto horn = is_well_behaved(fixture("horn_like"));
    EXPECT_EQ(horn.failure, WellBehavedResult::Failure::NoGoodValue);
}

TEST(Behavedness, VeryWellBehavedExamples) {
    EXPECT_TRUE(is_very_well_behaved(fixture("molloy_example1")).holds);
    EXPECT_TRUE(is_very_well_behaved(fixture("ksat3")).holds);
    const auto xor2 = fixture("xor2");
    const auto v = is_very_well_behaved(xor2);
    EXPECT_FALSE(v.holds);
    ASSERT_TRUE(v.counterexample);
    EXPECT_EQ(v.counterexample->size(), 3u);
    EXPECT_FALSE(oracle::brute_solve(xor2, cycle_to_formula(xor2, *v.counterexample), 0b11));
    EXPECT_EQ(format_cycle(xor2, *v.counterexample), "neq(x1,x2) neq(x2,x3) neq(x3,x1)");
}

TEST(Behavedness, BruteCycleOracleExamples) {
    const auto xor2 = fixture("xor2");
    const auto r = cycle_oracle_brute(xor2, 3);
    EXPECT_FALSE(r.holds);
    ASSERT_TRUE(r.counterexample);
    EXPECT_EQ(r.counterexample->size(), 3u);
    EXPECT_TRUE(cycle_oracle_brute(xor2, 2).holds);
    EXPECT_TRUE(cycle_oracle_brute(fixture("molloy_example1"), 6).holds);
    EXPECT_TRUE(cycle_oracle_brute(fixture("horn_like"), 6).holds);  // no good values
    EXPECT_THROW(cycle_oracle_brute(xor2, 9), Error);
    EXPECT_THROW(cycle_oracle_brute(fixture("molloy_example1"), 8, 1000), Error);
}

TEST(Behavedness, BruteOracleMatchesDirectEnumeration) {
    Rng rng(21);
    for (int i = 0; i < 200; ++i) {
        const auto cs = oracle::random_set(rng, 2, 2, 1 + rng.below(2));
        const ValueSet good = oracle::good_values(cs);
        const bool fails = good != 0 && oracle::some_cycle_fails(cs, 4, good);
        ASSERT_EQ(cycle_oracle_brute(cs, 4).holds, !fails) << serialize_constraint_set(cs);
    }
}

TEST(Behavedness, ClosureAgreesWithBruteOracle) {
    for (const auto& cs : corpus(150, 0xc1c)) {
        const auto closure = cycles_admit_assignment(cs, bad_values(cs).good_values());
        const auto brute = cycle_oracle_brute(cs, 6);
        ASSERT_EQ(closure.holds, brute.holds) << serialize_constraint_set(cs);
        if (!closure.holds) {
            ASSERT_EQ(closure.counterexample->size(), brute.counterexample->size());
            const auto f = cycle_to_formula(cs, *closure.counterexample);
            ASSERT_FALSE(oracle::brute_solve(cs, f, bad_values(cs).good_values()));
        }
    }
}

TEST(Behavedness, ExtremeExamples) {
    const auto ksat3 = fixture("ksat3");
    const auto e = is_extremely_well_behaved(ksat3);
    ASSERT_TRUE(e.holds);
    ASSERT_TRUE(e.gamma);
    ASSERT_EQ(e.gamma->size(), 2u);
    EXPECT_EQ(ksat3[(*e.gamma)[0].second].forbidden_tuples(), (std::vector<Tuple>{{1, 1, 1}}));
    EXPECT_EQ(ksat3[(*e.gamma)[1].second].forbidden_tuples(), (std::vector<Tuple>{{0, 0, 0}}));
    EXPECT_FALSE(is_extremely_well_behaved(fixture("molloy_example1")).holds);
    EXPECT_FALSE(is_extremely_well_behaved(fixture("molloy_example2")).holds);
    EXPECT_FALSE(is_extremely_well_behaved(fixture("clause3_single")).holds);
}

TEST(Behavedness, LiftedSetMirrorsBinarySet) {
    const auto m1 = fixture("molloy_example1");
    const auto m2 = fixture("molloy_example2");
    EXPECT_EQ(levels_of(bad_values(m1)), levels_of(bad_values(m2)));
    EXPECT_EQ(is_very_well_behaved(m1).holds, is_very_well_behaved(m2).holds);
}

TEST(Behavedness, GammaSatisfiesOccursRelation) {
    Rng rng(31);
    for (int i = 0; i < 300; ++i) {
        const int t = 2 + static_cast<int>(rng.below(2));
        const int k = 2 + static_cast<int>(rng.below(2));
        const auto cs = oracle::random_set(rng, t, k, 1 + rng.below(4));
        const auto e = is_extremely_well_behaved(cs);
        if (!e.holds) {
            continue;
        }
        for (const auto& [v, c] : *e.gamma) {
            for (const auto& s : cs[c].satisfying_tuples()) {
                ASSERT_NE(std::find(s.begin(), s.end(), v), s.end());
            }
        }
    }
}

TEST(Verdict, Outlooks) {
    EXPECT_EQ(classify_csp(fixture("ksat3")).outlook, ThresholdOutlook::Sharp);
    EXPECT_EQ(classify_csp(fixture("molloy_example1")).outlook, ThresholdOutlook::Undetermined);
    EXPECT_EQ(classify_csp(fixture("xor2")).outlook, ThresholdOutlook::NotSharp);
    EXPECT_EQ(to_string(ThresholdOutlook::Undetermined), "undetermined");
}

TEST(Verdict, ImplicationChain) {
    for (const auto& cs : corpus(400, 0xc4a1)) {
        const auto v = classify_csp(cs);
        if (v.extreme.holds) {
            ASSERT_TRUE(v.very.holds);
        }
        if (v.very.holds) {
            ASSERT_TRUE(v.well.holds);
        }
        ASSERT_EQ(v.extreme.gamma.has_value(), v.extreme.holds);
    }
}

TEST(Verdict, InvariantUnderRelabelling) {
    Rng rng(41);
    for (auto cs : corpus(200, 0x1abe1)) {
        const int t = cs.domain_size();
        const auto k = static_cast<std::size_t>(cs.arity());
        std::vector<Value> perm(static_cast<std::size_t>(t));
        std::iota(perm.begin(), perm.end(), Value{0});
        for (std::size_t i = perm.size(); i > 1; --i) {
            std::swap(perm[i - 1], perm[rng.below(i)]);
        }
        std::vector<int> identity(k);
        std::iota(identity.begin(), identity.end(), 0);
        std::vector<ConstraintTemplate> ts;
        for (const auto& c : cs.templates()) {
            ts.push_back(c.permuted(identity, perm, c.name()));
        }
        std::reverse(ts.begin(), ts.end());
        const ConstraintSet other(cs.name(), t, cs.arity(), ts);
        const auto a = classify_csp(cs);
        const auto b = classify_csp(other);
        ASSERT_EQ(a.well.holds, b.well.holds);
        ASSERT_EQ(a.very.holds, b.very.holds);
        ASSERT_EQ(a.extreme.holds, b.extreme.holds);
        for (int v = 0; v < t; ++v) {
            ASSERT_EQ(a.badness.levels[static_cast<std::size_t>(v)], b.badness.levels[perm[static_cast<std::size_t>(v)]]);
        }
    }
}
