#include <doctest.h>

#include <cmath>

#include "bellcert/errors.hpp"
#include "bellcert/simulate.hpp"
#include "bellcert/step_spec.hpp"
#include "bellcert/walk.hpp"
#include "helpers.hpp"

using namespace bellcert;
using namespace bellcert::testing;

TEST_CASE("outcome canonical order and names") {
    CHECK(Outcome(0).name() == "++ab");
    CHECK(Outcome(1).name() == "+0ab");
    CHECK(Outcome(2).name() == "0+ab");
    CHECK(Outcome(3).name() == "00ab");
    CHECK(Outcome(4).name() == "++ab'");
    CHECK(Outcome(15).name() == "00a'b'");
    for (int i = 0; i < 16; ++i) {
        Outcome o(i);
        CHECK(Outcome::from_name(o.name()) == o);
        CHECK(Outcome(o.result1(), o.result2(), o.setting1(), o.setting2()) == o);
    }
    CHECK(!Outcome::from_name("+-ab"));
    CHECK(outcome("0+a'b").setting1() == Setting1::a_prime);
    CHECK(outcome("0+a'b").result1() == Result::zero);
}

TEST_CASE("builtin spec mappings are exact") {
    auto j = builtin_spec(BuiltinSpec::J);
    CHECK(*j.step(outcome("++ab")) == 1);
    CHECK(*j.step(outcome("++a'b'")) == -1);
    CHECK(*j.step(outcome("+0ab'")) == -1);
    CHECK(*j.step(outcome("0+a'b")) == -1);
    CHECK(!j.step(outcome("00ab")));
    CHECK(j.lattice_scale() == 1);
    CHECK(j.is_binary_unit());
    CHECK(!j.is_ch_step_set());

    auto e2 = builtin_spec(BuiltinSpec::J_E2);
    CHECK(*e2.step(outcome("++ab'")) == 1);
    CHECK(*e2.step(outcome("+0ab")) == -1);
    CHECK(*e2.step(outcome("0+a'b")) == -1);
    CHECK(*e2.step(outcome("++a'b'")) == -1);

    auto e3 = builtin_spec(BuiltinSpec::J_E3);
    CHECK(*e3.step(outcome("++a'b")) == 1);
    CHECK(*e3.step(outcome("0+ab")) == -1);
    CHECK(*e3.step(outcome("+0ab'")) == -1);
    CHECK(*e3.step(outcome("++a'b'")) == -1);

    auto ch = builtin_spec(BuiltinSpec::Ch);
    CHECK(*ch.step(outcome("++ab'")) == 1);
    CHECK(*ch.step(outcome("++a'b")) == 1);
    CHECK(*ch.step(outcome("++a'b'")) == -2);
    CHECK(*ch.step(outcome("0+ab")) == -1);
    CHECK(*ch.step(outcome("+0ab")) == -1);
    CHECK(*ch.step(outcome("+0ab'")) == -1);
    CHECK(*ch.step(outcome("0+a'b")) == -1);
    CHECK(!ch.step(outcome("++ab")));
    CHECK(ch.relevant_set().size() == 7);
    CHECK(ch.is_ch_step_set());
    CHECK(!ch.is_binary_unit());
}

TEST_CASE("every outcome is mapped by at most one side and 00 never") {
    for (auto which : {BuiltinSpec::J, BuiltinSpec::J_E2, BuiltinSpec::J_E3, BuiltinSpec::Ch}) {
        auto spec = builtin_spec(which);
        auto plus = spec.plus_set();
        auto minus = spec.minus_set();
        for (Outcome o : all_outcomes()) {
            int hits = (plus.count(o) ? 1 : 0) + (minus.count(o) ? 1 : 0);
            CHECK(hits == (spec.is_relevant(o) ? 1 : 0));
            if (o.is_00()) CHECK(!spec.is_relevant(o));
        }
    }
}

TEST_CASE("generalized step mapping") {
    SUBCASE("equiprobable settings collapse to 4x the tally spec") {
        auto spec = generalized_j_spec(Rat(1, 2), Rat(1, 2));
        CHECK(*spec.step(outcome("++ab")) == 4);
        CHECK(*spec.step(outcome("+0ab'")) == -4);
        CHECK(*spec.step(outcome("0+a'b")) == -4);
        CHECK(*spec.step(outcome("++a'b'")) == -4);
        CHECK(spec.lattice_scale() == 1);
    }
    SUBCASE("p_a=1/2, p_b=1/3 lands on the integer lattice") {
        auto spec = generalized_j_spec(Rat(1, 2), Rat(1, 3));
        CHECK(*spec.step(outcome("++ab")) == 6);
        CHECK(*spec.step(outcome("+0ab'")) == -3);
        CHECK(*spec.step(outcome("0+a'b")) == -6);
        CHECK(*spec.step(outcome("++a'b'")) == -3);
        CHECK(spec.lattice_scale() == 1);
    }
    SUBCASE("fractional steps get a common lattice scale") {
        auto spec = generalized_j_spec(Rat(1, 3), Rat(1, 3));
        // steps: +9, -9/2, -9/2, -9/4
        CHECK(spec.lattice_scale() == 4);
        CHECK(spec.scaled_step(outcome("++ab")) == 36);
        CHECK(spec.scaled_step(outcome("++a'b'")) == -9);
    }
    SUBCASE("boundary probabilities rejected") {
        CHECK_THROWS_AS(generalized_j_spec(Rat(1, 2), Rat(0)), InvalidParameterError);
        CHECK_THROWS_AS(generalized_j_spec(Rat(1), Rat(1, 2)), InvalidParameterError);
    }
}

TEST_CASE("reduction of the example stream") {
    auto trials = example_trials();
    auto walk = reduce_trials(trials, builtin_spec(BuiltinSpec::J));
    CHECK(walk.m() == 3);
    CHECK(walk.scaled_steps == std::vector<int64_t>{-1, -1, 1});
    CHECK(walk.final_value() == -1);
    CHECK(walk.tally.at(-1) == 2);
    CHECK(walk.tally.at(1) == 1);

    SUBCASE("empty stream reduces to an empty walk") {
        auto empty = reduce_trials({}, builtin_spec(BuiltinSpec::J));
        CHECK(empty.m() == 0);
        CHECK(empty.final_value() == 0);
    }
    SUBCASE("all-00 stream reduces to an empty walk") {
        TrialSequence zeros;
        for (uint64_t i = 1; i <= 5; ++i)
            zeros.push_back({i, Setting1::a, Setting2::b, Result::zero, Result::zero});
        CHECK(reduce_trials(zeros, builtin_spec(BuiltinSpec::J)).m() == 0);
    }
    SUBCASE("non-monotone index is a data error with the offending index") {
        auto bad = trials;
        bad[5].index = bad[4].index;
        try {
            reduce_trials(bad, builtin_spec(BuiltinSpec::J));
            FAIL("expected DataError");
        } catch (const DataError& e) {
            CHECK(e.index == bad[5].index);
        }
    }
}

TEST_CASE("reduction properties") {
    auto spec = builtin_spec(BuiltinSpec::Ch);
    PhiloxRng rng(2024);
    TrialSequence trials;
    for (uint64_t i = 1; i <= 400; ++i) {
        Outcome o(static_cast<int>(rng.next_u32() % 16));
        trials.push_back({i, o.setting1(), o.setting2(), o.result1(), o.result2()});
    }

    SUBCASE("order preservation") {
        auto walk = reduce_trials(trials, spec);
        size_t k = 0;
        for (const auto& t : trials) {
            if (!spec.is_relevant(t.outcome())) continue;
            CHECK(walk.scaled_steps[k] == spec.scaled_step(t.outcome()));
            ++k;
        }
        CHECK(k == walk.m());
    }
    SUBCASE("concatenation") {
        TrialSequence left(trials.begin(), trials.begin() + 153);
        TrialSequence right(trials.begin() + 153, trials.end());
        auto whole = reduce_trials(trials, spec);
        auto a = reduce_trials(left, spec);
        auto b = reduce_trials(right, spec);
        std::vector<int64_t> joined = a.scaled_steps;
        joined.insert(joined.end(), b.scaled_steps.begin(), b.scaled_steps.end());
        CHECK(whole.scaled_steps == joined);
    }
    SUBCASE("tally identity for the binary spec") {
        auto j = builtin_spec(BuiltinSpec::J);
        auto walk = reduce_trials(trials, j);
        int64_t expect = 0;
        for (const auto& t : trials) {
            auto name = t.outcome().name();
            if (name == "++ab") ++expect;
            if (name == "+0ab'" || name == "0+a'b" || name == "++a'b'") --expect;
        }
        CHECK(walk.scaled_final() == expect);
    }
}

TEST_CASE("empirical distribution") {
    SUBCASE("single detection trial") {
        TrialSequence one{{1, Setting1::a, Setting2::b, Result::plus, Result::plus}};
        auto emp = empirical_distribution(one);
        CHECK(emp.distribution.weight(outcome("++ab")) == 1);
        CHECK(emp.p_a == 1);
        CHECK(emp.p_b == 1);
    }
    SUBCASE("setting-1 always on the primed side") {
        TrialSequence trials;
        for (uint64_t i = 1; i <= 10; ++i)
            trials.push_back({i, Setting1::a_prime, Setting2::b, Result::plus, Result::zero});
        auto emp = empirical_distribution(trials);
        CHECK(emp.p_a == 0);
        CHECK(emp.distribution.weight(outcome("+0a'b")) == 1);
    }
    SUBCASE("all-00 stream is an error") {
        TrialSequence zeros{{1, Setting1::a, Setting2::b, Result::zero, Result::zero}};
        CHECK_THROWS_AS(empirical_distribution(zeros), DataError);
    }
    SUBCASE("sampling from a known distribution reproduces it") {
        auto source = empirical_table_a();
        auto trials = simulate_iid(source, 40000, 7);
        auto emp = empirical_distribution(trials);
        for (Outcome o : all_outcomes()) {
            double diff =
                std::abs(to_double(emp.distribution.weight(o)) - to_double(source.weight(o)));
            CHECK(diff < 0.01); // ~12 sigma at n=40000, deterministic seed
        }
    }
}

TEST_CASE("distribution validation") {
    std::array<Rat, 16> w{};
    w[outcome("++ab").index()] = Rat(1, 2);
    w[outcome("00ab").index()] = Rat(1, 2);
    CHECK_THROWS_AS(
        OutcomeDistribution::from_weights(w, SupportMode::non00_12),
        DataError);
    auto full = OutcomeDistribution::from_weights(w, SupportMode::full16);
    CHECK(full.mass_00() == Rat(1, 2));
    auto cond = full.condition_non00();
    CHECK(cond.weight(outcome("++ab")) == 1);

    std::array<Rat, 16> bad{};
    bad[0] = Rat(1, 2);
    CHECK_THROWS_AS(OutcomeDistribution::from_weights(bad, SupportMode::non00_12), DataError);
    auto rescued = OutcomeDistribution::from_weights(bad, SupportMode::non00_12, true);
    CHECK(rescued.weight(Outcome(0)) == 1);
}
