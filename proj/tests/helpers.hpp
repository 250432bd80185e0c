#pragma once

// Shared fixtures and independent oracles for the test suites. Everything
// here must stay independent of the implementation paths it checks: the
// binomial oracle sums exact rationals, the walk oracle evaluates the
// adaptive game tree directly, and published tables are transcribed by hand.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bellcert/dp.hpp"
#include "bellcert/outcome.hpp"
#include "bellcert/polytope.hpp"
#include "bellcert/rational.hpp"
#include "bellcert/rng.hpp"
#include "bellcert/step_spec.hpp"
#include "bellcert/trial.hpp"

namespace bellcert::testing {

inline Outcome outcome(const char* name) { return *Outcome::from_name(name); }

// The 11-trial example stream (settings and results transcribed row by row).
inline TrialSequence example_trials() {
    auto t = [](uint64_t i, const char* o) {
        Outcome oc = outcome(o);
        return TrialRecord{i, oc.setting1(), oc.setting2(), oc.result1(), oc.result2()};
    };
    return {
        t(1, "00ab"),  t(2, "00ab'"),  t(3, "0+a'b"), t(4, "00ab"),
        t(5, "00a'b"), t(6, "++a'b'"), t(7, "00a'b"), t(8, "0+ab'"),
        t(9, "00ab'"), t(10, "++ab"),  t(11, "00a'b'"),
    };
}

// Published 12-outcome empirical tables from the two high-efficiency photon
// experiments (three printed decimals, rescaled exactly to total mass one).
inline OutcomeDistribution empirical_table_a() {
    std::array<Rat, 16> w{};
    auto set = [&](const char* name, long permille) {
        w[outcome(name).index()] = Rat(permille, 1000);
        w[outcome(name).index()].canonicalize();
    };
    set("++ab", 50);  set("+0ab", 21);  set("0+ab", 29);
    set("++ab'", 54); set("+0ab'", 17); set("0+ab'", 157);
    set("++a'b", 56); set("+0a'b", 165); set("0+a'b", 23);
    set("++a'b'", 3); set("+0a'b'", 217); set("0+a'b'", 207);
    return OutcomeDistribution::from_weights(std::move(w), SupportMode::non00_12,
                                             /*normalize=*/true);
}

inline OutcomeDistribution empirical_table_b() {
    std::array<Rat, 16> w{};
    auto set = [&](const char* name, long permille) {
        w[outcome(name).index()] = Rat(permille, 1000);
        w[outcome(name).index()].canonicalize();
    };
    set("++ab", 44);  set("+0ab", 26);  set("0+ab", 26);
    set("++ab'", 49); set("+0ab'", 20); set("0+ab'", 162);
    set("++a'b", 51); set("+0a'b", 172); set("0+a'b", 19);
    set("++a'b'", 3); set("+0a'b'", 219); set("0+a'b'", 209);
    return OutcomeDistribution::from_weights(std::move(w), SupportMode::non00_12,
                                             /*normalize=*/true);
}

// Exact binomial upper tail P(X >= k), X ~ Binomial(m, p0), by direct
// rational summation.
inline Rat binomial_tail_exact(uint64_t k, uint64_t m, const Rat& p0) {
    Rat q0 = 1 - p0;
    // pmf(j) = C(m, j) p0^j q0^(m-j), built iteratively from j = k
    mpz_class binom;
    mpz_bin_uiui(binom.get_mpz_t(), static_cast<unsigned long>(m),
                 static_cast<unsigned long>(k));
    Rat term = Rat(binom);
    for (uint64_t j = 0; j < k; ++j) term *= p0;
    for (uint64_t j = k; j < m; ++j) term *= q0;
    Rat sum = 0;
    for (uint64_t j = k; j <= m; ++j) {
        sum += term;
        if (j < m) {
            Rat ratio(static_cast<long>(m - j), static_cast<long>(j + 1));
            ratio.canonicalize();
            term *= ratio;
            term *= p0 / q0;
        }
    }
    return sum;
}

// The walk tail k for an observed (J, m) pair under the ceil convention.
inline uint64_t up_steps_needed(int64_t j_obs, uint64_t m) {
    return static_cast<uint64_t>((static_cast<int64_t>(m) + j_obs + 1) / 2);
}

// Exhaustive adaptive-strategy game tree in exact rationals: the supremum
// over history-dependent candidate choices of P(final >= L). Independent of
// the banded double sweep it cross-checks.
class GameTreeOracle {
public:
    GameTreeOracle(const StepCandidateSet& set, int64_t L) : L_(L) {
        for (const StepDistribution& cand : set.candidates) {
            std::vector<std::pair<int64_t, Rat>> entries;
            for (const auto& [step, prob] : cand.entries) {
                Rat scaled = step * Rat(set.lattice_scale);
                entries.emplace_back(scaled.get_num().get_si(), prob);
            }
            candidates_.push_back(std::move(entries));
        }
    }

    Rat value(uint64_t remaining, int64_t position) {
        if (remaining == 0) return position >= L_ ? 1 : 0;
        auto key = std::make_pair(remaining, position);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        Rat best = -1;
        for (const auto& cand : candidates_) {
            Rat acc = 0;
            for (const auto& [step, prob] : cand)
                acc += prob * value(remaining - 1, position + step);
            if (acc > best) best = acc;
        }
        memo_.emplace(key, best);
        return best;
    }

private:
    int64_t L_;
    std::vector<std::vector<std::pair<int64_t, Rat>>> candidates_;
    std::map<std::pair<uint64_t, int64_t>, Rat> memo_;
};

// Random convex weight vector over 15 strategies with small denominators.
inline std::array<Rat, 15> random_weights(PhiloxRng& rng) {
    std::array<long, 15> raw{};
    long total = 0;
    while (total == 0) {
        for (auto& v : raw) {
            v = static_cast<long>(rng.next_u32() % 1000);
            total += v;
        }
    }
    std::array<Rat, 15> w{};
    for (int k = 0; k < 15; ++k) {
        w[k] = Rat(raw[k], total);
        w[k].canonicalize();
    }
    return w;
}

// Outcome permutation induced by relabeling the settings (a <-> a' and/or
// b <-> b'); used to check the inequality family closes under relabeling.
inline Outcome relabel(Outcome o, bool swap_a, bool swap_b) {
    Setting1 s1 = o.setting1();
    Setting2 s2 = o.setting2();
    if (swap_a) s1 = s1 == Setting1::a ? Setting1::a_prime : Setting1::a;
    if (swap_b) s2 = s2 == Setting2::b ? Setting2::b_prime : Setting2::b;
    return Outcome(o.result1(), o.result2(), s1, s2);
}

} // namespace bellcert::testing
