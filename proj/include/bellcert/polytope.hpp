#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bellcert/distribution.hpp"
#include "bellcert/outcome.hpp"
#include "bellcert/rational.hpp"
#include "bellcert/step_spec.hpp"

namespace bellcert {

// A fixed assignment of a result to each of the four settings: the vertex
// states generating every local outcome distribution. Indexed 1..16 in the
// canonical row order (index 1 = all +, index 16 = all 0); the Fine-style
// construction depends on that order grouping strategies by non-00 mass.
struct DeterministicStrategy {
    int index = 0; // 1-based
    Result on_a = Result::plus;
    Result on_a_prime = Result::plus;
    Result on_b = Result::plus;
    Result on_b_prime = Result::plus;

    // The outcome this instruction set produces for a given setting pair.
    Outcome outcome(Setting1 s1, Setting2 s2) const;
};

const std::array<DeterministicStrategy, 16>& deterministic_strategies();

// Full 16-outcome distribution induced when every trial carries strategy v
// and the settings are drawn independently with P(a) = p_a, P(b) = p_b.
OutcomeDistribution strategy_distribution(const DeterministicStrategy& v, const Rat& p_a,
                                          const Rat& p_b);

// The above conditioned on a detection. Throws DataError for strategies with
// zero non-00 mass (the all-0 strategy never produces a detection).
OutcomeDistribution induced_non00_distribution(const DeterministicStrategy& v, const Rat& p_a,
                                               const Rat& p_b);

// Result of testing a 12-outcome distribution against the local polytope:
// four no-signaling equality residuals (left minus right) and the four
// setting-permuted one-sided inequality values, all exact.
struct ConstraintReport {
    bool normalization_ok = false;
    bool nonnegativity_ok = false;
    std::array<Rat, 4> equality_residuals{};
    std::array<Rat, 4> inequality_slacks{};
    bool is_local_boundary_consistent = false;

    // Each constraint as a coefficient vector over the canonical 16 outcomes
    // (00 coefficients zero); used by relabeling/permutation checks.
    static std::array<std::array<int, 16>, 4> equality_coefficients();
    static std::array<std::array<int, 16>, 4> inequality_coefficients();
};

// tolerance 0 demands exact equality/nonpositivity; float-derived inputs
// conventionally use 1e-6 (printed tables carry 3 decimals).
ConstraintReport check_constraints(const OutcomeDistribution& dist, const Rat& tolerance = 0);

// Exact convex mixture sum d_k * induced(v_k) over strategies 1..15.
// Weights must be nonnegative and sum to 1.
OutcomeDistribution random_local_mixture(const std::array<Rat, 15>& weights, const Rat& p_a,
                                         const Rat& p_b);

// The i.i.d. single-trial distribution whose non-00 conditioning reproduces
// the mixture of induced distributions with the given weights (equiprobable
// settings). Conditioning the result on non-00 equals
// random_local_mixture(weights, 1/2, 1/2) exactly.
OutcomeDistribution fine_construct(const std::array<Rat, 15>& weights);

// For every deterministic strategy with positive mass on the spec's relevant
// set, the conditional step-value distribution given a relevant outcome.
// Exact duplicates are merged, keeping the lowest source strategy index.
StepCandidateSet step_candidates(const StepSpec& spec, const Rat& p_a, const Rat& p_b);

} // namespace bellcert
