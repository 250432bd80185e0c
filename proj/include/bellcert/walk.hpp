#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bellcert/distribution.hpp"
#include "bellcert/rational.hpp"
#include "bellcert/step_spec.hpp"
#include "bellcert/trial.hpp"

namespace bellcert {

// A trial stream reduced to the subsequence of spec-relevant steps, in trial
// order. Steps are stored scaled by the spec's lattice scale so they are
// exact integers; final_value() is the unscaled rational sum.
struct ReducedWalk {
    std::string spec_name;
    mpz_class lattice_scale = 1;
    std::vector<int64_t> scaled_steps;
    std::map<int64_t, uint64_t> tally; // scaled step value -> count

    uint64_t m() const { return scaled_steps.size(); }
    int64_t scaled_final() const;
    Rat final_value() const { return Rat(scaled_final()) / Rat(lattice_scale); }
};

// Keeps exactly the trials whose outcome lies in the spec's relevant set;
// 00 trials and other unmapped outcomes are skipped. Trial indices must be
// strictly increasing.
ReducedWalk reduce_trials(const TrialSequence& trials, const StepSpec& spec);

struct EmpiricalDistribution {
    OutcomeDistribution distribution; // non00_12, relative frequencies
    Rat p_a;                          // fraction of trials measured with setting a
    Rat p_b;                          // fraction of trials measured with setting b
    uint64_t n_trials = 0;
    uint64_t n_non00 = 0;
};

// Relative-frequency distribution of the non-00 outcomes plus the raw
// setting marginals over all trials. Throws DataError when every trial is 00.
EmpiricalDistribution empirical_distribution(const TrialSequence& trials);

} // namespace bellcert
