#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bellcert/distribution.hpp"
#include "bellcert/dp.hpp"
#include "bellcert/step_spec.hpp"
#include "bellcert/trial.hpp"

namespace bellcert {

// Draws n independent trials from an outcome distribution; in non00_12 mode
// every draw is a detection. Identical (seed, stream) pairs give identical
// trial sequences.
TrialSequence simulate_iid(const OutcomeDistribution& source, uint64_t n_trials, uint64_t seed,
                           uint64_t stream = 0);

struct AdversaryResult {
    uint64_t runs = 0;
    uint64_t successes = 0;
    double frequency = 0.0;
    double wilson_low = 0.0; // 99% Wilson score interval
    double wilson_high = 0.0;
};

// Plays a DP policy: at every (step, position) the walk samples its next
// step from the candidate the policy picks, counting runs that finish at or
// above the cut point. Run k uses RNG stream k, so results are independent
// of run ordering and thread count.
AdversaryResult simulate_adversary(const PolicyTable& policy, uint64_t runs, uint64_t seed,
                                   int threads = 1);

struct MemorylessBest {
    double p = 0.0;
    int candidate_i = 0; // indices into the candidate set
    int candidate_j = 0; // equal to candidate_i for a pure candidate
    double mix_q = 1.0;  // weight on candidate_i
};

// Best i.i.d. (memoryless) strategy over single candidates and two-candidate
// mixtures: the mixture weight is scanned on a 1e-3 grid and refined by
// golden-section search, the walk tail evaluated by exact convolution.
MemorylessBest memoryless_best(const StepCandidateSet& candidates, int64_t L, uint64_t m);

// History-dependent source: the first rule whose trigger matches the step
// history so far supplies the next trial's outcome distribution.
struct HistoryRule {
    enum class Trigger {
        always,
        no_steps_yet,
        last_step_positive,
        last_step_negative,
        last_step_equals,
    };
    Trigger trigger = Trigger::always;
    Rat value = 0; // for last_step_equals
    OutcomeDistribution distribution;
};

struct MemorySequenceSpec {
    std::vector<HistoryRule> rules;

    // True when every listed distribution satisfies the local polytope
    // constraints (full16 rules are conditioned on non-00 first).
    bool is_local() const;
};

struct VerifyConfig {
    uint64_t n_walks = 1000;
    uint64_t depth = 10;        // steps examined per walk
    uint64_t min_count = 100;   // buckets below this are not judged
    uint64_t history_window = 8;
    double slack_sigmas = 3.0;
    uint64_t max_trials_per_walk = 1u << 20;
    uint64_t seed = 0;
};

struct VerifyViolation {
    uint64_t k = 0;                    // step index (1-based)
    std::vector<int64_t> history;      // scaled step values
    uint64_t count = 0;
    double constraint_estimate = 0.0;  // empirical sum c_j P(s_j)
    double sigma = 0.0;
};

struct VerifyReport {
    uint64_t total_trials = 0;
    uint64_t total_steps = 0;
    uint64_t buckets_checked = 0;
    std::vector<VerifyViolation> violations;
    bool ok() const { return violations.empty(); }
};

// Empirically checks the derived-walk constraint: for each early step index
// and realized recent-step history with enough samples, the conditional step
// law must satisfy sum c_j P(s_j) <= 0 up to the configured sigma slack.
VerifyReport verify_derived_supermartingale(const MemorySequenceSpec& source,
                                            const StepSpec& spec, const VerifyConfig& config);

} // namespace bellcert
