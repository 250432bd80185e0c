#include "bellcert/walk.hpp"

#include "bellcert/errors.hpp"

namespace bellcert {

int64_t ReducedWalk::scaled_final() const {
    int64_t sum = 0;
    for (int64_t s : scaled_steps) sum += s;
    return sum;
}

ReducedWalk reduce_trials(const TrialSequence& trials, const StepSpec& spec) {
    ReducedWalk walk;
    walk.spec_name = spec.name();
    walk.lattice_scale = spec.lattice_scale();
    uint64_t prev_index = 0;
    for (const TrialRecord& t : trials) {
        if (t.index <= prev_index)
            throw DataError("trial index not strictly increasing", t.index);
        prev_index = t.index;
        Outcome o = t.outcome();
        if (!spec.is_relevant(o)) continue;
        int64_t s = spec.scaled_step(o);
        walk.scaled_steps.push_back(s);
        ++walk.tally[s];
    }
    return walk;
}

EmpiricalDistribution empirical_distribution(const TrialSequence& trials) {
    std::array<uint64_t, 16> counts{};
    uint64_t n_a = 0, n_b = 0, n_non00 = 0;
    for (const TrialRecord& t : trials) {
        ++counts[t.outcome().index()];
        if (t.setting1 == Setting1::a) ++n_a;
        if (t.setting2 == Setting2::b) ++n_b;
        if (!t.outcome().is_00()) ++n_non00;
    }
    if (n_non00 == 0) throw DataError("no non-00 trials; empirical distribution is empty");

    std::array<Rat, 16> weights{};
    for (int i = 0; i < 16; ++i) {
        if (Outcome(i).is_00()) continue;
        weights[i] = Rat(static_cast<long>(counts[i]), static_cast<long>(n_non00));
        weights[i].canonicalize();
    }
    EmpiricalDistribution out{
        OutcomeDistribution::from_weights(std::move(weights), SupportMode::non00_12),
        Rat(static_cast<long>(n_a), static_cast<long>(trials.size())),
        Rat(static_cast<long>(n_b), static_cast<long>(trials.size())),
        trials.size(), n_non00};
    out.p_a.canonicalize();
    out.p_b.canonicalize();
    return out;
}

} // namespace bellcert
