#include "bellcert/distribution.hpp"

#include <cmath>
#include <cstdlib>

#include "bellcert/errors.hpp"

namespace bellcert {

OutcomeDistribution OutcomeDistribution::from_weights(std::array<Rat, 16> weights,
                                                      SupportMode mode, bool normalize,
                                                      bool exact_input) {
    Rat sum = 0;
    for (int i = 0; i < 16; ++i) {
        if (weights[i] < 0)
            throw DataError("negative weight on outcome " + Outcome(i).name());
        if (mode == SupportMode::non00_12 && Outcome(i).is_00() && weights[i] != 0)
            throw DataError("non-zero weight on 00 outcome " + Outcome(i).name() +
                            " in non00_12 mode");
        sum += weights[i];
    }
    if (sum == 0) throw DataError("distribution has zero total weight");
    if (sum != 1) {
        double err = std::abs(to_double(sum) - 1.0);
        if (!normalize && (exact_input || err > kWeightSumTolerance))
            throw DataError("weights sum to " + to_string(sum) + ", expected 1");
        for (auto& w : weights) w /= sum;
    }
    OutcomeDistribution d;
    d.weights_ = std::move(weights);
    d.mode_ = mode;
    d.exact_input_ = exact_input;
    return d;
}

OutcomeDistribution OutcomeDistribution::point_mass(Outcome o) {
    std::array<Rat, 16> w{};
    w[o.index()] = 1;
    return from_weights(std::move(w), o.is_00() ? SupportMode::full16 : SupportMode::non00_12);
}

Rat OutcomeDistribution::mass_00() const {
    Rat m = 0;
    for (int i = 0; i < 16; ++i)
        if (Outcome(i).is_00()) m += weights_[i];
    return m;
}

OutcomeDistribution OutcomeDistribution::condition_non00() const {
    Rat mass = non00_mass();
    if (mass == 0) throw DataError("distribution has no support outside the 00 outcomes");
    std::array<Rat, 16> w{};
    for (int i = 0; i < 16; ++i)
        if (!Outcome(i).is_00()) w[i] = weights_[i] / mass;
    return from_weights(std::move(w), SupportMode::non00_12, false, exact_input_);
}

} // namespace bellcert
