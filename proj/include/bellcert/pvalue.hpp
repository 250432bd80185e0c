#pragma once

#include <cstdint>

#include "bellcert/rational.hpp"

namespace bellcert {

// A tail probability carried in both linear and natural-log form so values
// below double underflow stay meaningful.
struct TailProbability {
    double p = 1.0;
    double log_p = 0.0;
};

// One-sided binomial tail P(X >= ceil((m + j_obs)/2)) for X ~ Binomial(m, p0),
// summed exactly in log-anchored form (no normal approximation). A +-1 walk
// of m steps ending at j_obs has matching parity; mismatched pairs are
// rejected unless lenient is set (published tables print such pairs).
TailProbability binomial_pvalue(int64_t j_obs, uint64_t m, double p0 = 0.5,
                                bool lenient = false);

// Number of standard deviations separating j_obs from the drift of a
// Binomial(m, p0) walk (asymptotic normal estimate of the binomial).
double normal_sigma(int64_t j_obs, uint64_t m, double p0 = 0.5);

// Upper-tail probability of the standard normal, with asymptotic expansion
// once erfc underflows.
TailProbability normal_tail(double z);

// Azuma-Hoeffding-style supermartingale bound on P(walk >= L) after m steps
// of the {+1, -1, -2} step set. Requires 0 < L/m < 1.
TailProbability mcdiarmid_bound(uint64_t L, uint64_t m);

// Setting-probability wiggle room: with both setting marginals within
// epsilon of 1/2, the walk's conditional up-step probability is bounded by
// adjusted_p0 instead of 1/2.
struct EpsilonModel {
    double epsilon = 0.0;
    double mean_bound = 0.0;  // 4e / (1 + 4e^2)
    double adjusted_p0 = 0.5; // 1/2 + 2e / (1 + 4e^2)
};

EpsilonModel epsilon_model(double epsilon);

// Smallest epsilon consistent with observed setting marginals, rounded up to
// the given granularity.
Rat suggest_epsilon(const Rat& p_a_hat, const Rat& p_b_hat,
                    const Rat& granularity = Rat(1, 1000));

} // namespace bellcert
