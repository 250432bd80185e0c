#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bellcert/dp.hpp"
#include "bellcert/pvalue.hpp"
#include "bellcert/step_spec.hpp"
#include "bellcert/walk.hpp"

namespace bellcert {

enum class Method : uint8_t { binomial, normal, mcdiarmid, exact_dp };

std::string method_name(Method m);
std::optional<Method> parse_method(const std::string& name);

struct AnalyzeOptions {
    Method method = Method::binomial;
    double epsilon = 0.0;              // widens p0 for binomial via the epsilon model
    std::optional<double> p0;          // explicit null up-step probability
    bool lenient_parity = false;
    std::optional<StepCandidateSet> candidates; // for exact_dp; defaults to the
                                                // spec's own candidates at (p_a, p_b)
    Rat p_a = Rat(1, 2);
    Rat p_b = Rat(1, 2);
    int threads = 1;
};

struct AnalysisReport {
    std::string dataset;
    std::string spec_name;
    Rat statistic = 0;       // walk final value, spec units
    int64_t scaled_statistic = 0;
    int64_t lattice_scale = 1;
    uint64_t m = 0;
    Method method = Method::binomial;
    TailProbability p;
    bool is_upper_bound = false; // true for concentration bounds
    std::optional<double> sigma; // normal method only
    double epsilon = 0.0;
    double p0_used = 0.5;
    std::optional<Rat> p_a_hat;  // setting marginals when known
    std::optional<Rat> p_b_hat;
    std::vector<std::string> warnings;
    std::optional<uint64_t> seed;
    int threads = 1;
};

// Dispatches a reduced walk to the requested p-value machinery and bundles
// the result. The spec must be the one that produced the walk; binomial and
// normal demand a binary +-1 statistic and mcdiarmid the {+1,-1,-2} step set.
AnalysisReport analyze(const ReducedWalk& walk, const StepSpec& spec,
                       const AnalyzeOptions& options);

// Flags setting marginals further than three binomial standard errors from
// one half; appends to report.warnings.
void flag_setting_deviations(AnalysisReport& report, const Rat& p_a_hat, const Rat& p_b_hat,
                             uint64_t n_trials);

} // namespace bellcert
