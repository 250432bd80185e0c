#include "bellcert/analyze.hpp"

#include <cmath>

#include "bellcert/errors.hpp"
#include "bellcert/polytope.hpp"

namespace bellcert {

std::string method_name(Method m) {
    switch (m) {
        case Method::binomial: return "binomial";
        case Method::normal: return "normal";
        case Method::mcdiarmid: return "mcdiarmid";
        case Method::exact_dp: return "exact-dp";
    }
    throw InvalidParameterError("unknown method");
}

std::optional<Method> parse_method(const std::string& name) {
    if (name == "binomial") return Method::binomial;
    if (name == "normal") return Method::normal;
    if (name == "mcdiarmid") return Method::mcdiarmid;
    if (name == "exact-dp" || name == "exact_dp") return Method::exact_dp;
    return std::nullopt;
}

AnalysisReport analyze(const ReducedWalk& walk, const StepSpec& spec,
                       const AnalyzeOptions& options) {
    if (walk.spec_name != spec.name())
        throw InvalidParameterError("walk was reduced with spec " + walk.spec_name +
                                    ", not " + spec.name());
    if (walk.m() == 0) throw DataError("walk has no steps; nothing to analyze");

    AnalysisReport report;
    report.dataset = "";
    report.spec_name = spec.name();
    report.scaled_statistic = walk.scaled_final();
    report.lattice_scale =
        spec.lattice_scale().fits_slong_p() ? spec.lattice_scale().get_si() : 0;
    report.statistic = walk.final_value();
    report.m = walk.m();
    report.method = options.method;
    report.epsilon = options.epsilon;
    report.threads = options.threads;

    double p0 = 0.5;
    if (options.epsilon != 0.0) p0 = epsilon_model(options.epsilon).adjusted_p0;
    if (options.p0) p0 = *options.p0;
    report.p0_used = p0;

    switch (options.method) {
        case Method::binomial: {
            if (!spec.is_binary_unit())
                throw IncompatibleMethodError("binomial p-value requires a binary +-1 statistic; spec " +
                                              spec.name() + " is not");
            report.p = binomial_pvalue(walk.scaled_final(), walk.m(), p0,
                                       options.lenient_parity);
            break;
        }
        case Method::normal: {
            if (!spec.is_binary_unit())
                throw IncompatibleMethodError("normal sigma requires a binary +-1 statistic; spec " +
                                              spec.name() + " is not");
            double z = normal_sigma(walk.scaled_final(), walk.m(), p0);
            report.sigma = z;
            report.p = normal_tail(z);
            break;
        }
        case Method::mcdiarmid: {
            if (!spec.is_ch_step_set())
                throw IncompatibleMethodError(
                    "the concentration bound is implemented for the {+1,-1,-2} step set only");
            int64_t L = walk.scaled_final();
            if (L <= 0)
                throw IncompatibleMethodError(
                    "bound undefined for nonpositive statistic (no violation to bound)");
            report.p = mcdiarmid_bound(static_cast<uint64_t>(L), walk.m());
            report.is_upper_bound = true;
            break;
        }
        case Method::exact_dp: {
            StepCandidateSet candidates =
                options.candidates ? *options.candidates
                                   : step_candidates(spec, options.p_a, options.p_b);
            if (candidates.lattice_scale != spec.lattice_scale())
                throw InvalidParameterError("candidate set lattice does not match the walk's");
            DpResult dp = exact_pvalue_dp(walk.scaled_final(), walk.m(), candidates, false,
                                          options.threads);
            report.p = dp.p;
            break;
        }
    }
    return report;
}

void flag_setting_deviations(AnalysisReport& report, const Rat& p_a_hat, const Rat& p_b_hat,
                             uint64_t n_trials) {
    report.p_a_hat = p_a_hat;
    report.p_b_hat = p_b_hat;
    if (n_trials == 0) return;
    double se = 0.5 / std::sqrt(double(n_trials));
    auto check = [&](const Rat& hat, const std::string& label) {
        double dev = std::abs(to_double(hat) - 0.5);
        if (dev > 3.0 * se) {
            report.warnings.push_back(
                "setting marginal " + label + " = " + std::to_string(to_double(hat)) +
                " deviates from 1/2 by more than 3 standard errors; consider --epsilon");
        }
    };
    check(p_a_hat, "p_a");
    check(p_b_hat, "p_b");
}

} // namespace bellcert
