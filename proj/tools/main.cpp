// bellcert CLI: memory-robust certification of CH Bell-test data.

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "bellcert/analyze.hpp"
#include "bellcert/dp.hpp"
#include "bellcert/errors.hpp"
#include "bellcert/io.hpp"
#include "bellcert/polytope.hpp"
#include "bellcert/simulate.hpp"
#include "bellcert/walk.hpp"

using namespace bellcert;

namespace {

struct CommonOptions {
    std::string format = "json";
    int threads = 0; // 0 = all available parallelism
};

void emit(const nlohmann::ordered_json& j, const std::string& format) {
    if (format == "json") {
        std::cout << j.dump(2) << "\n";
        return;
    }
    // text: flat two-column summary
    std::function<void(const nlohmann::ordered_json&, const std::string&)> walk =
        [&](const nlohmann::ordered_json& node, const std::string& prefix) {
            if (node.is_object()) {
                for (const auto& [k, v] : node.items())
                    walk(v, prefix.empty() ? k : prefix + "." + k);
            } else if (node.is_array()) {
                int i = 0;
                for (const auto& v : node) walk(v, prefix + "[" + std::to_string(i++) + "]");
            } else {
                std::cout << prefix << ": " << (node.is_string() ? node.get<std::string>()
                                                                 : node.dump())
                          << "\n";
            }
        };
    walk(j, "");
}

StepSpec spec_by_name(const std::string& name) {
    auto builtin = parse_builtin_spec(name);
    if (!builtin)
        throw InvalidParameterError("unknown spec '" + name + "' (expected J, J_E2, J_E3, Ch)");
    return builtin_spec(*builtin);
}

Method method_by_name(const std::string& name) {
    auto m = parse_method(name);
    if (!m)
        throw InvalidParameterError(
            "unknown method '" + name + "' (expected binomial, normal, mcdiarmid, exact-dp)");
    return *m;
}

nlohmann::ordered_json candidates_to_json(const StepCandidateSet& set) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& cand : set.candidates) {
        nlohmann::ordered_json c;
        c["source_strategy"] = cand.source_strategy;
        c["constraint_value"] = to_string(cand.constraint_value);
        nlohmann::ordered_json entries = nlohmann::ordered_json::object();
        for (const auto& [step, prob] : cand.entries)
            entries[to_string(step)] = to_string(prob);
        c["steps"] = entries;
        arr.push_back(c);
    }
    return arr;
}

int run(int argc, char** argv) {
    CLI::App app{"Memory-robust p-values for Clauser-Horne Bell-test data"};
    app.require_subcommand(1);
    // global options (--format, --threads) remain usable after the subcommand
    app.fallthrough();
    app.set_version_flag("--version", std::string(kEngineName) + " " + kEngineVersion);

    CommonOptions common;
    app.add_option("--format", common.format, "Output format")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    app.add_option("--threads", common.threads,
                   "Worker threads (0 = all available parallelism)");

    // ---- analyze ----------------------------------------------------------
    auto* analyze_cmd = app.add_subcommand("analyze", "Analyze a CSV trial stream");
    std::string analyze_file, analyze_spec = "J", analyze_method = "binomial";
    double analyze_epsilon = 0.0;
    std::optional<double> analyze_p0;
    bool lenient = false;
    analyze_cmd->add_option("trials", analyze_file, "Trial CSV file")->required();
    analyze_cmd->add_option("--spec", analyze_spec, "Statistic")->capture_default_str();
    analyze_cmd->add_option("--method", analyze_method, "P-value method")
        ->capture_default_str();
    analyze_cmd->add_option("--epsilon", analyze_epsilon,
                            "Setting-bias allowance (widens the binomial null)");
    analyze_cmd->add_option("--p0", analyze_p0, "Explicit null up-step probability");
    analyze_cmd->add_flag("--lenient-parity", lenient,
                          "Round mismatched (J, m) parity up instead of rejecting");

    // ---- pvalue ------------------------------------------------------------
    auto* pvalue_cmd = app.add_subcommand("pvalue", "P-value from a (L, m) pair");
    std::string pv_spec = "Ch", pv_method = "exact-dp";
    int64_t pv_L = 0;
    uint64_t pv_m = 0;
    double pv_epsilon = 0.0;
    std::optional<double> pv_p0;
    bool pv_lenient = false;
    std::string pv_pa = "1/2", pv_pb = "1/2";
    pvalue_cmd->add_option("--L", pv_L, "Observed statistic (lattice units)")->required();
    pvalue_cmd->add_option("--m", pv_m, "Number of walk steps")->required();
    pvalue_cmd->add_option("--spec", pv_spec, "Statistic")->capture_default_str();
    pvalue_cmd->add_option("--method", pv_method, "P-value method")->capture_default_str();
    pvalue_cmd->add_option("--epsilon", pv_epsilon, "Setting-bias allowance");
    pvalue_cmd->add_option("--p0", pv_p0, "Explicit null up-step probability");
    pvalue_cmd->add_option("--pa", pv_pa, "P(setting a) for candidate laws");
    pvalue_cmd->add_option("--pb", pv_pb, "P(setting b) for candidate laws");
    pvalue_cmd->add_flag("--lenient-parity", pv_lenient, "Round mismatched parity up");

    // ---- bound -------------------------------------------------------------
    auto* bound_cmd = app.add_subcommand("bound", "Supermartingale concentration bound");
    uint64_t bd_L = 0, bd_m = 0;
    bound_cmd->add_option("--L", bd_L, "Cut point")->required();
    bound_cmd->add_option("--m", bd_m, "Number of walk steps")->required();

    // ---- simulate ----------------------------------------------------------
    auto* sim_cmd = app.add_subcommand("simulate", "Synthetic experiments");
    std::string sim_dist, sim_policy, sim_out;
    uint64_t sim_n = 0, sim_seed = 0, sim_runs = 1;
    bool sim_normalize = false;
    sim_cmd->add_option("--dist", sim_dist, "Outcome-distribution JSON file");
    sim_cmd->add_option("--policy", sim_policy, "Adversary policy file");
    sim_cmd->add_option("--n", sim_n, "Trials per run (distribution source)");
    sim_cmd->add_option("--seed", sim_seed, "RNG seed")->required();
    sim_cmd->add_option("--runs", sim_runs, "Independent runs")->capture_default_str();
    sim_cmd->add_option("--out", sim_out, "Write run 0 as a trial CSV to this path");
    sim_cmd->add_flag("--normalize", sim_normalize, "Rescale a distribution that sums off 1");

    // ---- polytope ----------------------------------------------------------
    auto* poly_cmd = app.add_subcommand("polytope", "Local-model polytope tools");
    std::string poly_check, poly_fine;
    bool poly_strategies = false, poly_normalize = false;
    poly_cmd->add_option("--check", poly_check, "Distribution JSON to test");
    poly_cmd->add_flag("--strategies", poly_strategies, "List the deterministic strategies");
    poly_cmd->add_option("--fine", poly_fine, "Strategy-weights JSON for the i.i.d. construction");
    poly_cmd->add_flag("--normalize", poly_normalize, "Rescale a distribution that sums off 1");

    // ---- policy ------------------------------------------------------------
    auto* policy_cmd = app.add_subcommand("policy", "Compute and export an optimal adversary");
    int64_t pol_L = 0;
    uint64_t pol_m = 0;
    std::string pol_spec = "Ch", pol_out, pol_pa = "1/2", pol_pb = "1/2";
    policy_cmd->add_option("--L", pol_L, "Cut point (lattice units)")->required();
    policy_cmd->add_option("--m", pol_m, "Number of walk steps")->required();
    policy_cmd->add_option("--spec", pol_spec, "Statistic")->capture_default_str();
    policy_cmd->add_option("--pa", pol_pa, "P(setting a)");
    policy_cmd->add_option("--pb", pol_pb, "P(setting b)");
    policy_cmd->add_option("--out", pol_out, "Policy file to write")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    if (*analyze_cmd) {
        auto trials = parse_trials_csv_file(analyze_file);
        auto spec = spec_by_name(analyze_spec);
        auto walk = reduce_trials(trials, spec);
        AnalyzeOptions options;
        options.method = method_by_name(analyze_method);
        options.epsilon = analyze_epsilon;
        options.p0 = analyze_p0;
        options.lenient_parity = lenient;
        options.threads = common.threads;
        auto report = analyze(walk, spec, options);
        report.dataset = analyze_file;
        auto emp = empirical_distribution(trials);
        flag_setting_deviations(report, emp.p_a, emp.p_b, trials.size());
        if (!report.warnings.empty() && analyze_epsilon == 0.0) {
            Rat suggestion = suggest_epsilon(emp.p_a, emp.p_b);
            report.warnings.push_back("suggested epsilon from the observed marginals: " +
                                      std::to_string(to_double(suggestion)));
        }
        emit(report_to_json(report, iso8601_utc_now()), common.format);
        return 0;
    }

    if (*pvalue_cmd) {
        auto spec = spec_by_name(pv_spec);
        AnalysisReport report;
        report.dataset = "(direct entry)";
        report.spec_name = spec.name();
        report.scaled_statistic = pv_L;
        report.lattice_scale = spec.lattice_scale().get_si();
        report.statistic = Rat(pv_L) / Rat(spec.lattice_scale());
        report.m = pv_m;
        report.method = method_by_name(pv_method);
        report.epsilon = pv_epsilon;
        report.threads = common.threads;
        double p0 = 0.5;
        if (pv_epsilon != 0.0) p0 = epsilon_model(pv_epsilon).adjusted_p0;
        if (pv_p0) p0 = *pv_p0;
        report.p0_used = p0;
        switch (report.method) {
            case Method::binomial:
                report.p = binomial_pvalue(pv_L, pv_m, p0, pv_lenient);
                break;
            case Method::normal: {
                double z = normal_sigma(pv_L, pv_m, p0);
                report.sigma = z;
                report.p = normal_tail(z);
                break;
            }
            case Method::mcdiarmid:
                if (pv_L <= 0) throw InvalidParameterError("bound needs a positive L");
                report.p = mcdiarmid_bound(static_cast<uint64_t>(pv_L), pv_m);
                report.is_upper_bound = true;
                break;
            case Method::exact_dp: {
                auto cands =
                    step_candidates(spec, parse_rational(pv_pa), parse_rational(pv_pb));
                report.p = exact_pvalue_dp(pv_L, pv_m, cands, false, common.threads).p;
                break;
            }
        }
        emit(report_to_json(report, iso8601_utc_now(), "pvalue"), common.format);
        return 0;
    }

    if (*bound_cmd) {
        AnalysisReport report;
        report.dataset = "(direct entry)";
        report.spec_name = "Ch";
        report.scaled_statistic = static_cast<int64_t>(bd_L);
        report.lattice_scale = 1;
        report.statistic = Rat(static_cast<long>(bd_L));
        report.m = bd_m;
        report.method = Method::mcdiarmid;
        report.p = mcdiarmid_bound(bd_L, bd_m);
        report.is_upper_bound = true;
        report.threads = common.threads;
        emit(report_to_json(report, iso8601_utc_now(), "bound"), common.format);
        return 0;
    }

    if (*sim_cmd) {
        if (sim_dist.empty() == sim_policy.empty())
            throw InvalidParameterError("simulate needs exactly one of --dist or --policy");
        nlohmann::ordered_json j;
        j["engine"] = {{"name", kEngineName}, {"version", kEngineVersion}};
        j["command"] = "simulate";
        j["seed"] = sim_seed;
        if (!sim_policy.empty()) {
            auto policy = PolicyTable::load(sim_policy);
            auto result = simulate_adversary(policy, sim_runs, sim_seed, common.threads);
            j["source"] = {{"type", "policy"}, {"path", sim_policy}};
            j["L"] = policy.cut_point();
            j["m"] = policy.steps();
            j["result"] = adversary_to_json(result);
        } else {
            if (sim_n == 0) throw InvalidParameterError("--n must be positive");
            auto dist = parse_distribution_file(sim_dist, sim_normalize);
            j["source"] = {{"type", "distribution"}, {"path", sim_dist}};
            j["n"] = sim_n;
            nlohmann::ordered_json runs = nlohmann::ordered_json::array();
            for (uint64_t run = 0; run < sim_runs; ++run) {
                auto trials = simulate_iid(dist, sim_n, sim_seed, run);
                if (run == 0 && !sim_out.empty()) {
                    std::ofstream out(sim_out);
                    if (!out) throw DataError("cannot open " + sim_out + " for writing");
                    write_trials_csv(out, trials);
                }
                nlohmann::ordered_json per_spec;
                for (auto which :
                     {BuiltinSpec::J, BuiltinSpec::J_E2, BuiltinSpec::J_E3, BuiltinSpec::Ch}) {
                    auto walk = reduce_trials(trials, builtin_spec(which));
                    per_spec[builtin_spec_name(which)] = {
                        {"m", walk.m()}, {"value", walk.scaled_final()}};
                }
                runs.push_back({{"run", run}, {"statistics", per_spec}});
            }
            j["runs"] = runs;
            if (!sim_out.empty()) j["out"] = sim_out;
        }
        j["timestamp"] = iso8601_utc_now();
        emit(j, common.format);
        return 0;
    }

    if (*poly_cmd) {
        int modes = (!poly_check.empty() ? 1 : 0) + (!poly_fine.empty() ? 1 : 0) +
                    (poly_strategies ? 1 : 0);
        if (modes != 1)
            throw InvalidParameterError(
                "polytope needs exactly one of --check, --strategies, --fine");
        nlohmann::ordered_json j;
        j["engine"] = {{"name", kEngineName}, {"version", kEngineVersion}};
        j["command"] = "polytope";
        Rat half(1, 2);
        if (poly_strategies) {
            j["mode"] = "strategies";
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& v : deterministic_strategies()) {
                nlohmann::ordered_json s;
                s["index"] = v.index;
                s["assignment"] = {{"a", result_name(v.on_a)},
                                   {"a'", result_name(v.on_a_prime)},
                                   {"b", result_name(v.on_b)},
                                   {"b'", result_name(v.on_b_prime)}};
                auto full = strategy_distribution(v, half, half);
                s["distribution"] = distribution_to_json(full);
                if (full.non00_mass() != 0)
                    s["conditioned"] = distribution_to_json(full.condition_non00());
                else
                    s["conditioned"] = nullptr;
                arr.push_back(s);
            }
            j["strategies"] = arr;
        } else if (!poly_check.empty()) {
            j["mode"] = "check";
            auto dist = parse_distribution_file(poly_check, poly_normalize);
            if (dist.mode() == SupportMode::full16) dist = dist.condition_non00();
            Rat tolerance = dist.exact_input() ? Rat(0) : Rat(1, 1000000);
            auto report = check_constraints(dist, tolerance);
            j["dataset"] = poly_check;
            j["normalization_ok"] = report.normalization_ok;
            j["nonnegativity_ok"] = report.nonnegativity_ok;
            nlohmann::ordered_json eq = nlohmann::ordered_json::array();
            for (const auto& r : report.equality_residuals) eq.push_back(to_string(r));
            nlohmann::ordered_json le = nlohmann::ordered_json::array();
            for (const auto& s : report.inequality_slacks) le.push_back(to_string(s));
            j["equality_residuals"] = eq;
            j["inequality_slacks"] = le;
            j["is_local_boundary_consistent"] = report.is_local_boundary_consistent;
            nlohmann::ordered_json cv;
            for (auto which :
                 {BuiltinSpec::J, BuiltinSpec::J_E2, BuiltinSpec::J_E3, BuiltinSpec::Ch}) {
                auto spec = builtin_spec(which);
                cv[spec.name()] = to_string(spec.constraint_value(dist));
            }
            j["constraint_values"] = cv;
        } else {
            j["mode"] = "fine";
            auto weights = parse_weights_file(poly_fine);
            auto full = fine_construct(weights);
            j["dataset"] = poly_fine;
            j["distribution"] = distribution_to_json(full);
            j["mass_00"] = to_string(full.mass_00());
            auto conditioned = full.condition_non00();
            auto target = random_local_mixture(weights, half, half);
            bool matches = true;
            for (Outcome o : all_outcomes())
                matches = matches && conditioned.weight(o) == target.weight(o);
            j["conditioned"] = distribution_to_json(conditioned);
            j["reproduces_mixture"] = matches;
        }
        j["timestamp"] = iso8601_utc_now();
        emit(j, common.format);
        return 0;
    }

    if (*policy_cmd) {
        auto spec = spec_by_name(pol_spec);
        auto cands = step_candidates(spec, parse_rational(pol_pa), parse_rational(pol_pb));
        auto dp = exact_pvalue_dp(pol_L, pol_m, cands, true, common.threads);
        if (!dp.policy)
            throw InvalidParameterError(
                "walk is degenerate at this cut point (p is exactly 0 or 1); no policy");
        dp.policy->save(pol_out);
        nlohmann::ordered_json j;
        j["engine"] = {{"name", kEngineName}, {"version", kEngineVersion}};
        j["command"] = "policy";
        j["spec"] = spec.name();
        j["L"] = pol_L;
        j["m"] = pol_m;
        j["p_value"] = dp.p.p;
        j["log_p_value"] = dp.p.log_p;
        j["candidates"] = candidates_to_json(cands);
        j["out"] = pol_out;
        j["timestamp"] = iso8601_utc_now();
        emit(j, common.format);
        return 0;
    }

    return 1;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidParameterError& e) {
        std::cerr << "invalid parameters: " << e.what() << "\n";
        return 3;
    } catch (const IncompatibleMethodError& e) {
        std::cerr << "incompatible method: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
