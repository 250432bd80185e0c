// Python bindings for the certification core. Rationals cross the boundary
// as strings ("1/3", "0.05") to keep exactness explicit; floats are accepted
// and converted to their exact binary value.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>

#include "bellcert/analyze.hpp"
#include "bellcert/dp.hpp"
#include "bellcert/errors.hpp"
#include "bellcert/io.hpp"
#include "bellcert/polytope.hpp"
#include "bellcert/pvalue.hpp"
#include "bellcert/simulate.hpp"
#include "bellcert/walk.hpp"

namespace py = pybind11;
using namespace bellcert;

namespace {

Rat rat_from_py(const py::object& obj) {
    if (py::isinstance<py::str>(obj)) return parse_rational(obj.cast<std::string>());
    if (py::isinstance<py::int_>(obj)) return Rat(obj.cast<long>());
    if (py::isinstance<py::float_>(obj)) return rational_from_double(obj.cast<double>());
    throw InvalidParameterError("expected a rational string, int, or float");
}

OutcomeDistribution dist_from_dict(const py::dict& weights, bool normalize) {
    std::array<Rat, 16> w{};
    bool exact = true;
    bool has_00 = false;
    for (const auto& [key, value] : weights) {
        auto o = Outcome::from_name(key.cast<std::string>());
        if (!o) throw DataError("unknown outcome name '" + key.cast<std::string>() + "'");
        if (py::isinstance<py::float_>(value)) exact = false;
        w[o->index()] = rat_from_py(py::reinterpret_borrow<py::object>(value));
        if (o->is_00() && w[o->index()] != 0) has_00 = true;
    }
    return OutcomeDistribution::from_weights(
        std::move(w), has_00 ? SupportMode::full16 : SupportMode::non00_12, normalize, exact);
}

py::dict dist_to_dict(const OutcomeDistribution& dist) {
    py::dict out;
    for (Outcome o : all_outcomes()) {
        if (dist.weight(o) == 0 && o.is_00()) continue;
        out[py::str(o.name())] = to_string(dist.weight(o));
    }
    return out;
}

std::array<Rat, 15> weights_from_list(const std::vector<py::object>& weights) {
    if (weights.size() != 15)
        throw InvalidParameterError("expected 15 strategy weights");
    std::array<Rat, 15> w{};
    for (size_t k = 0; k < 15; ++k) w[k] = rat_from_py(weights[k]);
    return w;
}

TrialRecord trial_from_tuple(uint64_t index, const std::string& s1, const std::string& s2,
                             const std::string& r1, const std::string& r2) {
    auto a = parse_setting1(s1);
    auto b = parse_setting2(s2);
    auto x = parse_result(r1);
    auto y = parse_result(r2);
    if (!a || !b || !x || !y) throw DataError("bad trial tokens", index);
    return TrialRecord{index, *a, *b, *x, *y};
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Memory-robust p-values for Clauser-Horne Bell-test trial data";
    m.attr("__version__") = kEngineVersion;

    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<InvalidParameterError>(m, "InvalidParameterError", PyExc_ValueError);
    py::register_exception<IncompatibleMethodError>(m, "IncompatibleMethodError",
                                                    PyExc_ValueError);

    py::class_<TrialRecord>(m, "TrialRecord")
        .def(py::init(&trial_from_tuple), py::arg("index"), py::arg("setting1"),
             py::arg("setting2"), py::arg("result1"), py::arg("result2"))
        .def_readonly("index", &TrialRecord::index)
        .def_property_readonly("outcome",
                               [](const TrialRecord& t) { return t.outcome().name(); })
        .def("__repr__", [](const TrialRecord& t) {
            return "TrialRecord(" + std::to_string(t.index) + ", " + t.outcome().name() + ")";
        });

    py::class_<StepSpec>(m, "StepSpec")
        .def_property_readonly("name", &StepSpec::name)
        .def_property_readonly("lattice_scale",
                               [](const StepSpec& s) { return s.lattice_scale().get_si(); })
        .def_property_readonly("steps",
                               [](const StepSpec& s) {
                                   py::dict out;
                                   for (Outcome o : s.relevant_set())
                                       out[py::str(o.name())] = to_string(*s.step(o));
                                   return out;
                               })
        .def("constraint_value",
             [](const StepSpec& s, const py::dict& dist, bool normalize) {
                 return to_string(s.constraint_value(dist_from_dict(dist, normalize)));
             },
             py::arg("distribution"), py::arg("normalize") = false)
        .def("__repr__", [](const StepSpec& s) { return "StepSpec(" + s.name() + ")"; });

    m.def("builtin_spec", [](const std::string& name) {
        auto which = parse_builtin_spec(name);
        if (!which) throw InvalidParameterError("unknown spec " + name);
        return builtin_spec(*which);
    });
    m.def(
        "generalized_j_spec",
        [](const py::object& pa, const py::object& pb) {
            return generalized_j_spec(rat_from_py(pa), rat_from_py(pb));
        },
        py::arg("p_a"), py::arg("p_b"));

    py::class_<ReducedWalk>(m, "ReducedWalk")
        .def_readonly("spec_name", &ReducedWalk::spec_name)
        .def_property_readonly("m", &ReducedWalk::m)
        .def_property_readonly("lattice_scale",
                               [](const ReducedWalk& w) { return w.lattice_scale.get_si(); })
        .def_readonly("steps", &ReducedWalk::scaled_steps)
        .def_readonly("tally", &ReducedWalk::tally)
        .def_property_readonly("value", [](const ReducedWalk& w) { return w.scaled_final(); })
        .def_property_readonly("final_value",
                               [](const ReducedWalk& w) { return to_double(w.final_value()); })
        .def("__repr__", [](const ReducedWalk& w) {
            return "ReducedWalk(" + w.spec_name + ", m=" + std::to_string(w.m()) +
                   ", value=" + std::to_string(w.scaled_final()) + ")";
        });

    m.def("reduce_trials", &reduce_trials, py::arg("trials"), py::arg("spec"));

    py::class_<EmpiricalDistribution>(m, "EmpiricalDistribution")
        .def_property_readonly(
            "distribution",
            [](const EmpiricalDistribution& e) { return dist_to_dict(e.distribution); })
        .def_property_readonly("p_a",
                               [](const EmpiricalDistribution& e) { return to_double(e.p_a); })
        .def_property_readonly("p_b",
                               [](const EmpiricalDistribution& e) { return to_double(e.p_b); })
        .def_readonly("n_trials", &EmpiricalDistribution::n_trials)
        .def_readonly("n_non00", &EmpiricalDistribution::n_non00);

    m.def("empirical_distribution", &empirical_distribution, py::arg("trials"));
    m.def("parse_trials_csv", &parse_trials_csv_file, py::arg("path"));
    m.def(
        "write_trials_csv",
        [](const std::string& path, const TrialSequence& trials) {
            std::ofstream out(path);
            if (!out) throw DataError("cannot open " + path);
            write_trials_csv(out, trials);
        },
        py::arg("path"), py::arg("trials"));

    // polytope
    m.def(
        "strategy_distribution",
        [](int index, const py::object& pa, const py::object& pb) {
            if (index < 1 || index > 16) throw InvalidParameterError("strategy index in 1..16");
            return dist_to_dict(strategy_distribution(deterministic_strategies()[index - 1],
                                                      rat_from_py(pa), rat_from_py(pb)));
        },
        py::arg("index"), py::arg("p_a") = "1/2", py::arg("p_b") = "1/2");
    m.def(
        "induced_non00_distribution",
        [](int index, const py::object& pa, const py::object& pb) {
            if (index < 1 || index > 16) throw InvalidParameterError("strategy index in 1..16");
            return dist_to_dict(induced_non00_distribution(deterministic_strategies()[index - 1],
                                                           rat_from_py(pa), rat_from_py(pb)));
        },
        py::arg("index"), py::arg("p_a") = "1/2", py::arg("p_b") = "1/2");

    py::class_<ConstraintReport>(m, "ConstraintReport")
        .def_readonly("normalization_ok", &ConstraintReport::normalization_ok)
        .def_readonly("nonnegativity_ok", &ConstraintReport::nonnegativity_ok)
        .def_readonly("is_local_boundary_consistent",
                      &ConstraintReport::is_local_boundary_consistent)
        .def_property_readonly("equality_residuals",
                               [](const ConstraintReport& r) {
                                   std::vector<std::string> out;
                                   for (const auto& v : r.equality_residuals)
                                       out.push_back(to_string(v));
                                   return out;
                               })
        .def_property_readonly("inequality_slacks", [](const ConstraintReport& r) {
            std::vector<std::string> out;
            for (const auto& v : r.inequality_slacks) out.push_back(to_string(v));
            return out;
        });

    m.def(
        "check_constraints",
        [](const py::dict& dist, const py::object& tolerance, bool normalize) {
            return check_constraints(dist_from_dict(dist, normalize), rat_from_py(tolerance));
        },
        py::arg("distribution"), py::arg("tolerance") = py::int_(0),
        py::arg("normalize") = false);
    m.def(
        "random_local_mixture",
        [](const std::vector<py::object>& weights, const py::object& pa, const py::object& pb) {
            return dist_to_dict(
                random_local_mixture(weights_from_list(weights), rat_from_py(pa), rat_from_py(pb)));
        },
        py::arg("weights"), py::arg("p_a") = "1/2", py::arg("p_b") = "1/2");
    m.def(
        "fine_construct",
        [](const std::vector<py::object>& weights) {
            return dist_to_dict(fine_construct(weights_from_list(weights)));
        },
        py::arg("weights"));

    py::class_<StepDistribution>(m, "StepDistribution")
        .def_readonly("source_strategy", &StepDistribution::source_strategy)
        .def_property_readonly("constraint_value",
                               [](const StepDistribution& d) {
                                   return to_string(d.constraint_value);
                               })
        .def_property_readonly("steps", [](const StepDistribution& d) {
            py::dict out;
            for (const auto& [step, prob] : d.entries)
                out[py::str(to_string(step))] = to_string(prob);
            return out;
        });

    py::class_<StepCandidateSet>(m, "StepCandidateSet")
        .def_readonly("spec_name", &StepCandidateSet::spec_name)
        .def_property_readonly("lattice_scale",
                               [](const StepCandidateSet& s) {
                                   return s.lattice_scale.get_si();
                               })
        .def_readonly("candidates", &StepCandidateSet::candidates);

    m.def(
        "step_candidates",
        [](const StepSpec& spec, const py::object& pa, const py::object& pb) {
            return step_candidates(spec, rat_from_py(pa), rat_from_py(pb));
        },
        py::arg("spec"), py::arg("p_a") = "1/2", py::arg("p_b") = "1/2");

    // p-values and bounds
    py::class_<TailProbability>(m, "TailProbability")
        .def_readonly("p", &TailProbability::p)
        .def_readonly("log_p", &TailProbability::log_p)
        .def("__float__", [](const TailProbability& t) { return t.p; })
        .def("__repr__", [](const TailProbability& t) {
            return "TailProbability(p=" + std::to_string(t.p) + ")";
        });

    m.def("binomial_pvalue", &binomial_pvalue, py::arg("j_obs"), py::arg("m"),
          py::arg("p0") = 0.5, py::arg("lenient") = false);
    m.def("normal_sigma", &normal_sigma, py::arg("j_obs"), py::arg("m"), py::arg("p0") = 0.5);
    m.def("normal_tail", &normal_tail, py::arg("z"));
    m.def("mcdiarmid_bound", &mcdiarmid_bound, py::arg("L"), py::arg("m"));

    py::class_<EpsilonModel>(m, "EpsilonModel")
        .def_readonly("epsilon", &EpsilonModel::epsilon)
        .def_readonly("mean_bound", &EpsilonModel::mean_bound)
        .def_readonly("adjusted_p0", &EpsilonModel::adjusted_p0);
    m.def("epsilon_model", &epsilon_model, py::arg("epsilon"));
    m.def(
        "suggest_epsilon",
        [](const py::object& pa, const py::object& pb, const py::object& granularity) {
            return to_string(
                suggest_epsilon(rat_from_py(pa), rat_from_py(pb), rat_from_py(granularity)));
        },
        py::arg("p_a_hat"), py::arg("p_b_hat"), py::arg("granularity") = "1/1000");

    // the exact sweep and the adversary
    py::class_<PolicyTable, std::shared_ptr<PolicyTable>>(m, "PolicyTable")
        .def_property_readonly("L", &PolicyTable::cut_point)
        .def_property_readonly("m", &PolicyTable::steps)
        .def("candidate_at", &PolicyTable::candidate_at, py::arg("step_index"),
             py::arg("position"))
        .def("band", &PolicyTable::band, py::arg("step_index"))
        .def("save", &PolicyTable::save, py::arg("path"))
        .def_static("load", &PolicyTable::load, py::arg("path"));

    py::class_<DpResult>(m, "DpResult")
        .def_property_readonly("p", [](const DpResult& r) { return r.p.p; })
        .def_property_readonly("log_p", [](const DpResult& r) { return r.p.log_p; })
        .def_readonly("L", &DpResult::L)
        .def_readonly("m", &DpResult::m)
        .def_readonly("band_bounds", &DpResult::band_bounds)
        .def_readonly("policy", &DpResult::policy)
        .def("__repr__", [](const DpResult& r) {
            return "DpResult(p=" + std::to_string(r.p.p) + ", L=" + std::to_string(r.L) +
                   ", m=" + std::to_string(r.m) + ")";
        });

    m.def("exact_pvalue_dp", &exact_pvalue_dp, py::arg("L"), py::arg("m"),
          py::arg("candidates"), py::arg("want_policy") = false, py::arg("threads") = 1,
          py::call_guard<py::gil_scoped_release>());

    // simulation
    m.def(
        "simulate_iid",
        [](const py::dict& dist, uint64_t n, uint64_t seed, uint64_t stream, bool normalize) {
            return simulate_iid(dist_from_dict(dist, normalize), n, seed, stream);
        },
        py::arg("distribution"), py::arg("n_trials"), py::arg("seed"), py::arg("stream") = 0,
        py::arg("normalize") = false);

    py::class_<AdversaryResult>(m, "AdversaryResult")
        .def_readonly("runs", &AdversaryResult::runs)
        .def_readonly("successes", &AdversaryResult::successes)
        .def_readonly("frequency", &AdversaryResult::frequency)
        .def_readonly("wilson_low", &AdversaryResult::wilson_low)
        .def_readonly("wilson_high", &AdversaryResult::wilson_high);
    m.def("simulate_adversary", &simulate_adversary, py::arg("policy"), py::arg("runs"),
          py::arg("seed"), py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());

    py::class_<MemorylessBest>(m, "MemorylessBest")
        .def_readonly("p", &MemorylessBest::p)
        .def_readonly("candidate_i", &MemorylessBest::candidate_i)
        .def_readonly("candidate_j", &MemorylessBest::candidate_j)
        .def_readonly("mix_q", &MemorylessBest::mix_q);
    m.def("memoryless_best", &memoryless_best, py::arg("candidates"), py::arg("L"),
          py::arg("m"), py::call_guard<py::gil_scoped_release>());

    // history-dependent source verification
    py::class_<VerifyViolation>(m, "VerifyViolation")
        .def_readonly("k", &VerifyViolation::k)
        .def_readonly("history", &VerifyViolation::history)
        .def_readonly("count", &VerifyViolation::count)
        .def_readonly("constraint_estimate", &VerifyViolation::constraint_estimate)
        .def_readonly("sigma", &VerifyViolation::sigma);
    py::class_<VerifyReport>(m, "VerifyReport")
        .def_readonly("total_trials", &VerifyReport::total_trials)
        .def_readonly("total_steps", &VerifyReport::total_steps)
        .def_readonly("buckets_checked", &VerifyReport::buckets_checked)
        .def_readonly("violations", &VerifyReport::violations)
        .def_property_readonly("ok", &VerifyReport::ok);

    m.def(
        "verify_derived_supermartingale",
        [](const std::vector<py::tuple>& rules, const StepSpec& spec, uint64_t n_walks,
           uint64_t depth, uint64_t min_count, uint64_t history_window, double slack_sigmas,
           uint64_t seed) {
            MemorySequenceSpec source;
            for (const auto& rule : rules) {
                if (rule.size() != 2 && rule.size() != 3)
                    throw InvalidParameterError(
                        "each rule is (trigger, distribution[, value])");
                std::string trigger = rule[0].cast<std::string>();
                HistoryRule r;
                if (trigger == "always") r.trigger = HistoryRule::Trigger::always;
                else if (trigger == "no_steps_yet") r.trigger = HistoryRule::Trigger::no_steps_yet;
                else if (trigger == "last_step_positive")
                    r.trigger = HistoryRule::Trigger::last_step_positive;
                else if (trigger == "last_step_negative")
                    r.trigger = HistoryRule::Trigger::last_step_negative;
                else if (trigger == "last_step_equals")
                    r.trigger = HistoryRule::Trigger::last_step_equals;
                else throw InvalidParameterError("unknown trigger " + trigger);
                r.distribution = dist_from_dict(rule[1].cast<py::dict>(), false);
                if (rule.size() == 3) r.value = rat_from_py(rule[2]);
                source.rules.push_back(std::move(r));
            }
            VerifyConfig config;
            config.n_walks = n_walks;
            config.depth = depth;
            config.min_count = min_count;
            config.history_window = history_window;
            config.slack_sigmas = slack_sigmas;
            config.seed = seed;
            return verify_derived_supermartingale(source, spec, config);
        },
        py::arg("rules"), py::arg("spec"), py::arg("n_walks") = 1000, py::arg("depth") = 10,
        py::arg("min_count") = 100, py::arg("history_window") = 8,
        py::arg("slack_sigmas") = 3.0, py::arg("seed") = 0);

    // bundled analysis
    m.def(
        "analyze",
        [](const ReducedWalk& walk, const StepSpec& spec, const std::string& method,
           double epsilon, const py::object& p0, bool lenient, int threads) {
            AnalyzeOptions options;
            auto parsed = parse_method(method);
            if (!parsed) throw InvalidParameterError("unknown method " + method);
            options.method = *parsed;
            options.epsilon = epsilon;
            if (!p0.is_none()) options.p0 = p0.cast<double>();
            options.lenient_parity = lenient;
            options.threads = threads;
            auto report = analyze(walk, spec, options);
            auto j = report_to_json(report, iso8601_utc_now());
            return py::module_::import("json").attr("loads")(j.dump());
        },
        py::arg("walk"), py::arg("spec"), py::arg("method") = "binomial",
        py::arg("epsilon") = 0.0, py::arg("p0") = py::none(), py::arg("lenient") = false,
        py::arg("threads") = 1);
}
