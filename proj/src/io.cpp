#include "bellcert/io.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>

#include "bellcert/errors.hpp"

namespace bellcert {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

} // namespace

TrialSequence parse_trials_csv(std::istream& in) {
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty input; expected CSV header");
    ++line_no;
    {
        auto fields = split_csv_line(line);
        auto expected = split_csv_line(kTrialCsvHeader);
        if (fields != expected)
            throw DataError("bad header '" + trim(line) + "', expected '" +
                                kTrialCsvHeader + "'",
                            line_no);
    }

    TrialSequence trials;
    uint64_t prev_index = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw DataError("expected 5 columns, got " + std::to_string(fields.size()),
                            line_no);
        TrialRecord rec;
        try {
            size_t pos = 0;
            unsigned long long idx = std::stoull(fields[0], &pos);
            if (pos != fields[0].size() || idx == 0) throw std::invalid_argument("");
            rec.index = idx;
        } catch (const std::exception&) {
            throw DataError("bad trial index '" + fields[0] + "'", line_no);
        }
        if (rec.index <= prev_index)
            throw DataError("trial index " + fields[0] + " not strictly increasing", line_no);
        prev_index = rec.index;

        auto s1 = parse_setting1(fields[1]);
        if (!s1) throw DataError("unknown setting1 token '" + fields[1] + "'", line_no);
        auto s2 = parse_setting2(fields[2]);
        if (!s2) throw DataError("unknown setting2 token '" + fields[2] + "'", line_no);
        auto r1 = parse_result(fields[3]);
        if (!r1) throw DataError("unknown result1 token '" + fields[3] + "'", line_no);
        auto r2 = parse_result(fields[4]);
        if (!r2) throw DataError("unknown result2 token '" + fields[4] + "'", line_no);
        rec.setting1 = *s1;
        rec.setting2 = *s2;
        rec.result1 = *r1;
        rec.result2 = *r2;
        trials.push_back(rec);
    }
    return trials;
}

TrialSequence parse_trials_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse_trials_csv(in);
}

void write_trials_csv(std::ostream& out, const TrialSequence& trials) {
    out << kTrialCsvHeader << "\n";
    for (const TrialRecord& t : trials) {
        out << t.index << ',' << setting1_name(t.setting1) << ',' << setting2_name(t.setting2)
            << ',' << result_name(t.result1) << ',' << result_name(t.result2) << "\n";
    }
}

namespace {

Rat weight_from_json(const nlohmann::json& v, bool& exact, const std::string& key) {
    if (v.is_string()) return parse_rational(v.get<std::string>());
    if (v.is_number_integer()) return Rat(v.get<long>());
    if (v.is_number_float()) {
        exact = false;
        return rational_from_double(v.get<double>());
    }
    throw DataError("weight for '" + key + "' must be a number or rational string");
}

} // namespace

OutcomeDistribution parse_distribution_json(const nlohmann::json& j, bool normalize) {
    if (!j.is_object()) throw DataError("distribution JSON must be an object");
    std::array<Rat, 16> weights{};
    bool exact = true;
    bool has_00 = false;
    for (const auto& [key, value] : j.items()) {
        auto o = Outcome::from_name(key);
        if (!o) throw DataError("unknown outcome name '" + key + "'");
        weights[o->index()] = weight_from_json(value, exact, key);
        if (o->is_00() && weights[o->index()] != 0) has_00 = true;
    }
    return OutcomeDistribution::from_weights(std::move(weights),
                                             has_00 ? SupportMode::full16
                                                    : SupportMode::non00_12,
                                             normalize, exact);
}

OutcomeDistribution parse_distribution_file(const std::string& path, bool normalize) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return parse_distribution_json(j, normalize);
}

nlohmann::ordered_json distribution_to_json(const OutcomeDistribution& dist) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (Outcome o : all_outcomes()) {
        if (dist.weight(o) == 0 && o.is_00()) continue;
        j[o.name()] = to_string(dist.weight(o));
    }
    return j;
}

std::array<Rat, 15> parse_weights_json(const nlohmann::json& j) {
    const nlohmann::json* arr = &j;
    if (j.is_object()) {
        if (!j.contains("weights")) throw DataError("weights object lacks a 'weights' array");
        arr = &j.at("weights");
    }
    if (!arr->is_array() || arr->size() != 15)
        throw DataError("expected an array of 15 strategy weights");
    std::array<Rat, 15> weights{};
    bool exact = true;
    for (size_t k = 0; k < 15; ++k)
        weights[k] = weight_from_json((*arr)[k], exact, "v" + std::to_string(k + 1));
    return weights;
}

std::array<Rat, 15> parse_weights_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": " + e.what());
    }
    return parse_weights_json(j);
}

std::string iso8601_utc_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

nlohmann::ordered_json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

} // namespace

nlohmann::ordered_json report_to_json(const AnalysisReport& report,
                                      const std::string& timestamp,
                                      const std::string& command) {
    nlohmann::ordered_json j;
    j["engine"] = {{"name", kEngineName}, {"version", kEngineVersion}};
    j["command"] = command;
    j["dataset"] = report.dataset;
    j["spec"] = report.spec_name;
    j["statistic"] = {
        {"value", to_double(report.statistic)},
        {"value_exact", to_string(report.statistic)},
        {"scaled_value", report.scaled_statistic},
        {"lattice_scale", report.lattice_scale},
        {"m", report.m},
    };
    j["method"] = method_name(report.method);
    j["p_value"] = report.p.p;
    j["log_p_value"] = finite_or_null(report.p.log_p);
    j["is_upper_bound"] = report.is_upper_bound;
    if (report.sigma) j["sigma"] = *report.sigma;
    else j["sigma"] = nullptr;
    j["epsilon"] = report.epsilon;
    j["p0"] = report.p0_used;
    nlohmann::ordered_json marginals;
    marginals["p_a"] = report.p_a_hat ? nlohmann::ordered_json(to_double(*report.p_a_hat))
                                      : nlohmann::ordered_json(nullptr);
    marginals["p_b"] = report.p_b_hat ? nlohmann::ordered_json(to_double(*report.p_b_hat))
                                      : nlohmann::ordered_json(nullptr);
    marginals["warnings"] = report.warnings;
    j["setting_marginals"] = marginals;
    if (report.seed) j["seed"] = *report.seed;
    else j["seed"] = nullptr;
    j["threads"] = report.threads;
    j["timestamp"] = timestamp;
    return j;
}

nlohmann::ordered_json adversary_to_json(const AdversaryResult& result) {
    nlohmann::ordered_json j;
    j["runs"] = result.runs;
    j["successes"] = result.successes;
    j["frequency"] = result.frequency;
    j["wilson99_low"] = result.wilson_low;
    j["wilson99_high"] = result.wilson_high;
    return j;
}

nlohmann::ordered_json verify_to_json(const VerifyReport& report) {
    nlohmann::ordered_json j;
    j["total_trials"] = report.total_trials;
    j["total_steps"] = report.total_steps;
    j["buckets_checked"] = report.buckets_checked;
    j["ok"] = report.ok();
    nlohmann::ordered_json violations = nlohmann::ordered_json::array();
    for (const auto& v : report.violations) {
        violations.push_back({{"k", v.k},
                              {"history", v.history},
                              {"count", v.count},
                              {"constraint_estimate", v.constraint_estimate},
                              {"sigma", v.sigma}});
    }
    j["violations"] = violations;
    return j;
}

} // namespace bellcert
