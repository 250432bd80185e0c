#pragma once

#include <array>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "bellcert/analyze.hpp"
#include "bellcert/distribution.hpp"
#include "bellcert/simulate.hpp"
#include "bellcert/trial.hpp"

namespace bellcert {

inline constexpr const char* kEngineName = "bellcert";
inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr const char* kTrialCsvHeader = "trial,setting1,setting2,result1,result2";

// CSV trial streams: header `trial,setting1,setting2,result1,result2`, then
// one record per line with tokens a|a', b|b', +|0. Errors carry the line
// number. Indices must be strictly increasing.
TrialSequence parse_trials_csv(std::istream& in);
TrialSequence parse_trials_csv_file(const std::string& path);
void write_trials_csv(std::ostream& out, const TrialSequence& trials);

// Distribution JSON: a flat object keyed by canonical outcome names with
// rational strings ("1/3"), decimal strings, or numbers as weights. The mode
// is non00_12 unless a 00 outcome carries weight. normalize rescales a
// slightly-off total instead of rejecting it.
OutcomeDistribution parse_distribution_json(const nlohmann::json& j, bool normalize = false);
OutcomeDistribution parse_distribution_file(const std::string& path, bool normalize = false);
nlohmann::ordered_json distribution_to_json(const OutcomeDistribution& dist);

// Mixture weights over deterministic strategies 1..15: a JSON array, or an
// object {"weights": [...]}.
std::array<Rat, 15> parse_weights_json(const nlohmann::json& j);
std::array<Rat, 15> parse_weights_file(const std::string& path);

nlohmann::ordered_json report_to_json(const AnalysisReport& report,
                                      const std::string& timestamp,
                                      const std::string& command = "analyze");
nlohmann::ordered_json adversary_to_json(const AdversaryResult& result);
nlohmann::ordered_json verify_to_json(const VerifyReport& report);

std::string iso8601_utc_now();

} // namespace bellcert
