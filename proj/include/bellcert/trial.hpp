#pragma once

#include <cstdint>
#include <vector>

#include "bellcert/outcome.hpp"

namespace bellcert {

// One discrete experimental trial: a setting pair and a result pair,
// carrying its 1-based position in the dataset.
struct TrialRecord {
    uint64_t index = 0;
    Setting1 setting1 = Setting1::a;
    Setting2 setting2 = Setting2::b;
    Result result1 = Result::zero;
    Result result2 = Result::zero;

    Outcome outcome() const { return Outcome(result1, result2, setting1, setting2); }

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

using TrialSequence = std::vector<TrialRecord>;

} // namespace bellcert
