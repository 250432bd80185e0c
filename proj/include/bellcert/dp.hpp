#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "bellcert/pvalue.hpp"
#include "bellcert/step_spec.hpp"

namespace bellcert {

// A candidate step law with integer lattice steps, ready for the sweep.
struct ScaledCandidate {
    struct Entry {
        int64_t step;
        double prob;
        int64_t prob_num; // exact probability, for serialization
        int64_t prob_den;
    };
    std::vector<Entry> entries;
    int source_strategy = 0;
};

// Optimal-adversary decision table: for every sweep step and every position
// inside that step's active band, the index of the candidate distribution
// maximizing the eventual success probability. Codes are bit-packed.
class PolicyTable {
public:
    PolicyTable() = default;
    PolicyTable(int64_t L, uint64_t m, int64_t lattice_scale,
                std::vector<ScaledCandidate> candidates,
                std::vector<std::pair<int64_t, int64_t>> bands);

    int64_t cut_point() const { return L_; }
    uint64_t steps() const { return m_; }
    int64_t lattice_scale() const { return lattice_scale_; }
    const std::vector<ScaledCandidate>& candidates() const { return candidates_; }
    const std::vector<std::pair<int64_t, int64_t>>& bands() const { return bands_; }

    // Band of positions the table covers at step index (0-based, step taken next).
    std::pair<int64_t, int64_t> band(uint64_t step_index) const { return bands_[step_index]; }
    int candidate_at(uint64_t step_index, int64_t position) const;

    void set_row(uint64_t step_index, const uint8_t* codes, size_t count);

    void save(const std::string& path) const;
    static PolicyTable load(const std::string& path);

private:
    int64_t L_ = 0;
    uint64_t m_ = 0;
    int64_t lattice_scale_ = 1;
    int bits_ = 2;
    std::vector<ScaledCandidate> candidates_;
    std::vector<std::pair<int64_t, int64_t>> bands_; // inclusive [lo, hi], hi < lo = empty
    std::vector<uint64_t> offsets_;                  // per-step cell offsets, m+1 entries
    std::vector<uint64_t> words_;                    // packed codes
};

struct DpResult {
    TailProbability p;
    int64_t L = 0;   // cut point, lattice units
    uint64_t m = 0;  // step count
    std::vector<std::pair<int64_t, int64_t>> band_bounds; // active window per step
    std::shared_ptr<PolicyTable> policy; // present when requested, unless the cut
                                         // point is unreachable or certain (p is
                                         // exactly 0 or 1 with no swept cells)
};

// Exact p-value for a non-binary supermartingale walk: the supremum over all
// memory-exploiting local strategies of P(final position >= L) after m steps,
// by backward induction over (remaining steps, position). The value column
// at the final step is the indicator [position >= L]; earlier columns take,
// per position, the best candidate expectation of the next column. Positions
// at least L + r*(max down-step) are certain successes and positions below
// L - r*(max up-step) certain failures with r steps remaining, which bounds
// the swept band. Ties pick the lowest candidate index. Columns stay
// monotone in position; the sweep asserts this.
DpResult exact_pvalue_dp(int64_t L, uint64_t m, const StepCandidateSet& candidates,
                         bool want_policy = false, int threads = 1);

// Lattice-integer conversion shared by the DP and the simulator.
std::vector<ScaledCandidate> scale_candidates(const StepCandidateSet& candidates);

} // namespace bellcert
