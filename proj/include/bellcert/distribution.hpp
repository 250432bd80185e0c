#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "bellcert/outcome.hpp"
#include "bellcert/rational.hpp"

namespace bellcert {

enum class SupportMode : uint8_t {
    full16,   // all 16 outcomes
    non00_12, // conditioned on a detection; the four 00 outcomes carry weight 0
};

// Probability vector over trial outcomes, exact. `exact_input` records
// whether the weights came from exact text (rationals/decimals) or from
// binary floats; constraint checks pick their tolerance from it.
class OutcomeDistribution {
public:
    OutcomeDistribution() = default;

    // Validates nonnegativity, the support mode, and that weights sum to 1.
    // With normalize=true an off-by-rounding sum is rescaled exactly instead
    // of rejected (printed tables often sum to 0.999).
    static OutcomeDistribution from_weights(std::array<Rat, 16> weights, SupportMode mode,
                                            bool normalize = false, bool exact_input = true);

    static OutcomeDistribution point_mass(Outcome o);

    SupportMode mode() const { return mode_; }
    bool exact_input() const { return exact_input_; }
    const Rat& weight(Outcome o) const { return weights_[o.index()]; }
    const std::array<Rat, 16>& weights() const { return weights_; }

    Rat mass_00() const;
    Rat non00_mass() const { return 1 - mass_00(); }

    // Conditions a full16 distribution on the non-00 outcomes.
    // Throws DataError when the non-00 mass is zero.
    OutcomeDistribution condition_non00() const;

private:
    std::array<Rat, 16> weights_{};
    SupportMode mode_ = SupportMode::full16;
    bool exact_input_ = true;
};

// Absolute tolerance on the weight sum when weights came from floats.
inline constexpr double kWeightSumTolerance = 1e-9;

} // namespace bellcert
