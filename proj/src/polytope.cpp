#include "bellcert/polytope.hpp"

#include <algorithm>

#include "bellcert/errors.hpp"

namespace bellcert {

Outcome DeterministicStrategy::outcome(Setting1 s1, Setting2 s2) const {
    Result r1 = (s1 == Setting1::a) ? on_a : on_a_prime;
    Result r2 = (s2 == Setting2::b) ? on_b : on_b_prime;
    return Outcome(r1, r2, s1, s2);
}

const std::array<DeterministicStrategy, 16>& deterministic_strategies() {
    // Row order is load-bearing: indices 1..7 have non-00 mass 1,
    // 8..11 mass 3/4, 12..15 mass 1/2, 16 mass 0.
    static const std::array<DeterministicStrategy, 16> table = [] {
        constexpr Result P = Result::plus;
        constexpr Result Z = Result::zero;
        // (a, a', b, b') per row
        constexpr Result rows[16][4] = {
            {P, P, P, P}, {Z, P, P, P}, {P, Z, P, P}, {P, P, Z, P},
            {P, P, P, Z}, {Z, Z, P, P}, {P, P, Z, Z}, {Z, P, P, Z},
            {P, Z, Z, P}, {P, Z, P, Z}, {Z, P, Z, P}, {Z, Z, Z, P},
            {Z, Z, P, Z}, {Z, P, Z, Z}, {P, Z, Z, Z}, {Z, Z, Z, Z},
        };
        std::array<DeterministicStrategy, 16> t;
        for (int i = 0; i < 16; ++i)
            t[i] = DeterministicStrategy{i + 1, rows[i][0], rows[i][1], rows[i][2], rows[i][3]};
        return t;
    }();
    return table;
}

OutcomeDistribution strategy_distribution(const DeterministicStrategy& v, const Rat& p_a,
                                          const Rat& p_b) {
    if (p_a < 0 || p_a > 1 || p_b < 0 || p_b > 1)
        throw InvalidParameterError("setting probabilities must lie in [0,1]");
    const Rat setting_weight[2][2] = {
        {p_a * p_b, p_a * (1 - p_b)},
        {(1 - p_a) * p_b, (1 - p_a) * (1 - p_b)},
    };
    std::array<Rat, 16> w{};
    for (int s1 = 0; s1 < 2; ++s1) {
        for (int s2 = 0; s2 < 2; ++s2) {
            Outcome o = v.outcome(static_cast<Setting1>(s1), static_cast<Setting2>(s2));
            w[o.index()] += setting_weight[s1][s2];
        }
    }
    return OutcomeDistribution::from_weights(std::move(w), SupportMode::full16);
}

OutcomeDistribution induced_non00_distribution(const DeterministicStrategy& v, const Rat& p_a,
                                               const Rat& p_b) {
    OutcomeDistribution full = strategy_distribution(v, p_a, p_b);
    if (full.non00_mass() == 0)
        throw DataError("strategy v" + std::to_string(v.index) +
                        " does not induce a conditional distribution");
    return full.condition_non00();
}

namespace {

int idx(const char* name) { return Outcome::from_name(name)->index(); }

std::array<std::array<int, 16>, 4> make_equalities() {
    std::array<std::array<int, 16>, 4> eq{};
    // p(++ab) + p(+0ab)  =  p(++ab') + p(+0ab')
    eq[0][idx("++ab")] = 1;  eq[0][idx("+0ab")] = 1;
    eq[0][idx("++ab'")] = -1; eq[0][idx("+0ab'")] = -1;
    // p(++a'b) + p(+0a'b)  =  p(++a'b') + p(+0a'b')
    eq[1][idx("++a'b")] = 1;  eq[1][idx("+0a'b")] = 1;
    eq[1][idx("++a'b'")] = -1; eq[1][idx("+0a'b'")] = -1;
    // p(++ab) + p(0+ab)  =  p(++a'b) + p(0+a'b)
    eq[2][idx("++ab")] = 1;  eq[2][idx("0+ab")] = 1;
    eq[2][idx("++a'b")] = -1; eq[2][idx("0+a'b")] = -1;
    // p(++ab') + p(0+ab')  =  p(++a'b') + p(0+a'b')
    eq[3][idx("++ab'")] = 1;  eq[3][idx("0+ab'")] = 1;
    eq[3][idx("++a'b'")] = -1; eq[3][idx("0+a'b'")] = -1;
    return eq;
}

std::array<std::array<int, 16>, 4> make_inequalities() {
    std::array<std::array<int, 16>, 4> le{};
    // p(++ab) - p(+0ab') - p(0+a'b) - p(++a'b') <= 0
    le[0][idx("++ab")] = 1;
    le[0][idx("+0ab'")] = -1; le[0][idx("0+a'b")] = -1; le[0][idx("++a'b'")] = -1;
    // p(++ab') - p(+0ab) - p(0+a'b') - p(++a'b) <= 0
    le[1][idx("++ab'")] = 1;
    le[1][idx("+0ab")] = -1; le[1][idx("0+a'b'")] = -1; le[1][idx("++a'b")] = -1;
    // p(++a'b) - p(+0a'b') - p(0+ab) - p(++ab') <= 0
    le[2][idx("++a'b")] = 1;
    le[2][idx("+0a'b'")] = -1; le[2][idx("0+ab")] = -1; le[2][idx("++ab'")] = -1;
    // p(++a'b') - p(+0a'b) - p(0+ab') - p(++ab) <= 0
    le[3][idx("++a'b'")] = 1;
    le[3][idx("+0a'b")] = -1; le[3][idx("0+ab'")] = -1; le[3][idx("++ab")] = -1;
    return le;
}

} // namespace

std::array<std::array<int, 16>, 4> ConstraintReport::equality_coefficients() {
    return make_equalities();
}

std::array<std::array<int, 16>, 4> ConstraintReport::inequality_coefficients() {
    return make_inequalities();
}

ConstraintReport check_constraints(const OutcomeDistribution& dist, const Rat& tolerance) {
    static const auto eq = make_equalities();
    static const auto le = make_inequalities();

    ConstraintReport report;
    Rat sum = 0;
    report.nonnegativity_ok = true;
    for (int i = 0; i < 16; ++i) {
        const Rat& w = dist.weight(Outcome(i));
        if (w < 0) report.nonnegativity_ok = false;
        sum += w;
    }
    Rat sum_err = abs(Rat(sum - 1));
    report.normalization_ok = sum_err <= tolerance;

    auto dot = [&](const std::array<int, 16>& coeff) {
        Rat v = 0;
        for (int i = 0; i < 16; ++i)
            if (coeff[i] != 0) v += coeff[i] * dist.weight(Outcome(i));
        return v;
    };
    for (int k = 0; k < 4; ++k) {
        report.equality_residuals[k] = dot(eq[k]);
        report.inequality_slacks[k] = dot(le[k]);
    }

    report.is_local_boundary_consistent =
        report.normalization_ok && report.nonnegativity_ok;
    for (int k = 0; k < 4; ++k) {
        if (abs(report.equality_residuals[k]) > tolerance)
            report.is_local_boundary_consistent = false;
        if (report.inequality_slacks[k] > tolerance)
            report.is_local_boundary_consistent = false;
    }
    return report;
}

OutcomeDistribution random_local_mixture(const std::array<Rat, 15>& weights, const Rat& p_a,
                                         const Rat& p_b) {
    Rat total = 0;
    for (const Rat& d : weights) {
        if (d < 0) throw InvalidParameterError("mixture weights must be nonnegative");
        total += d;
    }
    if (total != 1) throw InvalidParameterError("mixture weights must sum to 1");

    std::array<Rat, 16> w{};
    for (int k = 0; k < 15; ++k) {
        if (weights[k] == 0) continue;
        OutcomeDistribution induced =
            induced_non00_distribution(deterministic_strategies()[k], p_a, p_b);
        for (int i = 0; i < 16; ++i) w[i] += weights[k] * induced.weight(Outcome(i));
    }
    return OutcomeDistribution::from_weights(std::move(w), SupportMode::non00_12);
}

OutcomeDistribution fine_construct(const std::array<Rat, 15>& weights) {
    Rat total = 0;
    for (const Rat& d : weights) {
        if (d < 0) throw InvalidParameterError("mixture weights must be nonnegative");
        total += d;
    }
    if (total != 1) throw InvalidParameterError("mixture weights must sum to 1");

    Rat x = 0, y = 0, z = 0;
    for (int k = 0; k < 7; ++k) x += weights[k];
    for (int k = 7; k < 11; ++k) y += weights[k];
    for (int k = 11; k < 15; ++k) z += weights[k];
    Rat denom = 3 * x + 4 * y + 6 * z;
    // weights sum to 1, so denom >= 3 > 0
    Rat s = Rat(3) / denom;
    Rat t = Rat(4) / denom;
    Rat u = Rat(6) / denom;

    const Rat half(1, 2);
    std::array<Rat, 16> w{};
    for (int k = 0; k < 15; ++k) {
        if (weights[k] == 0) continue;
        const Rat& group = k < 7 ? s : (k < 11 ? t : u);
        OutcomeDistribution full =
            strategy_distribution(deterministic_strategies()[k], half, half);
        Rat coeff = group * weights[k];
        for (int i = 0; i < 16; ++i) w[i] += coeff * full.weight(Outcome(i));
    }
    return OutcomeDistribution::from_weights(std::move(w), SupportMode::full16);
}

StepCandidateSet step_candidates(const StepSpec& spec, const Rat& p_a, const Rat& p_b) {
    if (p_a < 0 || p_a > 1 || p_b < 0 || p_b > 1)
        throw InvalidParameterError("setting probabilities must lie in [0,1]");

    StepCandidateSet set;
    set.spec_name = spec.name();
    set.lattice_scale = spec.lattice_scale();

    for (const DeterministicStrategy& v : deterministic_strategies()) {
        OutcomeDistribution full = strategy_distribution(v, p_a, p_b);
        Rat relevant_mass = 0;
        for (Outcome o : spec.relevant_set()) relevant_mass += full.weight(o);
        if (relevant_mass == 0) continue;

        std::vector<std::pair<Rat, Rat>> entries;
        for (Outcome o : spec.relevant_set()) {
            if (full.weight(o) == 0) continue;
            Rat step = *spec.step(o);
            Rat prob = full.weight(o) / relevant_mass;
            auto it = std::find_if(entries.begin(), entries.end(),
                                   [&](const auto& e) { return e.first == step; });
            if (it == entries.end()) entries.emplace_back(step, prob);
            else it->second += prob;
        }
        StepDistribution cand = StepDistribution::from_entries(std::move(entries), v.index);

        auto dup = std::find_if(set.candidates.begin(), set.candidates.end(),
                                [&](const StepDistribution& c) { return c.entries == cand.entries; });
        if (dup == set.candidates.end()) set.candidates.push_back(std::move(cand));
    }
    return set;
}

} // namespace bellcert
