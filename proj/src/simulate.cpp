#include "bellcert/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "bellcert/errors.hpp"
#include "bellcert/polytope.hpp"
#include "bellcert/rng.hpp"

namespace bellcert {

namespace {

// cumulative double thresholds for outcome sampling
struct OutcomeSampler {
    std::vector<double> cumulative;
    std::vector<Outcome> outcomes;

    explicit OutcomeSampler(const OutcomeDistribution& dist) {
        double acc = 0.0;
        for (int i = 0; i < 16; ++i) {
            Outcome o{i};
            if (dist.weight(o) == 0) continue;
            acc += to_double(dist.weight(o));
            cumulative.push_back(acc);
            outcomes.push_back(o);
        }
        cumulative.back() = 1.0;
    }

    Outcome draw(PhiloxRng& rng) const {
        double u = rng.uniform();
        size_t k = std::lower_bound(cumulative.begin(), cumulative.end(), u) -
                   cumulative.begin();
        if (k >= outcomes.size()) k = outcomes.size() - 1;
        return outcomes[k];
    }
};

} // namespace

TrialSequence simulate_iid(const OutcomeDistribution& source, uint64_t n_trials, uint64_t seed,
                           uint64_t stream) {
    OutcomeSampler sampler(source);
    PhiloxRng rng(seed, stream);
    TrialSequence trials;
    trials.reserve(n_trials);
    for (uint64_t i = 0; i < n_trials; ++i) {
        Outcome o = sampler.draw(rng);
        trials.push_back(
            TrialRecord{i + 1, o.setting1(), o.setting2(), o.result1(), o.result2()});
    }
    return trials;
}

namespace {

struct CandidateSampler {
    std::vector<double> cumulative;
    std::vector<int64_t> steps;

    explicit CandidateSampler(const ScaledCandidate& cand) {
        double acc = 0.0;
        for (const auto& e : cand.entries) {
            acc += e.prob;
            cumulative.push_back(acc);
            steps.push_back(e.step);
        }
        cumulative.back() = 1.0;
    }

    int64_t draw(PhiloxRng& rng) const {
        double u = rng.uniform();
        size_t k = std::lower_bound(cumulative.begin(), cumulative.end(), u) -
                   cumulative.begin();
        if (k >= steps.size()) k = steps.size() - 1;
        return steps[k];
    }
};

} // namespace

AdversaryResult simulate_adversary(const PolicyTable& policy, uint64_t runs, uint64_t seed,
                                   int threads) {
    if (runs == 0) throw InvalidParameterError("runs must be positive");
    if (policy.steps() == 0 || policy.candidates().empty())
        throw InvalidParameterError("policy table is empty");

    std::vector<CandidateSampler> samplers;
    samplers.reserve(policy.candidates().size());
    int64_t s_max = std::numeric_limits<int64_t>::min();
    int64_t s_min = std::numeric_limits<int64_t>::max();
    for (const auto& c : policy.candidates()) {
        samplers.emplace_back(c);
        for (const auto& e : c.entries) {
            s_max = std::max(s_max, e.step);
            s_min = std::min(s_min, e.step);
        }
    }
    const int64_t u = s_max, d = -s_min;
    const int64_t L = policy.cut_point();
    const uint64_t m = policy.steps();

    auto play_run = [&](uint64_t run) -> bool {
        PhiloxRng rng(seed, run);
        int64_t x = 0;
        for (uint64_t i = 0; i < m; ++i) {
            int64_t r = static_cast<int64_t>(m - i);
            if (x >= L + r * d) return true;  // cannot fall below the cut any more
            if (x < L - r * u) return false;  // cannot reach the cut any more
            int cand = policy.candidate_at(i, x);
            x += samplers[static_cast<size_t>(cand)].draw(rng);
        }
        return x >= L;
    };

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;

    uint64_t successes = 0;
    if (threads == 1 || runs < 256) {
        for (uint64_t run = 0; run < runs; ++run)
            if (play_run(run)) ++successes;
    } else {
        std::vector<uint64_t> partial(static_cast<size_t>(threads), 0);
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                uint64_t local = 0;
                for (uint64_t run = static_cast<uint64_t>(t); run < runs;
                     run += static_cast<uint64_t>(threads))
                    if (play_run(run)) ++local;
                partial[static_cast<size_t>(t)] = local;
            });
        }
        for (auto& th : pool) th.join();
        for (uint64_t c : partial) successes += c;
    }

    AdversaryResult res;
    res.runs = runs;
    res.successes = successes;
    res.frequency = double(successes) / double(runs);

    const double z = 2.5758293035489004; // 99% two-sided normal quantile
    double n = double(runs);
    double phat = res.frequency;
    double denom = 1.0 + z * z / n;
    double center = (phat + z * z / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
    res.wilson_low = std::max(0.0, center - half);
    res.wilson_high = std::min(1.0, center + half);
    return res;
}

namespace {

StepCandidateSet single_candidate_set(const StepCandidateSet& base, StepDistribution cand) {
    StepCandidateSet s;
    s.spec_name = base.spec_name;
    s.lattice_scale = base.lattice_scale;
    s.candidates.push_back(std::move(cand));
    return s;
}

double iid_tail(const StepCandidateSet& base, const StepDistribution& cand, int64_t L,
                uint64_t m) {
    return exact_pvalue_dp(L, m, single_candidate_set(base, cand), false, 1).p.p;
}

// golden-section points snapped to a fine exact grid so mixture weights
// keep small denominators
Rat snap_unit(double x) {
    long long ticks = std::llround(std::clamp(x, 0.0, 1.0) * 1e9);
    Rat q(static_cast<long>(ticks), 1000000000L);
    q.canonicalize();
    return q;
}

StepDistribution mix(const StepDistribution& a, const StepDistribution& b, const Rat& q) {
    std::vector<std::pair<Rat, Rat>> entries;
    auto add = [&](const Rat& step, const Rat& prob) {
        if (prob == 0) return;
        for (auto& e : entries) {
            if (e.first == step) {
                e.second += prob;
                return;
            }
        }
        entries.emplace_back(step, prob);
    };
    for (const auto& [step, prob] : a.entries) add(step, q * prob);
    for (const auto& [step, prob] : b.entries) add(step, (1 - q) * prob);
    return StepDistribution::from_entries(std::move(entries));
}

} // namespace

MemorylessBest memoryless_best(const StepCandidateSet& set, int64_t L, uint64_t m) {
    if (set.candidates.empty()) throw InvalidParameterError("candidate set is empty");
    MemorylessBest best;
    best.p = -1.0;

    const int n = static_cast<int>(set.candidates.size());
    for (int i = 0; i < n; ++i) {
        double p = iid_tail(set, set.candidates[static_cast<size_t>(i)], L, m);
        if (p > best.p) best = {p, i, i, 1.0};
    }

    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const auto& a = set.candidates[static_cast<size_t>(i)];
            const auto& b = set.candidates[static_cast<size_t>(j)];
            auto eval = [&](const Rat& q) { return iid_tail(set, mix(a, b, q), L, m); };

            // 1e-3 grid (endpoints are the pure candidates, already done)
            Rat best_q = 0;
            double best_pq = -1.0;
            for (int k = 1; k < 1000; ++k) {
                Rat q(k, 1000);
                q.canonicalize();
                double p = eval(q);
                if (p > best_pq) {
                    best_pq = p;
                    best_q = q;
                }
            }
            // golden-section refinement around the best grid point
            double lo = std::max(0.0, to_double(best_q) - 1e-3);
            double hi = std::min(1.0, to_double(best_q) + 1e-3);
            const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
            double f1 = eval(snap_unit(x1)), f2 = eval(snap_unit(x2));
            for (int it = 0; it < 40; ++it) {
                if (f1 < f2) {
                    lo = x1; x1 = x2; f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = eval(snap_unit(x2));
                } else {
                    hi = x2; x2 = x1; f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = eval(snap_unit(x1));
                }
            }
            double q_star = 0.5 * (lo + hi);
            double p_star = eval(snap_unit(q_star));
            if (p_star < best_pq) {
                p_star = best_pq;
                q_star = to_double(best_q);
            }
            if (p_star > best.p) best = {p_star, i, j, q_star};
        }
    }
    return best;
}

bool MemorySequenceSpec::is_local() const {
    for (const HistoryRule& rule : rules) {
        OutcomeDistribution d = rule.distribution;
        if (d.mode() == SupportMode::full16) {
            if (d.non00_mass() == 0) continue; // never produces a step
            d = d.condition_non00();
        }
        ConstraintReport report = check_constraints(d);
        if (!report.is_local_boundary_consistent) return false;
    }
    return true;
}

VerifyReport verify_derived_supermartingale(const MemorySequenceSpec& source,
                                            const StepSpec& spec, const VerifyConfig& config) {
    if (source.rules.empty()) throw InvalidParameterError("history source has no rules");

    std::vector<OutcomeSampler> samplers;
    samplers.reserve(source.rules.size());
    for (const HistoryRule& r : source.rules) samplers.emplace_back(r.distribution);

    auto pick_rule = [&](const std::vector<int64_t>& steps) -> size_t {
        for (size_t k = 0; k < source.rules.size(); ++k) {
            const HistoryRule& r = source.rules[k];
            switch (r.trigger) {
                case HistoryRule::Trigger::always:
                    return k;
                case HistoryRule::Trigger::no_steps_yet:
                    if (steps.empty()) return k;
                    break;
                case HistoryRule::Trigger::last_step_positive:
                    if (!steps.empty() && steps.back() > 0) return k;
                    break;
                case HistoryRule::Trigger::last_step_negative:
                    if (!steps.empty() && steps.back() < 0) return k;
                    break;
                case HistoryRule::Trigger::last_step_equals: {
                    Rat scaled = r.value * Rat(spec.lattice_scale());
                    if (!steps.empty() && scaled.get_den() == 1 &&
                        Rat(steps.back()) == scaled)
                        return k;
                    break;
                }
            }
        }
        throw InvalidParameterError("no history rule matched; add an `always` fallback");
    };

    // bucket key: (step index k, window of recent scaled steps)
    struct Bucket {
        std::map<int64_t, uint64_t> counts;
        uint64_t total = 0;
    };
    std::map<std::pair<uint64_t, std::vector<int64_t>>, Bucket> buckets;

    VerifyReport report;
    for (uint64_t walk = 0; walk < config.n_walks; ++walk) {
        PhiloxRng rng(config.seed, walk);
        std::vector<int64_t> steps;
        uint64_t trials = 0;
        while (steps.size() < config.depth && trials < config.max_trials_per_walk) {
            size_t rule = pick_rule(steps);
            Outcome o = samplers[rule].draw(rng);
            ++trials;
            if (!spec.is_relevant(o)) continue;
            int64_t s = spec.scaled_step(o);
            uint64_t k = steps.size() + 1;
            uint64_t window = std::min<uint64_t>(k - 1, config.history_window);
            std::vector<int64_t> recent(steps.end() - static_cast<long>(window), steps.end());
            Bucket& b = buckets[{k, std::move(recent)}];
            ++b.counts[s];
            ++b.total;
            steps.push_back(s);
        }
        report.total_trials += trials;
        report.total_steps += steps.size();
    }

    const double scale = to_double(Rat(1) / Rat(spec.lattice_scale()));
    for (const auto& [key, bucket] : buckets) {
        if (bucket.total < config.min_count) continue;
        ++report.buckets_checked;
        double n = double(bucket.total);
        double mean = 0.0, mean_sq = 0.0;
        for (const auto& [sstep, cnt] : bucket.counts) {
            double v = double(sstep) * scale;
            double w = double(cnt) / n;
            mean += v * w;
            mean_sq += v * v * w;
        }
        double var = std::max(0.0, mean_sq - mean * mean);
        double sigma = std::sqrt(var / n);
        if (mean > config.slack_sigmas * sigma) {
            report.violations.push_back(
                {key.first, key.second, bucket.total, mean, sigma});
        }
    }
    return report;
}

} // namespace bellcert
