#include "bellcert/dp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <thread>

#include "bellcert/errors.hpp"

namespace bellcert {

std::vector<ScaledCandidate> scale_candidates(const StepCandidateSet& set) {
    if (set.candidates.empty()) throw InvalidParameterError("candidate set is empty");
    std::vector<ScaledCandidate> out;
    out.reserve(set.candidates.size());
    for (const StepDistribution& cand : set.candidates) {
        ScaledCandidate sc;
        sc.source_strategy = cand.source_strategy;
        for (const auto& [step, prob] : cand.entries) {
            if (prob == 0) continue;
            Rat scaled = step * Rat(set.lattice_scale);
            if (scaled.get_den() != 1)
                throw InvalidParameterError("step value " + to_string(step) +
                                            " is not on the spec lattice");
            mpz_class z = scaled.get_num();
            if (!z.fits_slong_p()) throw InvalidParameterError("scaled step overflows");
            if (!prob.get_num().fits_slong_p() || !prob.get_den().fits_slong_p())
                throw InvalidParameterError("candidate probability too large to serialize");
            int64_t num = prob.get_num().get_si();
            int64_t den = prob.get_den().get_si();
            // same rounding as the file-load path, so a reloaded policy
            // replays bit-identically
            sc.entries.push_back({z.get_si(), double(num) / double(den), num, den});
        }
        if (sc.entries.empty()) throw InvalidParameterError("candidate with empty support");
        out.push_back(std::move(sc));
    }
    return out;
}

// ---------------------------------------------------------------------------
// PolicyTable
// ---------------------------------------------------------------------------

PolicyTable::PolicyTable(int64_t L, uint64_t m, int64_t lattice_scale,
                         std::vector<ScaledCandidate> candidates,
                         std::vector<std::pair<int64_t, int64_t>> bands)
    : L_(L), m_(m), lattice_scale_(lattice_scale), candidates_(std::move(candidates)),
      bands_(std::move(bands)) {
    bits_ = candidates_.size() <= 4 ? 2 : 8;
    offsets_.resize(m_ + 1);
    uint64_t total = 0;
    for (uint64_t i = 0; i < m_; ++i) {
        offsets_[i] = total;
        if (bands_[i].second >= bands_[i].first)
            total += static_cast<uint64_t>(bands_[i].second - bands_[i].first + 1);
    }
    offsets_[m_] = total;
    words_.assign((total * bits_ + 63) / 64, 0);
}

int PolicyTable::candidate_at(uint64_t step_index, int64_t position) const {
    if (step_index >= m_) throw InvalidParameterError("step index out of range");
    const auto& [lo, hi] = bands_[step_index];
    if (position < lo || position > hi)
        throw InvalidParameterError("position outside the policy band");
    uint64_t cell = offsets_[step_index] + static_cast<uint64_t>(position - lo);
    uint64_t bit = cell * bits_;
    uint64_t word = words_[bit / 64];
    return static_cast<int>((word >> (bit % 64)) & ((1u << bits_) - 1));
}

void PolicyTable::set_row(uint64_t step_index, const uint8_t* codes, size_t count) {
    uint64_t cell = offsets_[step_index];
    for (size_t k = 0; k < count; ++k) {
        uint64_t bit = (cell + k) * bits_;
        words_[bit / 64] |= static_cast<uint64_t>(codes[k]) << (bit % 64);
    }
}

namespace {

constexpr char kPolicyMagic[8] = {'B', 'C', 'P', 'O', 'L', 'v', '1', '\n'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError("truncated policy file");
    return v;
}

} // namespace

void PolicyTable::save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open " + path + " for writing");
    os.write(kPolicyMagic, sizeof(kPolicyMagic));
    write_pod(os, L_);
    write_pod(os, m_);
    write_pod(os, lattice_scale_);
    write_pod(os, static_cast<uint32_t>(bits_));
    write_pod(os, static_cast<uint32_t>(candidates_.size()));
    for (const ScaledCandidate& c : candidates_) {
        write_pod(os, static_cast<uint32_t>(c.source_strategy));
        write_pod(os, static_cast<uint32_t>(c.entries.size()));
        for (const auto& e : c.entries) {
            write_pod(os, e.step);
            write_pod(os, e.prob_num);
            write_pod(os, e.prob_den);
        }
    }
    for (const auto& [lo, hi] : bands_) {
        write_pod(os, lo);
        write_pod(os, hi);
    }
    write_pod(os, static_cast<uint64_t>(words_.size()));
    os.write(reinterpret_cast<const char*>(words_.data()),
             static_cast<std::streamsize>(words_.size() * sizeof(uint64_t)));
    if (!os) throw DataError("failed writing " + path);
}

PolicyTable PolicyTable::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open " + path);
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kPolicyMagic, sizeof(magic)) != 0)
        throw DataError(path + " is not a policy file");
    int64_t L = read_pod<int64_t>(is);
    uint64_t m = read_pod<uint64_t>(is);
    int64_t scale = read_pod<int64_t>(is);
    uint32_t bits = read_pod<uint32_t>(is);
    uint32_t n_cand = read_pod<uint32_t>(is);
    std::vector<ScaledCandidate> candidates(n_cand);
    for (ScaledCandidate& c : candidates) {
        c.source_strategy = static_cast<int>(read_pod<uint32_t>(is));
        uint32_t n_entries = read_pod<uint32_t>(is);
        c.entries.resize(n_entries);
        for (auto& e : c.entries) {
            e.step = read_pod<int64_t>(is);
            e.prob_num = read_pod<int64_t>(is);
            e.prob_den = read_pod<int64_t>(is);
            if (e.prob_den <= 0) throw DataError("bad probability in policy file");
            e.prob = double(e.prob_num) / double(e.prob_den);
        }
    }
    std::vector<std::pair<int64_t, int64_t>> bands(m);
    for (auto& [lo, hi] : bands) {
        lo = read_pod<int64_t>(is);
        hi = read_pod<int64_t>(is);
    }
    PolicyTable table(L, m, scale, std::move(candidates), std::move(bands));
    if (table.bits_ != static_cast<int>(bits)) throw DataError("policy file width mismatch");
    uint64_t n_words = read_pod<uint64_t>(is);
    if (n_words != table.words_.size()) throw DataError("policy file size mismatch");
    is.read(reinterpret_cast<char*>(table.words_.data()),
            static_cast<std::streamsize>(n_words * sizeof(uint64_t)));
    if (!is) throw DataError("truncated policy file");
    return table;
}

// ---------------------------------------------------------------------------
// Backward-induction sweep
// ---------------------------------------------------------------------------

namespace {

// Candidate laws flattened into plain arrays so the row loop sees no
// indirection the optimizer cannot hoist.
struct FlatCandidates {
    static constexpr int kMaxEntries = 64;
    int n_candidates = 0;
    int begin[kMaxEntries + 1] = {};
    double prob[kMaxEntries] = {};
    int32_t off[kMaxEntries] = {};

    explicit FlatCandidates(const std::vector<ScaledCandidate>& candidates) {
        size_t total = 0;
        for (const auto& c : candidates) total += c.entries.size();
        if (total > kMaxEntries || candidates.size() > kMaxEntries)
            throw InvalidParameterError("candidate set too large for the sweep kernel");
        n_candidates = static_cast<int>(candidates.size());
        int k = 0;
        for (int c = 0; c < n_candidates; ++c) {
            begin[c] = k;
            for (const auto& e : candidates[static_cast<size_t>(c)].entries) {
                if (e.step > INT32_MAX / 2 || e.step < INT32_MIN / 2)
                    throw InvalidParameterError("step value too large for the sweep kernel");
                prob[k] = e.prob;
                off[k] = static_cast<int32_t>(e.step);
                ++k;
            }
        }
        begin[n_candidates] = k;
    }
};

constexpr int64_t kSweepTile = 1024;

// One candidate's expectation over a contiguous run of positions, folded
// into the running maximum. Written entry-major so every loop is a countable
// contiguous multiply-add pass the vectorizer handles; the per-cell
// reduction form defeats it. First=true writes the expectation straight out.
template <bool First, bool WantPolicy>
__attribute__((always_inline)) inline void
eval_candidate_max(const FlatCandidates& fc, int c, const double* src,
                   double* __restrict out, uint8_t* __restrict am, int64_t n) {
    const int b = fc.begin[c];
    const int entries = fc.begin[c + 1] - b;
    auto fold = [&](auto value_at) {
        if constexpr (First) {
            for (int64_t t = 0; t < n; ++t) out[t] = value_at(t);
            if constexpr (WantPolicy) std::memset(am, 0, static_cast<size_t>(n));
        } else if constexpr (WantPolicy) {
            for (int64_t t = 0; t < n; ++t) {
                double v = value_at(t);
                bool better = v > out[t];
                out[t] = better ? v : out[t];
                am[t] = better ? static_cast<uint8_t>(c) : am[t];
            }
        } else {
            for (int64_t t = 0; t < n; ++t) {
                double v = value_at(t);
                out[t] = v > out[t] ? v : out[t];
            }
        }
    };
    switch (entries) {
        case 1: {
            const double p0 = fc.prob[b];
            const double* __restrict a0 = src + fc.off[b];
            fold([=](int64_t t) { return p0 * a0[t]; });
            break;
        }
        case 2: {
            const double p0 = fc.prob[b], p1 = fc.prob[b + 1];
            const double* __restrict a0 = src + fc.off[b];
            const double* __restrict a1 = src + fc.off[b + 1];
            fold([=](int64_t t) { return p0 * a0[t] + p1 * a1[t]; });
            break;
        }
        case 3: {
            const double p0 = fc.prob[b], p1 = fc.prob[b + 1], p2 = fc.prob[b + 2];
            const double* __restrict a0 = src + fc.off[b];
            const double* __restrict a1 = src + fc.off[b + 1];
            const double* __restrict a2 = src + fc.off[b + 2];
            fold([=](int64_t t) { return p0 * a0[t] + p1 * a1[t] + p2 * a2[t]; });
            break;
        }
        case 4: {
            const double p0 = fc.prob[b], p1 = fc.prob[b + 1];
            const double p2 = fc.prob[b + 2], p3 = fc.prob[b + 3];
            const double* __restrict a0 = src + fc.off[b];
            const double* __restrict a1 = src + fc.off[b + 1];
            const double* __restrict a2 = src + fc.off[b + 2];
            const double* __restrict a3 = src + fc.off[b + 3];
            fold([=](int64_t t) { return (p0 * a0[t] + p1 * a1[t]) + (p2 * a2[t] + p3 * a3[t]); });
            break;
        }
        default: {
            // rare: wide support, evaluated with a scalar inner loop
            const double* probs = fc.prob + b;
            const int32_t* offs = fc.off + b;
            fold([=](int64_t t) {
                double v = 0.0;
                for (int k = 0; k < entries; ++k) v += probs[k] * src[t + offs[k]];
                return v;
            });
        }
    }
}

template <bool WantPolicy>
__attribute__((always_inline)) inline void
sweep_range(const FlatCandidates& fc, const double* next, double* cur, uint8_t* argmax,
            int64_t base, int64_t lo, int64_t hi) {
    for (int64_t tlo = lo; tlo <= hi; tlo += kSweepTile) {
        const int64_t n = std::min(kSweepTile, hi - tlo + 1);
        const double* src = next + (tlo - base);
        double* out = cur + (tlo - base);
        uint8_t* am = argmax ? argmax + (tlo - base) : nullptr;

        eval_candidate_max<true, WantPolicy>(fc, 0, src, out, am, n);
        for (int c = 1; c < fc.n_candidates; ++c)
            eval_candidate_max<false, WantPolicy>(fc, c, src, out, am, n);
    }
}

// Cloned per instruction set; the row sweep is the whole cost of the DP.
__attribute__((target_clones("avx512f", "avx2", "default")))
void sweep_row_value(const FlatCandidates& fc, const double* next, double* cur, int64_t base,
                     int64_t lo, int64_t hi) {
    sweep_range<false>(fc, next, cur, nullptr, base, lo, hi);
}

__attribute__((target_clones("avx512f", "avx2", "default")))
void sweep_row_policy(const FlatCandidates& fc, const double* next, double* cur,
                      uint8_t* argmax, int64_t base, int64_t lo, int64_t hi) {
    sweep_range<true>(fc, next, cur, argmax, base, lo, hi);
}

struct SweepKernel {
    const FlatCandidates& fc;
    const double* next; // indexed by absolute position - base
    double* cur;
    uint8_t* argmax; // nullptr when no policy wanted
    int64_t base;

    void run(int64_t lo, int64_t hi) const {
        if (argmax) sweep_row_policy(fc, next, cur, argmax, base, lo, hi);
        else sweep_row_value(fc, next, cur, base, lo, hi);
    }
};

void fill_range(double* row, int64_t base, int64_t from, int64_t to, double value) {
    for (int64_t x = from; x <= to; ++x) row[x - base] = value;
}

} // namespace

DpResult exact_pvalue_dp(int64_t L, uint64_t m, const StepCandidateSet& set, bool want_policy,
                         int threads) {
    if (m == 0) throw InvalidParameterError("m must be positive");
    if (m > (uint64_t{1} << 40)) throw InvalidParameterError("m too large for the sweep");
    std::vector<ScaledCandidate> candidates = scale_candidates(set);
    if (candidates.size() > 255)
        throw InvalidParameterError("too many candidate distributions");

    int64_t s_max = std::numeric_limits<int64_t>::min();
    int64_t s_min = std::numeric_limits<int64_t>::max();
    for (const auto& c : candidates) {
        for (const auto& e : c.entries) {
            s_max = std::max(s_max, e.step);
            s_min = std::min(s_min, e.step);
        }
    }
    const int64_t u = s_max;  // best possible single-step climb
    const int64_t d = -s_min; // worst possible single-step drop
    const int64_t mi = static_cast<int64_t>(m);

    DpResult result;
    result.L = L;
    result.m = m;

    // reachability shortcuts
    if (L > mi * u) {
        result.p = {0.0, -std::numeric_limits<double>::infinity()};
        return result;
    }
    if (L <= -mi * d) {
        result.p = {1.0, 0.0};
        return result;
    }

    auto band_lo = [&](uint64_t i) {
        int64_t r = mi - static_cast<int64_t>(i);
        return std::max(L - r * u, static_cast<int64_t>(i) * s_min);
    };
    auto band_hi = [&](uint64_t i) {
        int64_t r = mi - static_cast<int64_t>(i);
        return std::min(L + r * d - 1, static_cast<int64_t>(i) * s_max);
    };

    // global array span covering every read and write of the sweep
    int64_t g_lo = std::min({int64_t{0}, L - mi * u, mi * s_min}) + std::min(s_min, int64_t{0}) - 1;
    int64_t g_hi = std::max({int64_t{0}, L + mi * d, mi * s_max}) + std::max(s_max, int64_t{0}) + 1;
    uint64_t span = static_cast<uint64_t>(g_hi - g_lo + 1);
    if (span > (uint64_t{1} << 31))
        throw InvalidParameterError("walk lattice too wide for the banded sweep");

    std::vector<double> row_a(span), row_b(span);
    double* next = row_a.data();
    double* cur = row_b.data();

    result.band_bounds.resize(m);
    for (uint64_t i = 0; i < m; ++i) {
        int64_t lo = band_lo(i), hi = band_hi(i);
        result.band_bounds[i] = {lo, hi};
    }

    std::shared_ptr<PolicyTable> policy;
    std::vector<uint8_t> codes;
    if (want_policy) {
        if (!set.lattice_scale.fits_slong_p())
            throw InvalidParameterError("lattice scale too large for a policy table");
        policy = std::make_shared<PolicyTable>(L, m, set.lattice_scale.get_si(), candidates,
                                               result.band_bounds);
        codes.resize(span);
    }

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;

    // final column: margins of the (empty) step-m band encode [x >= L]
    {
        int64_t read_lo = band_lo(m - 1) + s_min;
        int64_t read_hi = band_hi(m - 1) + s_max;
        fill_range(next, g_lo, read_lo, std::min(L - 1, read_hi), 0.0);
        fill_range(next, g_lo, std::max(L, read_lo), read_hi, 1.0);
    }

    const FlatCandidates flat(candidates);

    for (uint64_t ii = m; ii-- > 0;) {
        const int64_t lo = result.band_bounds[ii].first;
        const int64_t hi = result.band_bounds[ii].second;
        SweepKernel kernel{flat, next, cur, want_policy ? codes.data() : nullptr, g_lo};

        int64_t width = hi - lo + 1;
        if (width > 0) {
            if (threads > 1 && width >= 1 << 15) {
                std::vector<std::thread> pool;
                int64_t chunk = (width + threads - 1) / threads;
                for (int t = 0; t < threads; ++t) {
                    int64_t clo = lo + t * chunk;
                    int64_t chi = std::min(hi, clo + chunk - 1);
                    if (clo > chi) break;
                    pool.emplace_back([&kernel, clo, chi] { kernel.run(clo, chi); });
                }
                for (auto& th : pool) th.join();
            } else {
                kernel.run(lo, hi);
            }

            // success probabilities must be monotone in position
            for (int64_t x = lo + 1; x <= hi; ++x) {
                if (cur[x - g_lo] < cur[x - 1 - g_lo])
                    throw std::logic_error("DP column lost monotonicity");
            }
            if (want_policy)
                policy->set_row(ii, codes.data() + (lo - g_lo), static_cast<size_t>(width));
        }

        // constants outside this band for the row that will read it; reads
        // stay inside the reachable cone, so filling relative to the clipped
        // band cannot misclassify a cell that is actually consulted
        int64_t read_lo, read_hi;
        if (ii > 0) {
            read_lo = result.band_bounds[ii - 1].first + s_min;
            read_hi = result.band_bounds[ii - 1].second + s_max;
        } else {
            read_lo = read_hi = 0; // only the answer cell remains
        }
        fill_range(cur, g_lo, read_lo, std::min(lo - 1, read_hi), 0.0);
        fill_range(cur, g_lo, std::max({hi + 1, lo, read_lo}), read_hi, 1.0);

        std::swap(cur, next);
    }

    double p = next[0 - g_lo];
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    result.p = {p, p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity()};
    result.policy = std::move(policy);
    return result;
}

} // namespace bellcert
