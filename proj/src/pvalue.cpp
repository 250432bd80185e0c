#include "bellcert/pvalue.hpp"

#include <cmath>
#include <limits>

#include "bellcert/errors.hpp"

namespace bellcert {

namespace {

double log_binom_pmf(uint64_t m, uint64_t k, double p0) {
    return std::lgamma(double(m) + 1) - std::lgamma(double(k) + 1) -
           std::lgamma(double(m - k) + 1) + double(k) * std::log(p0) +
           double(m - k) * std::log1p(-p0);
}

} // namespace

TailProbability binomial_pvalue(int64_t j_obs, uint64_t m, double p0, bool lenient) {
    if (m == 0) throw InvalidParameterError("m must be positive");
    if (!(p0 > 0.0 && p0 < 1.0))
        throw InvalidParameterError("p0 must lie strictly inside (0,1)");
    if (j_obs > static_cast<int64_t>(m) || j_obs < -static_cast<int64_t>(m))
        throw InvalidParameterError("|J| cannot exceed m");
    if (!lenient && static_cast<uint64_t>((j_obs % 2 + 2) % 2) != (m % 2))
        throw InvalidParameterError(
            "J and m have opposite parity; no +-1 walk produces this pair "
            "(pass lenient to round up anyway)");

    // number of up-steps needed: ceil((m + J) / 2)
    int64_t twice = static_cast<int64_t>(m) + j_obs;
    uint64_t k = static_cast<uint64_t>((twice + 1) / 2);
    if (k == 0) return {1.0, 0.0};

    // Sum the tail anchored at its largest term: every scaled term is <= 1,
    // so the linear accumulation neither overflows nor loses the exponent.
    uint64_t mode = static_cast<uint64_t>(std::floor(double(m + 1) * p0));
    if (mode > m) mode = m;
    uint64_t anchor = k > mode ? k : mode;
    double log_anchor = log_binom_pmf(m, anchor, p0);

    const double odds = p0 / (1.0 - p0);
    double sum = 0.0;
    // downward from the anchor to k (terms shrink toward k when k < mode)
    double term = 1.0;
    for (uint64_t j = anchor; j > k; --j) {
        // pmf(j-1)/pmf(j) = j / ((m-j+1) * odds)
        term *= double(j) / (double(m - j + 1) * odds);
        sum += term;
    }
    // upward from the anchor to m
    term = 1.0;
    sum += term;
    for (uint64_t j = anchor + 1; j <= m; ++j) {
        term *= (double(m - j + 1) / double(j)) * odds;
        sum += term;
        if (term < 1e-20 * sum) break; // remaining geometric tail is below rounding
    }

    double log_p = log_anchor + std::log(sum);
    if (log_p > 0.0) log_p = 0.0;
    double p = std::exp(log_p);
    if (p > 1.0) p = 1.0;
    return {p, log_p};
}

double normal_sigma(int64_t j_obs, uint64_t m, double p0) {
    if (m == 0) throw InvalidParameterError("m must be positive");
    if (!(p0 > 0.0 && p0 < 1.0))
        throw InvalidParameterError("p0 must lie strictly inside (0,1)");
    double drift = double(m) * (2.0 * p0 - 1.0);
    return (double(j_obs) - drift) / (2.0 * std::sqrt(double(m) * p0 * (1.0 - p0)));
}

TailProbability normal_tail(double z) {
    if (z < 37.0) {
        double p = 0.5 * std::erfc(z / std::sqrt(2.0));
        double log_p = std::log(p);
        return {p, log_p};
    }
    // asymptotic: log Q(z) = -z^2/2 - log(z sqrt(2 pi)) + log(1 - 1/z^2 + 3/z^4 - ...)
    double z2 = z * z;
    double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    double log_p = -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
    return {std::exp(log_p), log_p};
}

TailProbability mcdiarmid_bound(uint64_t L, uint64_t m) {
    if (m == 0) throw InvalidParameterError("m must be positive");
    double t = double(L) / double(m);
    if (!(t > 0.0 && t < 1.0))
        throw InvalidParameterError("L/m must lie strictly inside (0,1)");
    double per_step = (2.0 + t) / 3.0 * std::log(2.0 / (2.0 + t)) +
                      (1.0 - t) / 3.0 * std::log(1.0 / (1.0 - t));
    double log_p = double(m) * per_step;
    if (log_p > 0.0) log_p = 0.0;
    return {std::exp(log_p), log_p};
}

EpsilonModel epsilon_model(double epsilon) {
    if (!(epsilon >= 0.0) || epsilon >= 0.5)
        throw InvalidParameterError("epsilon must lie in [0, 1/2)");
    double denom = 1.0 + 4.0 * epsilon * epsilon;
    EpsilonModel model;
    model.epsilon = epsilon;
    model.mean_bound = 4.0 * epsilon / denom;
    model.adjusted_p0 = 0.5 + 2.0 * epsilon / denom;
    return model;
}

Rat suggest_epsilon(const Rat& p_a_hat, const Rat& p_b_hat, const Rat& granularity) {
    if (granularity <= 0) throw InvalidParameterError("granularity must be positive");
    Rat half(1, 2);
    Rat dev_a = abs(Rat(p_a_hat - half));
    Rat dev_b = abs(Rat(p_b_hat - half));
    Rat dev = dev_a > dev_b ? dev_a : dev_b;
    // round up to the granularity grid, exactly
    Rat ratio = dev / granularity;
    mpz_class q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), ratio.get_num().get_mpz_t(),
                ratio.get_den().get_mpz_t());
    if (r != 0) q += 1;
    return Rat(q) * granularity;
}

} // namespace bellcert
