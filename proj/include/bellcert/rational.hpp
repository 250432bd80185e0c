#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

#include "bellcert/errors.hpp"

namespace bellcert {

// Exact rational scalar. All probability bookkeeping outside the DP sweep
// is done in Rat; conversion to double happens at reporting boundaries.
using Rat = mpq_class;

inline Rat rat(long num, long den = 1) {
    if (den == 0) throw InvalidParameterError("rational with zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline double to_double(const Rat& r) { return r.get_d(); }

inline std::string to_string(const Rat& r) { return r.get_str(); }

// Accepts "p/q", integer, or decimal strings ("0.05" -> 1/20). Decimals
// convert exactly via their base-10 expansion.
Rat parse_rational(const std::string& text);

// Exact dyadic expansion of an IEEE double (lossless).
Rat rational_from_double(double x);

// Least common multiple of the denominators of a range of rationals.
template <typename It>
mpz_class denominator_lcm(It begin, It end) {
    mpz_class l = 1;
    for (It it = begin; it != end; ++it) {
        mpz_class den = it->get_den();
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), l.get_mpz_t(), den.get_mpz_t());
        l = l / g * den;
    }
    return l;
}

} // namespace bellcert
