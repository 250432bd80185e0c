#include "bellcert/rational.hpp"

#include <cmath>

namespace bellcert {

Rat parse_rational(const std::string& text) {
    if (text.empty()) throw InvalidParameterError("empty rational literal");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
        Rat r;
        if (r.set_str(text, 10) != 0)
            throw InvalidParameterError("bad rational literal: " + text);
        if (r.get_den() == 0)
            throw InvalidParameterError("zero denominator: " + text);
        r.canonicalize();
        return r;
    }
    auto dot = text.find('.');
    std::string digits = text;
    size_t frac_len = 0;
    if (dot != std::string::npos) {
        frac_len = text.size() - dot - 1;
        digits = text.substr(0, dot) + text.substr(dot + 1);
        if (digits.empty() || digits == "-" || digits == "+")
            throw InvalidParameterError("bad decimal literal: " + text);
    }
    mpz_class num;
    if (num.set_str(digits, 10) != 0)
        throw InvalidParameterError("bad numeric literal: " + text);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(frac_len));
    Rat r(num, den);
    r.canonicalize();
    return r;
}

Rat rational_from_double(double x) {
    if (!std::isfinite(x)) throw InvalidParameterError("non-finite value");
    Rat r;
    mpq_set_d(r.get_mpq_t(), x);
    return r;
}

} // namespace bellcert
