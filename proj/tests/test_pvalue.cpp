#include <doctest.h>

#include <cmath>

#include "bellcert/errors.hpp"
#include "bellcert/pvalue.hpp"
#include "helpers.hpp"

using namespace bellcert;
using namespace bellcert::testing;

TEST_CASE("binomial tail basics") {
    CHECK(binomial_pvalue(2, 2).p == doctest::Approx(0.25).epsilon(1e-12));
    // 3-step walk ending at -1: need at least one up-step out of three
    CHECK(binomial_pvalue(-1, 3).p == doctest::Approx(7.0 / 8).epsilon(1e-12));
    CHECK(binomial_pvalue(-3, 3).p == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(binomial_pvalue(3, 3).p == doctest::Approx(1.0 / 8).epsilon(1e-12));
    CHECK_THROWS_AS(binomial_pvalue(4, 3), InvalidParameterError);
    CHECK_THROWS_AS(binomial_pvalue(0, 0), InvalidParameterError);
    CHECK_THROWS_AS(binomial_pvalue(1, 2, 0.5), InvalidParameterError); // parity
    CHECK(binomial_pvalue(1, 2, 0.5, true).p == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(binomial_pvalue(2, 2, 0.0), InvalidParameterError);
}

TEST_CASE("log-anchored tail matches exact rational summation") {
    // oracle: direct rational summation, every (J, m) with m <= 30
    for (uint64_t m = 1; m <= 30; ++m) {
        for (int64_t j = -static_cast<int64_t>(m); j <= static_cast<int64_t>(m); j += 2) {
            if ((static_cast<uint64_t>(std::llabs(j)) % 2) != (m % 2)) continue;
            auto got = binomial_pvalue(j, m);
            Rat expect = binomial_tail_exact(up_steps_needed(j, m), m, Rat(1, 2));
            double e = to_double(expect);
            CHECK(std::abs(got.p - e) <= 1e-12 * e);
            CHECK(got.log_p == doctest::Approx(std::log(e)).epsilon(1e-10));
        }
    }
    // a biased null as well
    for (uint64_t m = 5; m <= 25; m += 5) {
        auto got = binomial_pvalue(static_cast<int64_t>(m) - 4, m, 0.3);
        Rat expect = binomial_tail_exact(m - 2, m, Rat(3, 10));
        CHECK(std::abs(got.p - to_double(expect)) <= 1e-12 * to_double(expect));
    }
}

TEST_CASE("published tail values") {
    // simulated-experiment table, lenient rounding where parity disagrees
    struct Row {
        int64_t j;
        uint64_t m;
        double expect;
    };
    for (const Row& r : {Row{591, 9380, 5.17e-10}, Row{573, 10175, 7.06e-9},
                         Row{562, 10545, 2.20e-8}, Row{206, 8624, 0.0136},
                         Row{202, 9696, 0.0206}, Row{245, 9937, 0.0072}}) {
        auto got = binomial_pvalue(r.j, r.m, 0.5, true);
        CHECK(std::abs(got.p - r.expect) <= 0.2 * r.expect);
    }
    // widened null from the setting-bias analysis
    auto adjusted = binomial_pvalue(2414, 65876, 0.512);
    CHECK(std::abs(adjusted.p - 0.00058) <= 0.1 * 0.00058);
}

TEST_CASE("normal sigma") {
    CHECK(normal_sigma(126715, 2011897) == doctest::Approx(89.3).epsilon(0.005));
    CHECK(normal_sigma(0, 999) == 0.0);
    for (uint64_t m : {4u, 16u, 64u, 1024u})
        CHECK(normal_sigma(static_cast<int64_t>(m), m) ==
              doctest::Approx(std::sqrt(double(m))).epsilon(1e-12));
    // drift-adjusted
    CHECK(normal_sigma(100, 100, 0.75) ==
          doctest::Approx((100.0 - 50.0) / (2 * std::sqrt(100 * 0.75 * 0.25))).epsilon(1e-12));
}

TEST_CASE("normal tail wings") {
    CHECK(normal_tail(0.0).p == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(normal_tail(3.0).p == doctest::Approx(0.001349898).epsilon(1e-6));
    auto far = normal_tail(89.3);
    CHECK(far.p == 0.0); // below double underflow
    CHECK(far.log_p == doctest::Approx(-0.5 * 89.3 * 89.3 - std::log(89.3) -
                                       0.5 * std::log(2 * M_PI))
                           .epsilon(1e-6));
}

TEST_CASE("supermartingale concentration bound") {
    CHECK(mcdiarmid_bound(4258, 131116).p == doctest::Approx(8.0e-16).epsilon(0.05));
    CHECK(mcdiarmid_bound(1135, 20395).p == doctest::Approx(1.19e-7).epsilon(0.05));
    CHECK(mcdiarmid_bound(447, 19359).p == doctest::Approx(0.0750).epsilon(0.05));
    CHECK_THROWS_AS(mcdiarmid_bound(0, 100), InvalidParameterError);
    CHECK_THROWS_AS(mcdiarmid_bound(100, 100), InvalidParameterError);
    CHECK_THROWS_AS(mcdiarmid_bound(101, 100), InvalidParameterError);
    // log and linear stay consistent
    auto b = mcdiarmid_bound(4258, 131116);
    CHECK(std::exp(b.log_p) == doctest::Approx(b.p).epsilon(1e-12));
}

TEST_CASE("setting-bias epsilon model") {
    auto zero = epsilon_model(0.0);
    CHECK(zero.adjusted_p0 == 0.5);
    CHECK(zero.mean_bound == 0.0);

    auto small = epsilon_model(0.006);
    CHECK(small.adjusted_p0 == doctest::Approx(0.512).epsilon(5e-4));

    auto quarter = epsilon_model(0.25);
    CHECK(quarter.mean_bound == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(quarter.adjusted_p0 == doctest::Approx(0.9).epsilon(1e-12));

    CHECK_THROWS_AS(epsilon_model(-0.01), InvalidParameterError);
    CHECK_THROWS_AS(epsilon_model(0.5), InvalidParameterError);

    // strictly increasing on the domain
    double prev = -1;
    for (double e = 0.0; e < 0.5; e += 0.01) {
        double v = epsilon_model(e).adjusted_p0;
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("epsilon recommendation") {
    CHECK(suggest_epsilon(rat(501, 1000), rat(5058, 10000)) == rat(6, 1000));
    CHECK(suggest_epsilon(Rat(1, 2), Rat(1, 2)) == 0);
    CHECK(suggest_epsilon(rat(48, 100), Rat(1, 2)) == rat(20, 1000));
    // exact multiples of the grid do not get bumped a notch
    CHECK(suggest_epsilon(Rat(1, 2) + Rat(3, 1000), Rat(1, 2)) == Rat(3, 1000));
}
