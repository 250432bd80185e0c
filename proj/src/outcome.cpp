#include "bellcert/outcome.hpp"

namespace bellcert {

namespace {

std::array<std::string, 16> build_names() {
    std::array<std::string, 16> names;
    for (int i = 0; i < 16; ++i) {
        Outcome o(i);
        names[i] = result_name(o.result1()) + result_name(o.result2()) +
                   setting1_name(o.setting1()) + setting2_name(o.setting2());
    }
    return names;
}

const std::array<std::string, 16>& names() {
    static const std::array<std::string, 16> table = build_names();
    return table;
}

} // namespace

const std::string& Outcome::name() const { return names()[index_]; }

std::optional<Outcome> Outcome::from_name(const std::string& name) {
    for (int i = 0; i < 16; ++i) {
        if (names()[i] == name) return Outcome(i);
    }
    return std::nullopt;
}

const std::array<Outcome, 16>& all_outcomes() {
    static const std::array<Outcome, 16> table = [] {
        std::array<Outcome, 16> t;
        for (int i = 0; i < 16; ++i) t[i] = Outcome(i);
        return t;
    }();
    return table;
}

std::string setting1_name(Setting1 s) { return s == Setting1::a ? "a" : "a'"; }
std::string setting2_name(Setting2 s) { return s == Setting2::b ? "b" : "b'"; }
std::string result_name(Result r) { return r == Result::plus ? "+" : "0"; }

std::optional<Setting1> parse_setting1(const std::string& token) {
    if (token == "a") return Setting1::a;
    if (token == "a'") return Setting1::a_prime;
    return std::nullopt;
}

std::optional<Setting2> parse_setting2(const std::string& token) {
    if (token == "b") return Setting2::b;
    if (token == "b'") return Setting2::b_prime;
    return std::nullopt;
}

std::optional<Result> parse_result(const std::string& token) {
    if (token == "+") return Result::plus;
    if (token == "0") return Result::zero;
    return std::nullopt;
}

} // namespace bellcert
