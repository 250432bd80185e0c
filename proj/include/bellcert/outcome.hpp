#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace bellcert {

enum class Setting1 : uint8_t { a = 0, a_prime = 1 };
enum class Setting2 : uint8_t { b = 0, b_prime = 1 };
enum class Result : uint8_t { plus = 0, zero = 1 };

// One of the 16 joint trial outcomes. Canonical order fixes serialization:
// the setting pair cycles slowest (ab, ab', a'b, a'b'), the result pair
// fastest (++, +0, 0+, 00), so index 0 is "++ab" and index 15 is "00a'b'".
class Outcome {
public:
    static constexpr int count = 16;

    Outcome() = default;
    constexpr explicit Outcome(int index) : index_(static_cast<uint8_t>(index)) {}
    Outcome(Result r1, Result r2, Setting1 s1, Setting2 s2)
        : index_(static_cast<uint8_t>(
              4 * (2 * static_cast<int>(s1) + static_cast<int>(s2)) +
              (2 * static_cast<int>(r1) + static_cast<int>(r2)))) {}

    constexpr int index() const { return index_; }
    Result result1() const { return static_cast<Result>((index_ % 4) / 2); }
    Result result2() const { return static_cast<Result>(index_ % 2); }
    Setting1 setting1() const { return static_cast<Setting1>(index_ / 8); }
    Setting2 setting2() const { return static_cast<Setting2>((index_ / 4) % 2); }

    bool is_00() const { return index_ % 4 == 3; }

    // Canonical text form, e.g. "0+a'b".
    const std::string& name() const;
    static std::optional<Outcome> from_name(const std::string& name);

    friend bool operator==(Outcome lhs, Outcome rhs) { return lhs.index_ == rhs.index_; }
    friend bool operator!=(Outcome lhs, Outcome rhs) { return lhs.index_ != rhs.index_; }
    friend bool operator<(Outcome lhs, Outcome rhs) { return lhs.index_ < rhs.index_; }

private:
    uint8_t index_ = 0;
};

const std::array<Outcome, 16>& all_outcomes();

std::string setting1_name(Setting1 s);
std::string setting2_name(Setting2 s);
std::string result_name(Result r);

std::optional<Setting1> parse_setting1(const std::string& token);
std::optional<Setting2> parse_setting2(const std::string& token);
std::optional<Result> parse_result(const std::string& token);

} // namespace bellcert
