#pragma once

#include <array>
#include <cstdint>

namespace bellcert {

// Philox4x32-10 counter-based generator. A (seed, stream) pair names an
// independent substream, so per-run streams are reproducible regardless of
// scheduling: stream k of seed s is the same bits everywhere.
class PhiloxRng {
public:
    explicit PhiloxRng(uint64_t seed, uint64_t stream = 0)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)},
          counter_{0, 0, static_cast<uint32_t>(stream), static_cast<uint32_t>(stream >> 32)} {}

    uint32_t next_u32() {
        if (buffer_pos_ == 4) {
            block();
            buffer_pos_ = 0;
        }
        return buffer_[buffer_pos_++];
    }

    uint64_t next_u64() {
        uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // uniform in [0, 1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static void round(std::array<uint32_t, 4>& c, uint32_t k0, uint32_t k1) {
        constexpr uint64_t M0 = 0xD2511F53, M1 = 0xCD9E8D57;
        uint64_t p0 = M0 * c[0];
        uint64_t p1 = M1 * c[2];
        c = {static_cast<uint32_t>(p1 >> 32) ^ c[1] ^ k0, static_cast<uint32_t>(p1),
             static_cast<uint32_t>(p0 >> 32) ^ c[3] ^ k1, static_cast<uint32_t>(p0)};
    }

    void block() {
        std::array<uint32_t, 4> c = counter_;
        uint32_t k0 = key_[0], k1 = key_[1];
        for (int r = 0; r < 10; ++r) {
            round(c, k0, k1);
            k0 += 0x9E3779B9;
            k1 += 0xBB67AE85;
        }
        buffer_ = c;
        if (++counter_[0] == 0) ++counter_[1]; // 64-bit block counter
    }

    std::array<uint32_t, 2> key_;
    std::array<uint32_t, 4> counter_;
    std::array<uint32_t, 4> buffer_{};
    int buffer_pos_ = 4;
};

} // namespace bellcert
