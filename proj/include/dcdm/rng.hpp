// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace dcdm {

// Counter-based random streams.
//
// A stream is identified by (master seed, purpose tag, index). The tag/index
// pair lets callers carve one master seed into any number of substreams (one
// per frame, per training step, ...) whose draws are pure functions of the
// stream identity and a draw counter. Work split across threads or frames
// therefore reproduces bit-exactly regardless of scheduling.
namespace detail {

// splitmix64 finalizer (Steele/Lea/Flood); full-avalanche 64-bit mix.
constexpr uint64_t mix64(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

constexpr uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xCBF29CE484222325ull;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace detail

class RngStream {
  public:
    RngStream(uint64_t master_seed, std::string_view tag, uint64_t index)
        : key_(derive_key(master_seed, tag, index)),
          gauss_key_(detail::mix64(key_ ^ 0xD1B54A32D192ED03ull)) {}

    // Raw counter-indexed word; the stream is the sequence word(0), word(1), ...
    uint64_t word(uint64_t counter) const {
        return detail::mix64(key_ + counter * 0x9E3779B97F4A7C15ull);
    }

    uint64_t next_u64() { return word(counter_++); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return to_unit(next_u64()); }

    // Uniform integer in [0, n).
    uint64_t next_index(uint64_t n) { return next_u64() % n; }

    // Standard normal draw at gaussian index i, Box-Muller. Gaussian draws
    // consume a key space disjoint from the uniform draws, so the value at
    // index i never depends on how other draws were interleaved.
    double gaussian_at(uint64_t i) const {
        const uint64_t w1 = detail::mix64(gauss_key_ + (2 * i) * 0x9E3779B97F4A7C15ull);
        const uint64_t w2 = detail::mix64(gauss_key_ + (2 * i + 1) * 0x9E3779B97F4A7C15ull);
        const double u1 = 1.0 - to_unit(w1);  // (0, 1]
        const double u2 = to_unit(w2);        // [0, 1)
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double next_gaussian() { return gaussian_at(gauss_counter_++); }

    uint64_t key() const { return key_; }

  private:
    static uint64_t derive_key(uint64_t seed, std::string_view tag, uint64_t index) {
        uint64_t k = detail::mix64(seed);
        k = detail::mix64(k ^ detail::fnv1a64(tag));
        k = detail::mix64(k ^ index);
        return k;
    }

    static double to_unit(uint64_t x) {
        return static_cast<double>(x >> 11) * 0x1.0p-53;
    }

    uint64_t key_;
    uint64_t gauss_key_;
    uint64_t counter_ = 0;
    uint64_t gauss_counter_ = 0;
};

}  // namespace dcdm
