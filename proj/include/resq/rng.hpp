#pragma once

#include <cstdint>

namespace resq {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Counter-based stream: the draws for (key, stream) depend on nothing else,
// so shots can be evaluated in any order or on any thread.
class CounterRng {
  public:
    constexpr CounterRng(std::uint64_t key, std::uint64_t stream)
        : base_(mix64(mix64(key) ^ mix64(stream ^ 0xD1B54A32D192ED03ULL))) {}

    constexpr std::uint64_t next() { return mix64(base_ + 0x9E3779B97F4A7C15ULL * counter_++); }

    // Uniform in [0, 1) with 53 bits.
    constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, 2^bits), bits in [1, 63].
    constexpr std::uint64_t bits(unsigned count) { return next() >> (64 - count); }

  private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
};

}  // namespace resq
