#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace seqgen {

using Rng = std::mt19937_64;

/// Seed for an independent stream: hash of (master seed, component label,
/// trial index). Distinct labels or indices give unrelated streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
    return Rng(derive_seed(master, label, index));
}

/// Uniform double in (0, 1), never exactly 0.
inline double uniform_open(Rng &rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Pulls single random bits out of 64-bit draws.
class BitSource {
  public:
    explicit BitSource(Rng &rng) : rng_(rng) {}

    bool bit() {
        if (left_ == 0) {
            bits_ = rng_();
            left_ = 64;
        }
        const bool b = (bits_ & 1u) != 0;
        bits_ >>= 1;
        --left_;
        return b;
    }

  private:
    Rng &rng_;
    std::uint64_t bits_ = 0;
    int left_ = 0;
};

} // namespace seqgen
