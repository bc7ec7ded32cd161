#pragma once

#include <cstdint>

namespace qnw {

/// Splittable counter-based pseudorandom generator (see docs/determinism.md).
///
/// A stream is a 64-bit key; output word k is splitmix64_mix(key + (k+1)*GAMMA).
/// Streams derived with different tags from the same parent are independent for
/// all practical purposes, and a (seed, stream-id) pair fully determines every
/// output on every platform. Word access is random (counter-indexed), so results
/// never depend on evaluation order.
class SplitRng {
  public:
    SplitRng(uint64_t seed, uint64_t stream_id = 0)
        : key_(mix(mix(seed ^ kSeedSalt) ^ mix(stream_id ^ kStreamSalt))) {}

    /// Child stream; independent of this stream's counter position.
    SplitRng derive(uint64_t tag) const { return SplitRng(FromKey{}, mix(key_ ^ mix(tag ^ kDeriveSalt))); }

    uint64_t word(uint64_t counter) const { return mix(key_ + (counter + 1) * kGamma); }

    uint64_t next() { return word(counter_++); }

    /// Sign in {+1,-1} from the top bit of word(counter).
    int8_t sign_at(uint64_t counter) const { return (word(counter) >> 63) ? int8_t{+1} : int8_t{-1}; }

    int8_t next_sign() { return sign_at(counter_++); }

    /// Uniform bit (0/1) from the top bit of word(counter).
    int bit_at(uint64_t counter) const { return static_cast<int>(word(counter) >> 63); }

    uint64_t key() const { return key_; }

    // std::uniform_random_bit_generator interface
    using result_type = uint64_t;
    static constexpr uint64_t min() { return 0; }
    static constexpr uint64_t max() { return ~0ull; }
    uint64_t operator()() { return next(); }

  private:
    struct FromKey {};
    SplitRng(FromKey, uint64_t key) : key_(key) {}

    // splitmix64 finalizer (Steele, Lea, Flood 2014)
    static constexpr uint64_t mix(uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;
    static constexpr uint64_t kSeedSalt = 0x243F6A8885A308D3ull;
    static constexpr uint64_t kStreamSalt = 0x13198A2E03707344ull;
    static constexpr uint64_t kDeriveSalt = 0xA4093822299F31D0ull;

    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace qnw
