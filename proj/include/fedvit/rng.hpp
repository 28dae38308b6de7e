#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace fedvit {

/// Deterministic seeded generator (xoshiro256++ core, SplitMix64 seeding).
///
/// A 256-bit master seed defines a replayable stream. Independent
/// sub-streams for distinct purposes are derived with `stream(label)`,
/// which hashes the ASCII label into the *original* seed words, so child
/// streams do not depend on how much the parent has been consumed.
class Rng {
public:
    /// Expand a 64-bit seed into the 256-bit state via SplitMix64.
    explicit Rng(std::uint64_t seed);

    /// Seed from explicit 256-bit material (e.g. a key seed).
    explicit Rng(const std::array<std::uint64_t, 4>& seed_words);

    /// Derive an independent child stream for the given purpose label.
    Rng stream(std::string_view label) const;

    std::uint64_t next_u64();

    /// Uniform double in [0, 1).
    double uniform01();

    /// Standard normal via Box-Muller (second value cached).
    double normal();

    /// Unbiased uniform integer in [0, bound). bound must be >= 1.
    std::uint64_t below(std::uint64_t bound);

    const std::array<std::uint64_t, 4>& seed_words() const { return seed_; }

private:
    std::array<std::uint64_t, 4> seed_{};
    std::array<std::uint64_t, 4> state_{};
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;

    void init_state();
};

/// SplitMix64 mixing step, also used for seed expansion and fingerprints.
std::uint64_t splitmix64(std::uint64_t& state);

/// FNV-1a 64-bit hash of a byte string (stream labels, key fingerprints).
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace fedvit
