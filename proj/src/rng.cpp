#include "fedvit/rng.hpp"

#include <cmath>

#include "fedvit/errors.hpp"

namespace fedvit {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += kGolden);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : seed_) w = splitmix64(sm);
    init_state();
}

Rng::Rng(const std::array<std::uint64_t, 4>& seed_words) : seed_(seed_words) {
    init_state();
}

void Rng::init_state() {
    // Remix the seed words so adjacent seeds give unrelated states and the
    // all-zero state (invalid for xoshiro) cannot occur.
    for (int i = 0; i < 4; ++i) {
        std::uint64_t sm = seed_[static_cast<std::size_t>(i)] + kGolden * static_cast<std::uint64_t>(i + 1);
        state_[static_cast<std::size_t>(i)] = splitmix64(sm);
    }
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = kGolden;
}

Rng Rng::stream(std::string_view label) const {
    const std::uint64_t h = fnv1a64(label);
    std::array<std::uint64_t, 4> child{};
    for (int i = 0; i < 4; ++i) {
        std::uint64_t sm = seed_[static_cast<std::size_t>(i)] ^ (h + kGolden * static_cast<std::uint64_t>(i + 1));
        child[static_cast<std::size_t>(i)] = splitmix64(sm);
    }
    return Rng(child);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // u1 in (0, 1] so the log is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_normal_ = true;
    return r * std::cos(a);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw NumericError("Rng::below: bound must be >= 1");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % bound;
}

}  // namespace fedvit
