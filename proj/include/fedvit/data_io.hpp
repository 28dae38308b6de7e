#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedvit/model.hpp"
#include "fedvit/rng.hpp"

namespace fedvit {

struct Dataset {
    std::vector<Sample> samples;
    std::size_t num_classes = 0;
    std::string name;

    std::size_t size() const { return samples.size(); }
};

/// client_id -> sample indices; lists are pairwise disjoint.
struct Partition {
    std::vector<std::vector<std::size_t>> by_client;
};

/// Class-conditioned procedural images: per-class frequency/orientation
/// sinusoid patterns plus seeded Gaussian noise (sigma = 0.05), pixels
/// clamped to [0,1]. Labels are assigned round-robin. Separable enough
/// that the surrogate model clears 80% test accuracy at desk scale.
Dataset synth_generate(std::uint64_t seed, std::size_t n, const ModelConfig& cfg, std::size_t k);
Dataset synth_generate(const Rng& root, std::size_t n, const ModelConfig& cfg, std::size_t k);

/// CIFAR-10 binary batches: records of 1 label byte + 3072 pixel bytes
/// (R, G, B planes of 32x32 each), pixels scaled to [0,1].
Dataset load_cifar10_binary(const std::vector<std::string>& paths);

/// IDX image/label pair (grayscale), scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Disjoint uniform-random partition of m * per_client distinct indices,
/// deterministic per seed.
Partition partition_random(const Dataset& ds, std::size_t m, std::size_t per_client,
                           std::uint64_t seed);

/// Binary PPM (P6) for 3-channel pixels, PGM (P5) for 1-channel; 8-bit,
/// rounding half-up from value * 255. Out-of-range values are clamped
/// with a warning on stderr.
void write_image(const Sample& sample, const std::string& path);

}  // namespace fedvit
