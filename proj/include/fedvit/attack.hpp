#pragma once

#include <cstdint>
#include <optional>

#include "fedvit/crypto.hpp"
#include "fedvit/matrix.hpp"
#include "fedvit/model.hpp"

namespace fedvit {

/// A single-image embedding-layer gradient as observed by the server.
struct AttackInput {
    Matrix g_pat;      // L x D
    Matrix g_pos;      // (N+1) x D
    bool encrypted = false;
    ModelConfig cfg;
};

struct ReconstructedPatches {
    Matrix patches;  // N x L
    std::size_t rank_used = 0;
};

/// Closed-form gradient inversion against the embedding layer.
///
/// The backward pass gives two identities the attacker can exploit:
/// rows 1..N of g_pos are exactly the per-position upstream gradients
/// g_i = dloss/dZ0 row i, and g_pat = sum_i x_i^T g_i where x_i are the
/// flattened patches. With G = g_pos rows 1..N full rank (N <= D), the
/// patches are the least-squares solution of X^T G = g_pat — one linear
/// solve, no iteration. On ciphertext gradients the same solve returns
/// E_a/permutation-scrambled rows instead of the image.
///
/// Requires a single-image gradient; rank(G) < N raises
/// RankDeficiencyError (attack inconclusive, not a crash).
ReconstructedPatches reconstruct_patches(const AttackInput& input);

/// Exact inverse of patchify's raster conventions (bit-exact round trip).
/// Pixel values are copied as-is; reconstructions may leave [0,1].
Sample unpatchify(const Matrix& patches, const ModelConfig& cfg, std::uint32_t label = 0);

/// Reconstruction quality versus ground truth, computed on pixels clamped
/// to [0,1]. psnr is +infinity when mse == 0 (reported as exact).
struct AttackMetrics {
    double max_abs_err = 0.0;
    double mse = 0.0;
    double psnr = 0.0;
    bool exact = false;
    std::size_t rank_used = 0;
};

double psnr_from_mse(double mse);
AttackMetrics score_reconstruction(const Sample& reconstructed, const Sample& truth,
                                   std::size_t rank_used);

/// Quality of the mid-gray baseline image (all pixels 0.5) against the
/// same ground truth; the registered "attack failed" yardstick.
AttackMetrics midgray_baseline(const Sample& truth);

/// One sample attacked through every lens of the experiment: plaintext
/// gradients, ciphertext gradients, and ciphertext after decrypting with
/// the true key. Inconclusive (rank-deficient) cases carry no metrics.
struct AttackCase {
    std::optional<AttackMetrics> metrics;
    std::optional<Sample> reconstruction;  // clamped to [0,1]
    std::size_t rank_reported = 0;         // numerical rank when inconclusive
};

struct AttackReport {
    AttackCase plain;
    AttackCase encrypted;
    AttackCase decrypted;  // decrypt-then-attack with the true key
    AttackMetrics baseline;
};

/// Compute the single-sample gradient of `params` at `sample`, encrypt it
/// with `key`, and run all three attack cases.
AttackReport evaluate_attack(const ModelParams& params, const ModelConfig& cfg,
                             const SecretKey& key, const Sample& sample);

/// Attack already-materialized gradients (e.g. loaded from a run snapshot).
AttackCase attack_gradients(const Matrix& g_pat, const Matrix& g_pos, const ModelConfig& cfg,
                            bool encrypted, const Sample& truth);

}  // namespace fedvit
