#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fedvit/matrix.hpp"
#include "fedvit/model.hpp"

namespace fedvit {

/// Shared secret key for embedding-layer encryption.
///
/// e_a is a random invertible L x L mixing matrix applied to the patch
/// embedding from the left; e_b is an (N+1) x (N+1) permutation matrix
/// with a fixed leading row/column (the class-token position never moves)
/// permuting the position-embedding rows. Both transforms are linear, so
/// server-side averaging and SGD steps commute with them; that is the
/// whole trick. e_a_inv is precomputed because clients decrypt every
/// round.
struct SecretKey {
    Matrix e_a;                      // L x L
    Matrix e_a_inv;                  // L x L
    std::vector<std::uint32_t> perm; // length N, 1-based targets l_t
    Matrix e_b;                      // (N+1) x (N+1), derived from perm
    std::uint64_t key_id = 0;        // fingerprint of the generating seed

    std::size_t patch_len() const { return e_a.rows; }
    std::size_t num_patches() const { return perm.size(); }

    /// Identity key (e_a = I, identity permutation). Test- and
    /// documentation-oriented; encrypt/decrypt become no-ops.
    static SecretKey identity(std::size_t l, std::size_t n);
};

/// Build the (N+1) x (N+1) permutation matrix with fixed row 0 from a
/// 1-based permutation vector.
Matrix permutation_matrix(const std::vector<std::uint32_t>& perm);

/// Deterministic power-iteration estimate of the 2-norm condition number,
/// given the matrix and its inverse.
double condition_estimate(const Matrix& a, const Matrix& a_inv);

/// Generate a key for patch length L and patch count N. e_a is sampled
/// standard-normal and resampled (up to 64 attempts, each from a distinct
/// sub-seed) until its condition estimate is at most 1e4; unbounded
/// conditioning would wreck the exact-parity property in floating point.
SecretKey keygen(const std::array<std::uint64_t, 4>& seed, std::size_t l, std::size_t n);
SecretKey keygen(std::uint64_t seed, std::size_t l, std::size_t n);

inline constexpr double kConditionCap = 1e4;
inline constexpr int kKeygenMaxAttempts = 64;

Matrix encrypt_pat(const Matrix& m, const SecretKey& key);  // e_a * m
Matrix decrypt_pat(const Matrix& m, const SecretKey& key);  // e_a_inv * m
Matrix encrypt_pos(const Matrix& m, const SecretKey& key);  // e_b * m (row permute, exact)
Matrix decrypt_pos(const Matrix& m, const SecretKey& key);  // e_b^T * m (inverse permute, exact)

/// Encrypt/decrypt the two embedding fields of a model or gradient; every
/// other field is copied verbatim and the domain flag is toggled.
/// Encrypting ciphertext (or decrypting plaintext) raises DomainMixError.
ModelParams encrypt_model(const ModelParams& params, const SecretKey& key);
ModelParams decrypt_model(const ModelParams& params, const SecretKey& key);
GradientUpdate encrypt_grad(const GradientUpdate& grad, const SecretKey& key);
GradientUpdate decrypt_grad(const GradientUpdate& grad, const SecretKey& key);

/// Binary key file ("FVK1"): version, L, N, e_a, e_a_inv, perm, key_id.
/// Round-trips bit-exactly.
void save_key(const SecretKey& key, const std::string& path);
SecretKey load_key(const std::string& path);

}  // namespace fedvit
