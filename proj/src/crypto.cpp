#include "fedvit/crypto.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "fedvit/errors.hpp"
#include "fedvit/serialize.hpp"

namespace fedvit {

namespace {

constexpr char kKeyMagic[4] = {'F', 'V', 'K', '1'};

// Largest singular value via power iteration on m^T m, deterministic
// all-ones start. 48 iterations is plenty for a factor-2 estimate, and the
// cap check only needs the order of magnitude.
double spectral_norm_estimate(const Matrix& m) {
    std::vector<double> v(m.cols, 1.0 / std::sqrt(static_cast<double>(m.cols)));
    std::vector<double> mv(m.rows), w(m.cols);
    double norm = 0.0;
    for (int it = 0; it < 48; ++it) {
        for (std::size_t i = 0; i < m.rows; ++i) {
            const double* row = m.row(i);
            double s = 0.0;
            for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * v[j];
            mv[i] = s;
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t i = 0; i < m.rows; ++i) {
            const double* row = m.row(i);
            const double s = mv[i];
            for (std::size_t j = 0; j < m.cols; ++j) w[j] += row[j] * s;
        }
        norm = 0.0;
        for (double x : w) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) return 0.0;
        for (std::size_t j = 0; j < m.cols; ++j) v[j] = w[j] / norm;
    }
    return std::sqrt(norm);  // sqrt of top eigenvalue of m^T m
}

std::uint64_t fingerprint(const std::array<std::uint64_t, 4>& seed, std::size_t l, std::size_t n) {
    std::uint64_t h = 0x46564B31ull;  // "FVK1"
    for (std::uint64_t w : seed) {
        h ^= w;
        h = splitmix64(h);
    }
    h ^= static_cast<std::uint64_t>(l) << 32 | static_cast<std::uint64_t>(n);
    return splitmix64(h);
}

void check_pat_shape(const Matrix& m, const SecretKey& key, const char* op) {
    if (m.rows != key.patch_len()) {
        throw ShapeError(std::string(op) + ": matrix has " + std::to_string(m.rows) +
                         " rows, key expects L = " + std::to_string(key.patch_len()));
    }
}

void check_pos_shape(const Matrix& m, const SecretKey& key, const char* op) {
    if (m.rows != key.num_patches() + 1) {
        throw ShapeError(std::string(op) + ": matrix has " + std::to_string(m.rows) +
                         " rows, key expects N+1 = " + std::to_string(key.num_patches() + 1));
    }
}

}  // namespace

Matrix permutation_matrix(const std::vector<std::uint32_t>& perm) {
    const std::size_t n = perm.size();
    Matrix e_b(n + 1, n + 1);
    e_b(0, 0) = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (perm[i] < 1 || perm[i] > n) {
            throw FormatError("permutation value " + std::to_string(perm[i]) + " out of range 1.." +
                              std::to_string(n));
        }
        e_b(i + 1, perm[i]) = 1.0;
    }
    return e_b;
}

double condition_estimate(const Matrix& a, const Matrix& a_inv) {
    return spectral_norm_estimate(a) * spectral_norm_estimate(a_inv);
}

SecretKey SecretKey::identity(std::size_t l, std::size_t n) {
    SecretKey key;
    key.e_a = Matrix::identity(l);
    key.e_a_inv = Matrix::identity(l);
    key.perm.resize(n);
    for (std::size_t i = 0; i < n; ++i) key.perm[i] = static_cast<std::uint32_t>(i + 1);
    key.e_b = permutation_matrix(key.perm);
    key.key_id = 0;
    return key;
}

SecretKey keygen(const std::array<std::uint64_t, 4>& seed, std::size_t l, std::size_t n) {
    if (l < 1 || n < 1) throw ConfigError("keygen: L and N must be >= 1");
    const Rng root(seed);
    const Rng key_root = root.stream("key");

    SecretKey key;
    bool accepted = false;
    for (int attempt = 0; attempt < kKeygenMaxAttempts; ++attempt) {
        Rng draw = key_root.stream("e_a." + std::to_string(attempt));
        Matrix candidate = rng_matrix(draw, l, l, Distribution::StandardNormal);
        Matrix inverse;
        try {
            inverse = invert(candidate);
        } catch (const SingularMatrixError&) {
            continue;  // numerically singular draw, try the next sub-seed
        }
        if (condition_estimate(candidate, inverse) <= kConditionCap) {
            key.e_a = std::move(candidate);
            key.e_a_inv = std::move(inverse);
            accepted = true;
            break;
        }
    }
    if (!accepted) {
        throw KeyGenError("keygen: no acceptable e_a after " + std::to_string(kKeygenMaxAttempts) +
                          " attempts");
    }

    Rng perm_rng = key_root.stream("perm");
    key.perm = rng_permutation(perm_rng, n);
    key.e_b = permutation_matrix(key.perm);
    key.key_id = fingerprint(seed, l, n);
    return key;
}

SecretKey keygen(std::uint64_t seed, std::size_t l, std::size_t n) {
    return keygen(Rng(seed).seed_words(), l, n);
}

Matrix encrypt_pat(const Matrix& m, const SecretKey& key) {
    check_pat_shape(m, key, "encrypt_pat");
    return matmul(key.e_a, m);
}

Matrix decrypt_pat(const Matrix& m, const SecretKey& key) {
    check_pat_shape(m, key, "decrypt_pat");
    return matmul(key.e_a_inv, m);
}

Matrix encrypt_pos(const Matrix& m, const SecretKey& key) {
    check_pos_shape(m, key, "encrypt_pos");
    // Row moves instead of a matmul: exact and cheap. Row i of e_b * m is
    // m row perm[i-1]; row 0 never moves.
    Matrix out(m.rows, m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) out(0, j) = m(0, j);
    for (std::size_t i = 0; i < key.num_patches(); ++i) {
        const double* src = m.row(key.perm[i]);
        double* dst = out.row(i + 1);
        std::copy(src, src + m.cols, dst);
    }
    return out;
}

Matrix decrypt_pos(const Matrix& m, const SecretKey& key) {
    check_pos_shape(m, key, "decrypt_pos");
    Matrix out(m.rows, m.cols);
    for (std::size_t j = 0; j < m.cols; ++j) out(0, j) = m(0, j);
    for (std::size_t i = 0; i < key.num_patches(); ++i) {
        const double* src = m.row(i + 1);
        double* dst = out.row(key.perm[i]);
        std::copy(src, src + m.cols, dst);
    }
    return out;
}

ModelParams encrypt_model(const ModelParams& params, const SecretKey& key) {
    if (params.encrypted) throw DomainMixError("encrypt_model: parameters already encrypted");
    ModelParams out = params;
    out.e_pat = encrypt_pat(params.e_pat, key);
    out.e_pos = encrypt_pos(params.e_pos, key);
    out.encrypted = true;
    return out;
}

ModelParams decrypt_model(const ModelParams& params, const SecretKey& key) {
    if (!params.encrypted) throw DomainMixError("decrypt_model: parameters are not encrypted");
    ModelParams out = params;
    out.e_pat = decrypt_pat(params.e_pat, key);
    out.e_pos = decrypt_pos(params.e_pos, key);
    out.encrypted = false;
    return out;
}

GradientUpdate encrypt_grad(const GradientUpdate& grad, const SecretKey& key) {
    if (grad.encrypted) throw DomainMixError("encrypt_grad: gradients already encrypted");
    GradientUpdate out = grad;
    out.g_pat = encrypt_pat(grad.g_pat, key);
    out.g_pos = encrypt_pos(grad.g_pos, key);
    out.encrypted = true;
    return out;
}

GradientUpdate decrypt_grad(const GradientUpdate& grad, const SecretKey& key) {
    if (!grad.encrypted) throw DomainMixError("decrypt_grad: gradients are not encrypted");
    GradientUpdate out = grad;
    out.g_pat = decrypt_pat(grad.g_pat, key);
    out.g_pos = decrypt_pos(grad.g_pos, key);
    out.encrypted = false;
    return out;
}

void save_key(const SecretKey& key, const std::string& path) {
    ByteWriter w;
    w.bytes(kKeyMagic, 4);
    w.u8(1);
    w.u32(static_cast<std::uint32_t>(key.patch_len()));
    w.u32(static_cast<std::uint32_t>(key.num_patches()));
    w.bytes(key.e_a.data.data(), key.e_a.data.size() * sizeof(double));
    w.bytes(key.e_a_inv.data.data(), key.e_a_inv.data.size() * sizeof(double));
    for (std::uint32_t v : key.perm) w.u32(v);
    w.u64(key.key_id);
    write_file(path, w.data());
}

SecretKey load_key(const std::string& path) {
    const auto bytes = read_file(path);
    ByteReader r(bytes);
    char magic[4];
    try {
        r.raw(magic, 4);
        if (std::memcmp(magic, kKeyMagic, 4) != 0) {
            throw FormatError("not a key file (bad magic): " + path);
        }
        const std::uint8_t version = r.u8();
        if (version != 1) {
            throw UnsupportedVersionError("key file version " + std::to_string(version) +
                                          " not supported");
        }
        const std::uint32_t l = r.u32();
        const std::uint32_t n = r.u32();
        if (l == 0 || n == 0) throw FormatError("key file with zero dimensions");
        SecretKey key;
        key.e_a = Matrix(l, l);
        r.raw(key.e_a.data.data(), key.e_a.data.size() * sizeof(double));
        key.e_a_inv = Matrix(l, l);
        r.raw(key.e_a_inv.data.data(), key.e_a_inv.data.size() * sizeof(double));
        key.perm.resize(n);
        for (auto& v : key.perm) v = r.u32();
        key.key_id = r.u64();
        if (r.remaining() != 0) throw FormatError("trailing bytes in key file: " + path);
        key.e_b = permutation_matrix(key.perm);
        return key;
    } catch (const IncompleteFrameError&) {
        throw FormatError("key file truncated: " + path);
    }
}

}  // namespace fedvit
