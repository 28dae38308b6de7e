#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "fedvit/matrix.hpp"
#include "fedvit/model.hpp"
#include "fedvit/rng.hpp"

namespace fedvit::test {

inline Matrix random_matrix(std::uint64_t seed, std::size_t rows, std::size_t cols) {
    Rng rng(seed);
    return rng_matrix(rng, rows, cols, Distribution::StandardNormal);
}

/// Independent triple-loop product, the matmul oracle.
inline Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

inline double rel_diff(double a, double b) {
    const double denom = std::max(std::fabs(a), std::fabs(b));
    return denom == 0.0 ? 0.0 : std::fabs(a - b) / denom;
}

inline double max_rel_diff(const Matrix& a, const Matrix& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, rel_diff(a.data[i], b.data[i]));
    return m;
}

/// Small config used by gradient and attack unit tests (N=4, L=16, D=8).
inline ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.image_h = 8;
    cfg.image_w = 8;
    cfg.channels = 1;
    cfg.patch_size = 4;
    cfg.embed_dim = 8;
    cfg.num_classes = 3;
    cfg.hidden_dim = 16;
    return cfg;
}

/// Desk-scale default config (N=16, L=192, D=32).
inline ModelConfig default_config() { return ModelConfig{}; }

inline Sample random_sample(std::uint64_t seed, const ModelConfig& cfg) {
    Rng rng(seed);
    Sample s;
    s.h = cfg.image_h;
    s.w = cfg.image_w;
    s.c = cfg.channels;
    s.label = static_cast<std::uint32_t>(rng.below(cfg.num_classes));
    s.pixels.resize(cfg.image_h * cfg.image_w * cfg.channels);
    for (double& v : s.pixels) v = rng.uniform01();
    return s;
}

}  // namespace fedvit::test
