#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedvit/matrix.hpp"

namespace fedvit {

/// Geometry of the embedding layer plus the surrogate head.
struct ModelConfig {
    std::size_t image_h = 32;
    std::size_t image_w = 32;
    std::size_t channels = 3;
    std::size_t patch_size = 8;
    std::size_t embed_dim = 32;
    std::size_t num_classes = 10;
    std::size_t hidden_dim = 64;

    std::size_t patch_len() const { return patch_size * patch_size * channels; }
    std::size_t num_patches() const { return (image_w / patch_size) * (image_h / patch_size); }
    std::size_t flat_len() const { return (num_patches() + 1) * embed_dim; }

    /// Throws ConfigError unless the patch grid tiles the image exactly and
    /// the head is wide enough for per-position gradients to stay full rank.
    void validate() const;

    bool operator==(const ModelConfig&) const = default;
};

struct Sample {
    std::size_t h = 0, w = 0, c = 0;
    std::vector<double> pixels;  // y-major, then x, channel fastest
    std::uint32_t label = 0;

    double at(std::size_t y, std::size_t x, std::size_t ch) const {
        return pixels[(y * w + x) * c + ch];
    }
    double& at(std::size_t y, std::size_t x, std::size_t ch) {
        return pixels[(y * w + x) * c + ch];
    }
};

/// Embedding-layer parameters plus the surrogate head. Only e_pat and
/// e_pos ever live in cipher space; the head stays plaintext.
struct ModelParams {
    Matrix e_pat;    // L x D
    Matrix e_pos;    // (N+1) x D
    Matrix x_class;  // 1 x D
    Matrix head_w1;  // (N+1)*D x H_h
    Matrix head_b1;  // 1 x H_h
    Matrix head_w2;  // H_h x K
    Matrix head_b2;  // 1 x K
    bool encrypted = false;
};

/// Per-layer gradients, shapes mirroring ModelParams.
struct GradientUpdate {
    Matrix g_pat;
    Matrix g_pos;
    Matrix g_class;
    Matrix g_head_w1;
    Matrix g_head_b1;
    Matrix g_head_w2;
    Matrix g_head_b2;
    std::uint32_t round = 0;
    std::uint32_t client_id = 0;
    bool encrypted = false;
};

/// Fresh plaintext parameters: weights standard-normal * 0.02, biases zero.
ModelParams init_params(const ModelConfig& cfg, Rng& rng);

/// Zero gradient with shapes from cfg.
GradientUpdate zero_gradient(const ModelConfig& cfg);

/// Split the image into N flattened patches (row i = i-th patch in raster
/// order; within a patch, pixel raster order with channel fastest).
Matrix patchify(const Sample& sample, const ModelConfig& cfg);

/// Z0: row 0 = class token + position row 0; row i = patches[i-1] * E_pat
/// + position row i. Requires plaintext params.
Matrix embed(const Matrix& patches, const ModelParams& params);

/// Everything backward() needs, captured by forward_loss().
struct ForwardCache {
    Matrix patches;  // N x L
    Matrix z;        // (N+1) x D
    Matrix flat;     // 1 x (N+1)*D
    Matrix hidden;   // 1 x H_h
    Matrix probs;    // 1 x K
    std::uint32_t label = 0;
    double loss = 0.0;
};

/// Flatten Z0 -> tanh MLP -> softmax cross-entropy against the label.
ForwardCache forward_loss(const Sample& sample, const ModelParams& params, const ModelConfig& cfg);

/// Analytic gradients of the loss w.r.t. every parameter.
GradientUpdate backward(const ForwardCache& cache, const ModelParams& params);

/// params - lr * grad across every field; flags must match.
ModelParams apply_sgd(const ModelParams& params, const GradientUpdate& grad, double lr);

/// Mean loss and mean gradient over a batch (FedSGD client step).
struct BatchGradient {
    GradientUpdate grad;
    double mean_loss = 0.0;
};
BatchGradient batch_gradient(const ModelParams& params, const ModelConfig& cfg,
                             std::span<const Sample> batch);

/// Predicted class = argmax logit (first index wins ties).
std::uint32_t predict(const ModelParams& params, const ModelConfig& cfg, const Sample& sample);

/// Fraction of correctly classified samples.
double evaluate_accuracy(const ModelParams& params, const ModelConfig& cfg,
                         std::span<const Sample> samples);

/// Sum/scale helpers used by aggregation; flags must agree.
GradientUpdate grad_sum(const std::vector<GradientUpdate>& grads);
GradientUpdate grad_scaled(const GradientUpdate& g, double s);

}  // namespace fedvit
