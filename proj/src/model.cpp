#include "fedvit/model.hpp"

#include <cmath>
#include <string>

#include "fedvit/errors.hpp"

namespace fedvit {

void ModelConfig::validate() const {
    if (image_h == 0 || image_w == 0 || channels == 0 || patch_size == 0 || embed_dim == 0 ||
        num_classes < 2 || hidden_dim == 0) {
        throw ConfigError("ModelConfig: all dimensions must be positive (num_classes >= 2)");
    }
    if (image_h % patch_size != 0 || image_w % patch_size != 0) {
        throw ConfigError("ModelConfig: patch_size " + std::to_string(patch_size) +
                          " must tile image " + std::to_string(image_w) + "x" + std::to_string(image_h));
    }
    if (hidden_dim < 4 * num_patches()) {
        throw ConfigError("ModelConfig: hidden_dim must be >= 4*N = " +
                          std::to_string(4 * num_patches()));
    }
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    const double scale = 0.02;
    const std::size_t l = cfg.patch_len();
    const std::size_t n = cfg.num_patches();
    const std::size_t d = cfg.embed_dim;
    ModelParams p;
    p.e_pat = scaled(rng_matrix(rng, l, d, Distribution::StandardNormal), scale);
    p.e_pos = scaled(rng_matrix(rng, n + 1, d, Distribution::StandardNormal), scale);
    p.x_class = scaled(rng_matrix(rng, 1, d, Distribution::StandardNormal), scale);
    p.head_w1 = scaled(rng_matrix(rng, cfg.flat_len(), cfg.hidden_dim, Distribution::StandardNormal), scale);
    p.head_b1 = Matrix(1, cfg.hidden_dim);
    p.head_w2 = scaled(rng_matrix(rng, cfg.hidden_dim, cfg.num_classes, Distribution::StandardNormal), scale);
    p.head_b2 = Matrix(1, cfg.num_classes);
    p.encrypted = false;
    return p;
}

GradientUpdate zero_gradient(const ModelConfig& cfg) {
    GradientUpdate g;
    g.g_pat = Matrix(cfg.patch_len(), cfg.embed_dim);
    g.g_pos = Matrix(cfg.num_patches() + 1, cfg.embed_dim);
    g.g_class = Matrix(1, cfg.embed_dim);
    g.g_head_w1 = Matrix(cfg.flat_len(), cfg.hidden_dim);
    g.g_head_b1 = Matrix(1, cfg.hidden_dim);
    g.g_head_w2 = Matrix(cfg.hidden_dim, cfg.num_classes);
    g.g_head_b2 = Matrix(1, cfg.num_classes);
    return g;
}

Matrix patchify(const Sample& sample, const ModelConfig& cfg) {
    if (sample.h != cfg.image_h || sample.w != cfg.image_w || sample.c != cfg.channels) {
        throw ShapeError("patchify: sample " + std::to_string(sample.w) + "x" + std::to_string(sample.h) +
                         "x" + std::to_string(sample.c) + " does not match config");
    }
    const std::size_t p = cfg.patch_size;
    const std::size_t px_count = cfg.image_w / p;
    Matrix out(cfg.num_patches(), cfg.patch_len());
    for (std::size_t py = 0; py < cfg.image_h / p; ++py) {
        for (std::size_t px = 0; px < px_count; ++px) {
            double* row = out.row(py * px_count + px);
            std::size_t k = 0;
            for (std::size_t dy = 0; dy < p; ++dy)
                for (std::size_t dx = 0; dx < p; ++dx)
                    for (std::size_t ch = 0; ch < cfg.channels; ++ch)
                        row[k++] = sample.at(py * p + dy, px * p + dx, ch);
        }
    }
    return out;
}

Matrix embed(const Matrix& patches, const ModelParams& params) {
    if (params.encrypted) {
        throw DomainMixError("embed: forward pass on encrypted parameters");
    }
    const std::size_t n = patches.rows;
    const std::size_t d = params.e_pat.cols;
    if (patches.cols != params.e_pat.rows) {
        throw ShapeError("embed: patch length " + std::to_string(patches.cols) + " != e_pat rows " +
                         std::to_string(params.e_pat.rows));
    }
    if (params.e_pos.rows != n + 1) {
        throw ShapeError("embed: e_pos rows " + std::to_string(params.e_pos.rows) + " != N+1 = " +
                         std::to_string(n + 1));
    }
    const Matrix projected = matmul(patches, params.e_pat);  // N x D
    Matrix z(n + 1, d);
    for (std::size_t j = 0; j < d; ++j) z(0, j) = params.x_class(0, j) + params.e_pos(0, j);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) z(i + 1, j) = projected(i, j) + params.e_pos(i + 1, j);
    return z;
}

ForwardCache forward_loss(const Sample& sample, const ModelParams& params, const ModelConfig& cfg) {
    if (params.encrypted) {
        throw DomainMixError("forward_loss: forward pass on encrypted parameters");
    }
    ForwardCache cache;
    cache.patches = patchify(sample, cfg);
    cache.z = embed(cache.patches, params);

    cache.flat = Matrix(1, cfg.flat_len());
    std::copy(cache.z.data.begin(), cache.z.data.end(), cache.flat.data.begin());

    Matrix pre = matmul(cache.flat, params.head_w1);
    for (std::size_t j = 0; j < pre.cols; ++j) pre(0, j) += params.head_b1(0, j);
    cache.hidden = pre;
    for (double& v : cache.hidden.data) v = std::tanh(v);

    Matrix logits = matmul(cache.hidden, params.head_w2);
    for (std::size_t j = 0; j < logits.cols; ++j) logits(0, j) += params.head_b2(0, j);

    // softmax cross-entropy with max shift
    double mx = logits(0, 0);
    for (double v : logits.data) mx = std::max(mx, v);
    double sum = 0.0;
    cache.probs = Matrix(1, logits.cols);
    for (std::size_t j = 0; j < logits.cols; ++j) {
        cache.probs(0, j) = std::exp(logits(0, j) - mx);
        sum += cache.probs(0, j);
    }
    for (double& v : cache.probs.data) v /= sum;

    if (sample.label >= cfg.num_classes) {
        throw ShapeError("forward_loss: label " + std::to_string(sample.label) + " out of range");
    }
    cache.label = sample.label;
    cache.loss = std::log(sum) + mx - logits(0, sample.label);
    if (!std::isfinite(cache.loss)) {
        throw NumericError("forward_loss: non-finite loss (exploded parameters?)");
    }
    return cache;
}

GradientUpdate backward(const ForwardCache& cache, const ModelParams& params) {
    const std::size_t n = cache.patches.rows;
    const std::size_t d = params.e_pat.cols;

    Matrix dlogits = cache.probs;  // 1 x K
    dlogits(0, cache.label) -= 1.0;

    GradientUpdate g;
    g.g_head_b2 = dlogits;
    g.g_head_w2 = matmul(transpose(cache.hidden), dlogits);

    Matrix dhidden = matmul(dlogits, transpose(params.head_w2));  // 1 x H_h
    for (std::size_t j = 0; j < dhidden.cols; ++j) {
        const double h = cache.hidden(0, j);
        dhidden(0, j) *= 1.0 - h * h;
    }
    g.g_head_b1 = dhidden;
    g.g_head_w1 = matmul(transpose(cache.flat), dhidden);

    const Matrix dflat = matmul(dhidden, transpose(params.head_w1));  // 1 x (N+1)*D

    // Z0 adds E_pos term-wise, so g_pos is exactly dloss/dZ0.
    g.g_pos = Matrix(n + 1, d);
    std::copy(dflat.data.begin(), dflat.data.end(), g.g_pos.data.begin());

    g.g_class = Matrix(1, d);
    for (std::size_t j = 0; j < d; ++j) g.g_class(0, j) = g.g_pos(0, j);

    // g_pat = sum_i patches_i^T * (dloss/dZ0 row i+1)
    g.g_pat = Matrix(params.e_pat.rows, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* prow = cache.patches.row(i);
        const double* zrow = g.g_pos.row(i + 1);
        for (std::size_t l = 0; l < cache.patches.cols; ++l) {
            const double pv = prow[l];
            if (pv == 0.0) continue;
            double* grow = g.g_pat.row(l);
            for (std::size_t j = 0; j < d; ++j) grow[j] += pv * zrow[j];
        }
    }
    return g;
}

namespace {

void require_match(const Matrix& a, const Matrix& b, const char* field) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string("apply_sgd: shape mismatch on ") + field);
    }
}

}  // namespace

ModelParams apply_sgd(const ModelParams& params, const GradientUpdate& grad, double lr) {
    if (params.encrypted != grad.encrypted) {
        throw DomainMixError("apply_sgd: cannot mix plaintext and ciphertext domains");
    }
    require_match(params.e_pat, grad.g_pat, "e_pat");
    require_match(params.e_pos, grad.g_pos, "e_pos");
    require_match(params.x_class, grad.g_class, "x_class");
    require_match(params.head_w1, grad.g_head_w1, "head_w1");
    require_match(params.head_b1, grad.g_head_b1, "head_b1");
    require_match(params.head_w2, grad.g_head_w2, "head_w2");
    require_match(params.head_b2, grad.g_head_b2, "head_b2");
    ModelParams out = params;
    axpy_inplace(out.e_pat, -lr, grad.g_pat);
    axpy_inplace(out.e_pos, -lr, grad.g_pos);
    axpy_inplace(out.x_class, -lr, grad.g_class);
    axpy_inplace(out.head_w1, -lr, grad.g_head_w1);
    axpy_inplace(out.head_b1, -lr, grad.g_head_b1);
    axpy_inplace(out.head_w2, -lr, grad.g_head_w2);
    axpy_inplace(out.head_b2, -lr, grad.g_head_b2);
    return out;
}

BatchGradient batch_gradient(const ModelParams& params, const ModelConfig& cfg,
                             std::span<const Sample> batch) {
    if (batch.empty()) throw ShapeError("batch_gradient: empty batch");
    BatchGradient out;
    out.grad = zero_gradient(cfg);
    for (const Sample& s : batch) {
        const ForwardCache cache = forward_loss(s, params, cfg);
        const GradientUpdate g = backward(cache, params);
        axpy_inplace(out.grad.g_pat, 1.0, g.g_pat);
        axpy_inplace(out.grad.g_pos, 1.0, g.g_pos);
        axpy_inplace(out.grad.g_class, 1.0, g.g_class);
        axpy_inplace(out.grad.g_head_w1, 1.0, g.g_head_w1);
        axpy_inplace(out.grad.g_head_b1, 1.0, g.g_head_b1);
        axpy_inplace(out.grad.g_head_w2, 1.0, g.g_head_w2);
        axpy_inplace(out.grad.g_head_b2, 1.0, g.g_head_b2);
        out.mean_loss += cache.loss;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    out.grad = grad_scaled(out.grad, inv);
    out.mean_loss *= inv;
    return out;
}

std::uint32_t predict(const ModelParams& params, const ModelConfig& cfg, const Sample& sample) {
    const ForwardCache cache = forward_loss(sample, params, cfg);
    std::uint32_t best = 0;
    for (std::uint32_t j = 1; j < cache.probs.cols; ++j) {
        if (cache.probs(0, j) > cache.probs(0, best)) best = j;
    }
    return best;
}

double evaluate_accuracy(const ModelParams& params, const ModelConfig& cfg,
                         std::span<const Sample> samples) {
    if (samples.empty()) throw ShapeError("evaluate_accuracy: empty sample set");
    std::size_t correct = 0;
    for (const Sample& s : samples) {
        if (predict(params, cfg, s) == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

GradientUpdate grad_sum(const std::vector<GradientUpdate>& grads) {
    if (grads.empty()) throw ShapeError("grad_sum: no gradients");
    GradientUpdate out = grads.front();
    for (std::size_t i = 1; i < grads.size(); ++i) {
        if (grads[i].encrypted != out.encrypted) {
            throw DomainMixError("grad_sum: mixed plaintext/ciphertext gradients");
        }
        axpy_inplace(out.g_pat, 1.0, grads[i].g_pat);
        axpy_inplace(out.g_pos, 1.0, grads[i].g_pos);
        axpy_inplace(out.g_class, 1.0, grads[i].g_class);
        axpy_inplace(out.g_head_w1, 1.0, grads[i].g_head_w1);
        axpy_inplace(out.g_head_b1, 1.0, grads[i].g_head_b1);
        axpy_inplace(out.g_head_w2, 1.0, grads[i].g_head_w2);
        axpy_inplace(out.g_head_b2, 1.0, grads[i].g_head_b2);
    }
    return out;
}

GradientUpdate grad_scaled(const GradientUpdate& g, double s) {
    GradientUpdate out = g;
    out.g_pat = scaled(g.g_pat, s);
    out.g_pos = scaled(g.g_pos, s);
    out.g_class = scaled(g.g_class, s);
    out.g_head_w1 = scaled(g.g_head_w1, s);
    out.g_head_b1 = scaled(g.g_head_b1, s);
    out.g_head_w2 = scaled(g.g_head_w2, s);
    out.g_head_b2 = scaled(g.g_head_b2, s);
    return out;
}

}  // namespace fedvit
