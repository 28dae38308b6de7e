#include "fedvit/attack.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fedvit/errors.hpp"

namespace fedvit {

namespace {

Sample clamp01_pixels(Sample s) {
    for (double& v : s.pixels) v = std::min(1.0, std::max(0.0, v));
    return s;
}

}  // namespace

ReconstructedPatches reconstruct_patches(const AttackInput& input) {
    const std::size_t n = input.cfg.num_patches();
    const std::size_t l = input.cfg.patch_len();
    const std::size_t d = input.cfg.embed_dim;
    if (input.g_pat.rows != l || input.g_pat.cols != d) {
        throw ShapeError("reconstruct_patches: g_pat is " + std::to_string(input.g_pat.rows) + "x" +
                         std::to_string(input.g_pat.cols) + ", config expects " + std::to_string(l) +
                         "x" + std::to_string(d));
    }
    if (input.g_pos.rows != n + 1 || input.g_pos.cols != d) {
        throw ShapeError("reconstruct_patches: g_pos shape does not match config");
    }

    // G = g_pos rows 1..N: the per-position upstream gradients.
    Matrix g(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = input.g_pos.row(i + 1);
        std::copy(src, src + d, g.row(i));
    }
    ReconstructedPatches out;
    out.patches = solve_least_squares(g, input.g_pat);  // N x L
    out.rank_used = n;
    return out;
}

Sample unpatchify(const Matrix& patches, const ModelConfig& cfg, std::uint32_t label) {
    if (patches.rows != cfg.num_patches() || patches.cols != cfg.patch_len()) {
        throw ShapeError("unpatchify: patches are " + std::to_string(patches.rows) + "x" +
                         std::to_string(patches.cols) + ", config expects " +
                         std::to_string(cfg.num_patches()) + "x" + std::to_string(cfg.patch_len()));
    }
    Sample s;
    s.h = cfg.image_h;
    s.w = cfg.image_w;
    s.c = cfg.channels;
    s.label = label;
    s.pixels.resize(cfg.image_h * cfg.image_w * cfg.channels);
    const std::size_t p = cfg.patch_size;
    const std::size_t px_count = cfg.image_w / p;
    for (std::size_t py = 0; py < cfg.image_h / p; ++py) {
        for (std::size_t px = 0; px < px_count; ++px) {
            const double* row = patches.row(py * px_count + px);
            std::size_t k = 0;
            for (std::size_t dy = 0; dy < p; ++dy)
                for (std::size_t dx = 0; dx < p; ++dx)
                    for (std::size_t ch = 0; ch < cfg.channels; ++ch)
                        s.at(py * p + dy, px * p + dx, ch) = row[k++];
        }
    }
    return s;
}

double psnr_from_mse(double mse) {
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

AttackMetrics score_reconstruction(const Sample& reconstructed, const Sample& truth,
                                   std::size_t rank_used) {
    if (reconstructed.pixels.size() != truth.pixels.size()) {
        throw ShapeError("score_reconstruction: pixel counts differ");
    }
    AttackMetrics m;
    m.rank_used = rank_used;
    double sq = 0.0;
    for (std::size_t i = 0; i < truth.pixels.size(); ++i) {
        const double r = std::min(1.0, std::max(0.0, reconstructed.pixels[i]));
        const double diff = r - truth.pixels[i];
        m.max_abs_err = std::max(m.max_abs_err, std::fabs(diff));
        sq += diff * diff;
    }
    m.mse = sq / static_cast<double>(truth.pixels.size());
    m.exact = (m.mse == 0.0);
    m.psnr = psnr_from_mse(m.mse);
    return m;
}

AttackMetrics midgray_baseline(const Sample& truth) {
    Sample gray = truth;
    for (double& v : gray.pixels) v = 0.5;
    return score_reconstruction(gray, truth, 0);
}

AttackCase attack_gradients(const Matrix& g_pat, const Matrix& g_pos, const ModelConfig& cfg,
                            bool encrypted, const Sample& truth) {
    AttackCase out;
    AttackInput input{g_pat, g_pos, encrypted, cfg};
    try {
        const ReconstructedPatches rec = reconstruct_patches(input);
        Sample img = clamp01_pixels(unpatchify(rec.patches, cfg, truth.label));
        out.metrics = score_reconstruction(img, truth, rec.rank_used);
        out.reconstruction = std::move(img);
        out.rank_reported = rec.rank_used;
    } catch (const RankDeficiencyError& e) {
        out.rank_reported = e.rank;  // inconclusive, not a failure
    }
    return out;
}

AttackReport evaluate_attack(const ModelParams& params, const ModelConfig& cfg,
                             const SecretKey& key, const Sample& sample) {
    if (params.encrypted) {
        throw DomainMixError("evaluate_attack: needs plaintext params to form gradients");
    }
    const ForwardCache cache = forward_loss(sample, params, cfg);
    GradientUpdate grad = backward(cache, params);
    const GradientUpdate enc = encrypt_grad(grad, key);
    const GradientUpdate dec = decrypt_grad(enc, key);

    AttackReport report;
    report.plain = attack_gradients(grad.g_pat, grad.g_pos, cfg, false, sample);
    report.encrypted = attack_gradients(enc.g_pat, enc.g_pos, cfg, true, sample);
    report.decrypted = attack_gradients(dec.g_pat, dec.g_pos, cfg, false, sample);
    report.baseline = midgray_baseline(sample);
    return report;
}

}  // namespace fedvit
