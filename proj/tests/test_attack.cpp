#include <doctest.h>

#include <cmath>

#include "fedvit/attack.hpp"
#include "fedvit/data_io.hpp"
#include "fedvit/errors.hpp"
#include "test_helpers.hpp"

using namespace fedvit;
using namespace fedvit::test;

TEST_SUITE_BEGIN("attack");

TEST_CASE("leakage identity: patches^T g_pos rows equal g_pat") {
    // The backward identity the attack inverts.
    const ModelConfig cfg = default_config();
    Rng rng(80);
    const ModelParams p = init_params(cfg, rng);
    const Sample s = random_sample(81, cfg);
    const ForwardCache cache = forward_loss(s, p, cfg);
    const GradientUpdate g = backward(cache, p);

    Matrix recomputed(cfg.patch_len(), cfg.embed_dim);
    for (std::size_t i = 0; i < cfg.num_patches(); ++i)
        for (std::size_t l = 0; l < cfg.patch_len(); ++l)
            for (std::size_t j = 0; j < cfg.embed_dim; ++j)
                recomputed(l, j) += cache.patches(i, l) * g.g_pos(i + 1, j);
    CHECK(max_abs_diff(recomputed, g.g_pat) <= 1e-10);
}

TEST_CASE("plain gradients reconstruct the image exactly") {
    const ModelConfig cfg = default_config();
    Rng rng(82);
    const ModelParams p = init_params(cfg, rng);
    const Dataset ds = synth_generate(83, 4, cfg, cfg.num_classes);
    const Sample& s = ds.samples[2];
    const GradientUpdate g = backward(forward_loss(s, p, cfg), p);

    const AttackInput input{g.g_pat, g.g_pos, false, cfg};
    const ReconstructedPatches rec = reconstruct_patches(input);
    CHECK(rec.rank_used == cfg.num_patches());
    CHECK(max_abs_diff(rec.patches, patchify(s, cfg)) <= 1e-6);

    const Sample img = unpatchify(rec.patches, cfg, s.label);
    double worst = 0.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        worst = std::max(worst, std::fabs(img.pixels[i] - s.pixels[i]));
    CHECK(worst <= 1e-6);
}

TEST_CASE("zero g_pat with full-rank G reconstructs zero") {
    const ModelConfig cfg = default_config();
    Rng rng(84);
    const ModelParams p = init_params(cfg, rng);
    const Sample s = random_sample(85, cfg);
    GradientUpdate g = backward(forward_loss(s, p, cfg), p);
    g.g_pat = Matrix(cfg.patch_len(), cfg.embed_dim);  // zero rhs
    const ReconstructedPatches rec = reconstruct_patches({g.g_pat, g.g_pos, false, cfg});
    CHECK(max_abs(rec.patches) <= 1e-12);
}

TEST_CASE("rank-deficient gradients are inconclusive, not a crash") {
    const ModelConfig cfg = default_config();
    Rng rng(86);
    const ModelParams p = init_params(cfg, rng);
    const Sample s = random_sample(87, cfg);
    GradientUpdate g = backward(forward_loss(s, p, cfg), p);
    // wipe the per-position signal
    g.g_pos = Matrix(cfg.num_patches() + 1, cfg.embed_dim);
    CHECK_THROWS_AS(reconstruct_patches({g.g_pat, g.g_pos, false, cfg}), RankDeficiencyError);

    const AttackCase c = attack_gradients(g.g_pat, g.g_pos, cfg, false, s);
    CHECK_FALSE(c.metrics.has_value());
    CHECK(c.rank_reported < cfg.num_patches());
}

TEST_CASE("unpatchify inverts patchify bit-exactly") {
    const ModelConfig cfg = default_config();
    const Sample s = random_sample(88, cfg);
    const Sample back = unpatchify(patchify(s, cfg), cfg, s.label);
    CHECK(back.pixels == s.pixels);
}

TEST_CASE("unpatchify single-patch config reshapes the row") {
    ModelConfig cfg;
    cfg.image_h = 2;
    cfg.image_w = 2;
    cfg.channels = 1;
    cfg.patch_size = 2;
    cfg.embed_dim = 4;
    cfg.num_classes = 2;
    cfg.hidden_dim = 4;
    Matrix row(1, 4);
    row.data = {0.1, 0.2, 0.3, 0.4};
    const Sample s = unpatchify(row, cfg);
    CHECK(s.pixels == std::vector<double>{0.1, 0.2, 0.3, 0.4});
}

TEST_CASE("constant patch rows give a constant image") {
    const ModelConfig cfg = tiny_config();
    const Matrix rows(cfg.num_patches(), cfg.patch_len(), 0.6);
    const Sample s = unpatchify(rows, cfg);
    for (double v : s.pixels) CHECK(v == 0.6);
}

TEST_CASE("psnr guards the zero-mse case as exact") {
    const ModelConfig cfg = tiny_config();
    const Sample s = random_sample(89, cfg);
    const AttackMetrics m = score_reconstruction(s, s, cfg.num_patches());
    CHECK(m.exact);
    CHECK(std::isinf(m.psnr));
    CHECK(m.mse == 0.0);
}

TEST_CASE("full report: plain succeeds, ciphertext fails, key restores") {
    const ModelConfig cfg = default_config();
    Rng rng(90);
    const ModelParams p = init_params(cfg, rng);
    const SecretKey key = keygen(91, cfg.patch_len(), cfg.num_patches());
    const Dataset ds = synth_generate(92, 6, cfg, cfg.num_classes);
    const AttackReport report = evaluate_attack(p, cfg, key, ds.samples[1]);

    REQUIRE(report.plain.metrics.has_value());
    CHECK(report.plain.metrics->max_abs_err <= 1e-6);
    CHECK(report.plain.metrics->psnr >= 80.0);

    REQUIRE(report.encrypted.metrics.has_value());
    CHECK(report.encrypted.metrics->psnr <= report.baseline.psnr + 3.0);

    REQUIRE(report.decrypted.metrics.has_value());
    CHECK(report.decrypted.metrics->max_abs_err <= 1e-6);
    CHECK(report.decrypted.metrics->psnr >= 80.0);
}

TEST_CASE("attack refuses gradients whose shape disagrees with the config") {
    const ModelConfig cfg = default_config();
    CHECK_THROWS_AS(
        reconstruct_patches({Matrix(3, 3), Matrix(cfg.num_patches() + 1, cfg.embed_dim), false, cfg}),
        ShapeError);
}

TEST_SUITE_END();
