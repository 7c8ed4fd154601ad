#include <gtest/gtest.h>

#include <cmath>

#include "fsrec/autoencoder.hpp"
#include "fsrec/gradcheck.hpp"
#include "fsrec/seq2seq.hpp"
#include "test_util.hpp"

using namespace fsrec;
using fsrec::num::Rng;
using fsrec::num::Tensor;
using fsrec::test::random_frames;
using fsrec::test::tiny_config;
using fsrec::test::tiny_params;

TEST(Encode, ZeroWeightsGiveZeroLatent) {
    nn::ModelParams params = tiny_params(nn::AeMode::Ae, 1);
    test::zero_params(params);
    Tensor frames = random_frames(3, 16, 7);
    Tensor z = nn::encode_features(params, frames);
    EXPECT_EQ(z.shape()[0], 3u);
    EXPECT_EQ(z.shape()[1], params.config.latent_dim);
    for (double v : z.values()) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(Encode, RejectsWrongInputWidth) {
    nn::ModelParams params = tiny_params(nn::AeMode::Ae, 1);
    EXPECT_THROW(nn::encode_features(params, random_frames(2, 9, 1)), std::invalid_argument);
}

TEST(Encode, VaeWithZeroEpsilonEqualsMean) {
    nn::ModelParams params = tiny_params(nn::AeMode::Vae, 3);
    Tensor frames = random_frames(2, 16, 8);
    num::Tape t;
    nn::TapeModel m = nn::TapeModel::leaf_all(t, params);
    Rng rng(5);
    Tensor zero_eps({2, params.config.latent_dim});
    nn::FeaturePipeline p =
        nn::build_features(t, m, params.config, frames, rng, false, true, &zero_eps);
    // the sequence features are the posterior mean
    EXPECT_TRUE(num::bitwise_equal(t.value(p.encode.mu), t.value(p.seq_features)));
    // and with eps = 0 the reparameterized sample equals the mean: the
    // reconstruction branch then sees mu itself, so rebuilding the decoder
    // on mu directly reproduces the loss bit for bit
    num::Tape t2;
    nn::TapeModel m2 = nn::TapeModel::leaf_all(t2, params);
    Rng rng2(5);
    nn::EncodeVars e = nn::build_encoder(t2, m2, params.config, t2.constant(frames), rng2, false);
    nn::DecodeVars d = nn::build_decoder(t2, m2, params.config, e.mu, rng2, false);
    num::Var recon = t2.scale(t2.squared_error(t2.constant(frames), d.mu_x), 0.5);
    num::Var kl = nn::build_kl(t2, e.mu, e.logvar);
    EXPECT_DOUBLE_EQ(t.value(p.ae_total)[0], t2.value(t2.add(kl, recon))[0]);
}

TEST(Encode, VaeInferenceIsDeterministic) {
    nn::ModelParams params = tiny_params(nn::AeMode::Vae, 4);
    Tensor frames = random_frames(3, 16, 9);
    Tensor a = nn::encode_features(params, frames);
    Tensor b = nn::encode_features(params, frames);
    EXPECT_TRUE(num::bitwise_equal(a, b));
}

TEST(AeLoss, Examples) {
    EXPECT_DOUBLE_EQ(nn::ae_loss(Tensor::vector({0.3, 0.7}), Tensor::vector({0.3, 0.7})), 0.0);
    EXPECT_DOUBLE_EQ(nn::ae_loss(Tensor::vector({1.0, 0.0}), Tensor::vector({0.0, 0.0})), 1.0);
    Tensor x = random_frames(1, 8, 3);
    Tensor y = random_frames(1, 8, 4);
    EXPECT_DOUBLE_EQ(nn::ae_loss(x, y), nn::ae_loss(y, x));
    EXPECT_GE(nn::ae_loss(x, y), 0.0);
    EXPECT_THROW(nn::ae_loss(Tensor::vector({1.0}), Tensor::vector({1.0, 2.0})), std::invalid_argument);
}

TEST(DaeCorrupt, MaskZeroIsIdentity) {
    Tensor x = random_frames(2, 16, 5);
    Tensor c = nn::dae_corrupt(x, {nn::CorruptionKind::Masking, 0.0}, Rng(1));
    EXPECT_TRUE(num::bitwise_equal(x, c));
}

TEST(DaeCorrupt, MaskFractionMonteCarlo) {
    Tensor x = Tensor::full({1000000}, 1.0);
    Tensor c = nn::dae_corrupt(x, {nn::CorruptionKind::Masking, 0.25}, Rng(11));
    std::size_t zeroed = 0;
    for (double v : c.values()) {
        if (v == 0.0) ++zeroed;
    }
    double frac = static_cast<double>(zeroed) / static_cast<double>(x.size());
    EXPECT_NEAR(frac, 0.25, 0.002);
}

TEST(DaeCorrupt, DeterministicPerSeed) {
    Tensor x = random_frames(2, 16, 6);
    Tensor a = nn::dae_corrupt(x, {nn::CorruptionKind::Masking, 0.4}, Rng(9));
    Tensor b = nn::dae_corrupt(x, {nn::CorruptionKind::Masking, 0.4}, Rng(9));
    EXPECT_TRUE(num::bitwise_equal(a, b));
}

TEST(DaeCorrupt, GaussianStaysInRange) {
    Tensor x = random_frames(4, 16, 6);
    Tensor c = nn::dae_corrupt(x, {nn::CorruptionKind::Gaussian, 0.3}, Rng(12));
    for (double v : c.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(DaeCorrupt, InvalidSpecRejected) {
    Tensor x = random_frames(1, 4, 1);
    EXPECT_THROW(nn::dae_corrupt(x, {nn::CorruptionKind::Masking, 1.0}, Rng(1)), std::invalid_argument);
    EXPECT_THROW(nn::dae_corrupt(x, {nn::CorruptionKind::Gaussian, -0.1}, Rng(1)), std::invalid_argument);
}

TEST(DaeLoss, ComparesReconstructionAgainstCleanInput) {
    // encoder/decoder zeroed: the reconstruction is exactly zero, so the
    // loss is ||x||^2 of the clean input, not of the corrupted one.
    nn::ModelParams params = tiny_params(nn::AeMode::Dae, 2);
    params.config.dae_strength = 0.5;
    test::zero_params(params);
    Tensor frames = random_frames(1, 16, 13);
    num::Tape t;
    nn::TapeModel m = nn::TapeModel::leaf_all(t, params);
    Rng rng(3);
    nn::FeaturePipeline p = nn::build_features(t, m, params.config, frames, rng, false, true);
    double expected = nn::ae_loss(frames, Tensor::zeros({1, 16}));
    EXPECT_NEAR(t.value(p.ae_total)[0], expected, 1e-12);
}

TEST(KlGaussian, ClosedFormValues) {
    EXPECT_DOUBLE_EQ(nn::kl_gaussian(Tensor::vector({0.0}), Tensor::vector({0.0})), 0.0);
    EXPECT_DOUBLE_EQ(nn::kl_gaussian(Tensor::vector({1.0}), Tensor::vector({0.0})), 0.5);
    EXPECT_NEAR(nn::kl_gaussian(Tensor::vector({0.0}), Tensor::vector({1.0})), 0.5 * (std::exp(1.0) - 2.0),
                1e-12);
}

TEST(KlGaussian, NonNegativeOnRandomDraws) {
    Rng rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        Tensor mu({5}), logvar({5});
        for (std::size_t i = 0; i < 5; ++i) {
            mu[i] = rng.uniform(-3.0, 3.0);
            logvar[i] = rng.uniform(-3.0, 3.0);
        }
        EXPECT_GE(nn::kl_gaussian(mu, logvar), 0.0);
    }
}

TEST(KlGaussian, RejectsNonFinite) {
    Tensor bad = Tensor::vector({std::numeric_limits<double>::infinity()});
    EXPECT_THROW(nn::kl_gaussian(bad, Tensor::vector({0.0})), NumericError);
}

TEST(KlGaussian, GraphMatchesClosedForm) {
    Rng rng(22);
    Tensor mu({4}), logvar({4});
    for (std::size_t i = 0; i < 4; ++i) {
        mu[i] = rng.normal();
        logvar[i] = rng.normal();
    }
    num::Tape t;
    num::Var kl = nn::build_kl(t, t.constant(mu), t.constant(logvar));
    EXPECT_NEAR(t.value(kl)[0], nn::kl_gaussian(mu, logvar), 1e-12);
}

TEST(KlGaussian, GradientsMatchFiniteDifferences) {
    Rng rng(23);
    Tensor mu({4}), logvar({4});
    for (std::size_t i = 0; i < 4; ++i) {
        mu[i] = rng.normal();
        logvar[i] = rng.normal();
    }
    auto loss_fn = [&]() {
        num::Tape t;
        return t.value(nn::build_kl(t, t.leaf(mu), t.leaf(logvar)))[0];
    };
    num::Tape t;
    num::Var vm = t.leaf(mu, true), vl = t.leaf(logvar, true);
    t.backward(nn::build_kl(t, vm, vl));
    std::vector<num::NamedTensor> named = {{"mu", &mu}, {"logvar", &logvar}};
    std::vector<Tensor> grads = {t.grad(vm), t.grad(vl)};
    EXPECT_LT(num::finite_difference_check(loss_fn, named, grads, 1e-5), 1e-5);
}

TEST(VaeLoss, PerfectReconstructionAndPriorPosteriorGivesZero) {
    nn::ModelParams params = tiny_params(nn::AeMode::Vae, 5);
    test::zero_params(params);
    Tensor frames({1, 16});  // all-zero frame: mu_x = 0 = x, mu_z = 0, logvar = 0
    EXPECT_NEAR(nn::vae_loss(params, frames, 3), 0.0, 1e-12);
}

TEST(VaeLoss, AtLeastKlTerm) {
    nn::ModelParams params = tiny_params(nn::AeMode::Vae, 6);
    Tensor frames = random_frames(2, 16, 30);
    nn::VaeSample s = nn::encode_vae_sample(params, frames, 9);
    double kl = nn::kl_gaussian(s.mu, s.logvar);
    EXPECT_GE(nn::vae_loss(params, frames, 9), kl - 1e-9);
}

TEST(VaeLoss, GradientsMatchFiniteDifferences) {
    nn::ModelParams params = tiny_params(nn::AeMode::Vae, 7);
    Tensor frames = random_frames(2, 16, 31);
    auto loss_fn = [&]() { return nn::vae_loss(params, frames, 17); };

    num::Tape t;
    nn::TapeModel m = nn::TapeModel::leaf_all(t, params);
    Rng rng(17);
    nn::FeaturePipeline p = nn::build_features(t, m, params.config, frames, rng, false, true);
    t.backward(p.ae_total);
    std::vector<Tensor> grads = m.gradients(t);

    auto named = params.named();
    double worst = 0.0;
    for (std::size_t k = 0; k < named.size(); ++k) {
        std::string name = named[k].name;
        if (name.rfind("enc.", 0) != 0 && name.rfind("dec.", 0) != 0) continue;
        std::vector<num::NamedTensor> single = {named[k]};
        std::vector<Tensor> g = {grads[k]};
        worst = std::max(worst, num::finite_difference_check(loss_fn, single, g, 1e-5));
    }
    EXPECT_LT(worst, 1e-4);
}

TEST(VaeLoss, LearnedOutputVarianceGradients) {
    nn::ModelConfig cfg = tiny_config(nn::AeMode::Vae);
    cfg.vae_learned_output_variance = true;
    nn::ModelParams params = nn::ModelParams::init(cfg, 8);
    Tensor frames = random_frames(2, 16, 32);
    auto loss_fn = [&]() { return nn::vae_loss(params, frames, 19); };

    num::Tape t;
    nn::TapeModel m = nn::TapeModel::leaf_all(t, params);
    Rng rng(19);
    nn::FeaturePipeline p = nn::build_features(t, m, cfg, frames, rng, false, true);
    t.backward(p.ae_total);
    std::vector<Tensor> grads = m.gradients(t);
    auto named = params.named();
    bool checked = false;
    for (std::size_t k = 0; k < named.size(); ++k) {
        if (named[k].name != "dec.w_logvar_out" && named[k].name != "dec.b_logvar_out") continue;
        std::vector<num::NamedTensor> single = {named[k]};
        std::vector<Tensor> g = {grads[k]};
        EXPECT_LT(num::finite_difference_check(loss_fn, single, g, 1e-5), 1e-4);
        checked = true;
    }
    EXPECT_TRUE(checked);
}

TEST(Features, DaeWithZeroStrengthEqualsAeLoss) {
    // identical batch and seeds: masking probability 0 makes the DAE
    // objective coincide with the AE objective
    nn::ModelParams ae = tiny_params(nn::AeMode::Ae, 9);
    nn::ModelParams dae = ae;
    dae.config.mode = nn::AeMode::Dae;
    dae.config.dae_strength = 0.0;
    Tensor frames = random_frames(3, 16, 33);

    auto eval_total = [&](const nn::ModelParams& p, std::uint64_t seed) {
        num::Tape t;
        nn::TapeModel m = nn::TapeModel::leaf_all(t, p);
        Rng rng(seed);
        nn::FeaturePipeline f = nn::build_features(t, m, p.config, frames, rng, false, true);
        return t.value(f.ae_total)[0];
    };
    EXPECT_DOUBLE_EQ(eval_total(ae, 4), eval_total(dae, 4));
}
