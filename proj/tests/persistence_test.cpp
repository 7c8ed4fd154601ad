#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fsrec/checkpoint.hpp"
#include "fsrec/config.hpp"
#include "test_util.hpp"

using namespace fsrec;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const char* name) {
    return fs::temp_directory_path() / name;
}

void write_config(const fs::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitwise) {
    nn::ModelParams params = test::tiny_params(nn::AeMode::Vae, 77);
    fs::path path = temp_file("fsrec_ckpt_roundtrip.ckpt");
    eval::save_checkpoint(path, params, 12345);
    eval::LoadedCheckpoint loaded = eval::load_checkpoint(path);
    EXPECT_EQ(loaded.train_seed, 12345u);
    EXPECT_EQ(loaded.params.config.mode, nn::AeMode::Vae);

    auto a = params.named();
    auto b = loaded.params.named();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].name, b[i].name);
        EXPECT_TRUE(num::bitwise_equal(*a[i].tensor, *b[i].tensor)) << a[i].name;
    }
    fs::remove(path);
}

TEST(Checkpoint, TruncatedFileIsCorrupt) {
    nn::ModelParams params = test::tiny_params(nn::AeMode::Ae, 78);
    fs::path path = temp_file("fsrec_ckpt_trunc.ckpt");
    eval::save_checkpoint(path, params, 1);
    auto size = fs::file_size(path);
    fs::resize_file(path, size / 2);
    EXPECT_THROW(eval::load_checkpoint(path), eval::CheckpointCorrupt);
    fs::remove(path);
}

TEST(Checkpoint, BadMagicIsCorrupt) {
    fs::path path = temp_file("fsrec_ckpt_magic.ckpt");
    std::ofstream(path) << "not a checkpoint at all";
    EXPECT_THROW(eval::load_checkpoint(path), eval::CheckpointCorrupt);
    fs::remove(path);
}

TEST(Checkpoint, FutureVersionRejectedDistinctly) {
    nn::ModelParams params = test::tiny_params(nn::AeMode::Ae, 79);
    fs::path path = temp_file("fsrec_ckpt_version.ckpt");
    eval::save_checkpoint(path, params, 1);
    // bump the version field in place (bytes 4..7, little endian)
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(4);
    char v2[4] = {9, 0, 0, 0};
    f.write(v2, 4);
    f.close();
    EXPECT_THROW(eval::load_checkpoint(path), eval::CheckpointVersionMismatch);
    fs::remove(path);
}

TEST(Checkpoint, ModeMismatchRejected) {
    nn::ModelParams vae = test::tiny_params(nn::AeMode::Vae, 80);
    fs::path path = temp_file("fsrec_ckpt_mode.ckpt");
    eval::save_checkpoint(path, vae, 1);
    eval::LoadedCheckpoint loaded = eval::load_checkpoint(path);
    nn::ModelConfig ae_cfg = test::tiny_config(nn::AeMode::Ae);
    EXPECT_THROW(eval::require_matching(loaded.params, ae_cfg), eval::CheckpointMismatch);
    fs::remove(path);
}

TEST(Checkpoint, ArchitectureMismatchRejected) {
    nn::ModelParams params = test::tiny_params(nn::AeMode::Ae, 81);
    fs::path path = temp_file("fsrec_ckpt_arch.ckpt");
    eval::save_checkpoint(path, params, 1);
    eval::LoadedCheckpoint loaded = eval::load_checkpoint(path);
    nn::ModelConfig bigger = test::tiny_config(nn::AeMode::Ae);
    bigger.lstm_hidden *= 2;
    EXPECT_THROW(eval::require_matching(loaded.params, bigger), eval::CheckpointMismatch);
    fs::remove(path);
}

TEST(Config, ParsesKnownKeysAndDefaults) {
    fs::path path = temp_file("fsrec_config_ok.cfg");
    write_config(path,
                 "# training setup\n"
                 "mode = dae\n"
                 "lambda_ae = 0.5\n"
                 "batch_size = 4\n"
                 "learning_rate = 0.002\n"
                 "max_epochs = 7\n"
                 "protocol = si\n"
                 "target_signer = 2\n"
                 "mlp_hidden = 32\n"
                 "latent_dim = 8\n");
    eval::RunConfig cfg = eval::RunConfig::load(path);
    EXPECT_EQ(cfg.model.mode, nn::AeMode::Dae);
    EXPECT_DOUBLE_EQ(cfg.model.lambda_ae, 0.5);
    EXPECT_EQ(cfg.train.batch_size, 4u);
    EXPECT_DOUBLE_EQ(cfg.train.learning_rate, 0.002);
    EXPECT_EQ(cfg.train.max_epochs, 7u);
    EXPECT_EQ(cfg.protocol, data::Protocol::SI);
    EXPECT_EQ(cfg.target_signer, 2);
    EXPECT_EQ(cfg.model.mlp_hidden, 32u);
    // defaults survive
    EXPECT_DOUBLE_EQ(cfg.train.decay_factor, 0.9);
    EXPECT_EQ(cfg.train.patience, 3u);
    EXPECT_EQ(cfg.model.image_dim, 4096u);
    fs::remove(path);
}

TEST(Config, UnknownKeyIsError) {
    fs::path path = temp_file("fsrec_config_unknown.cfg");
    write_config(path, "mode = ae\nlearnig_rate = 0.1\n");
    EXPECT_THROW(eval::RunConfig::load(path), UsageError);
    fs::remove(path);
}

TEST(Config, BadValuesRejected) {
    fs::path path = temp_file("fsrec_config_bad.cfg");
    write_config(path, "batch_size = many\n");
    EXPECT_THROW(eval::RunConfig::load(path), UsageError);
    write_config(path, "mode = vaee\n");
    EXPECT_THROW(eval::RunConfig::load(path), UsageError);
    write_config(path, "image_size = 32\n");
    EXPECT_THROW(eval::RunConfig::load(path), UsageError);
    write_config(path, "dropout_retain = 0\n");
    EXPECT_THROW(eval::RunConfig::load(path), UsageError);
    write_config(path, "just a line\n");
    EXPECT_THROW(eval::RunConfig::load(path), UsageError);
    fs::remove(path);
}

TEST(Config, MissingFileIsUsageError) {
    EXPECT_THROW(eval::RunConfig::load("/nonexistent/fsrec.cfg"), UsageError);
}

TEST(Config, TrainConfigValidation) {
    train::TrainConfig cfg;
    cfg.decay_factor = 1.5;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.decay_factor = 0.9;
    cfg.patience = 0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
