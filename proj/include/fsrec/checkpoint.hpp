#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fsrec/errors.hpp"
#include "fsrec/model.hpp"

namespace fsrec::eval {

struct CheckpointCorrupt : DataError {
    using DataError::DataError;
};
struct CheckpointVersionMismatch : DataError {
    using DataError::DataError;
};
struct CheckpointMismatch : DataError {
    using DataError::DataError;
};

namespace detail {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kMagic[4] = {'F', 'S', 'R', 'C'};

inline void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

inline void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw CheckpointCorrupt("checkpoint: truncated file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw CheckpointCorrupt("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

inline void put_string(std::ostream& out, const std::string& s) {
    put_u32(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
    std::uint32_t n = get_u32(in);
    if (n > 4096) throw CheckpointCorrupt("checkpoint: implausible string length");
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw CheckpointCorrupt("checkpoint: truncated file");
    return s;
}

}  // namespace detail

/// Writes the model (architecture header plus every named tensor as a
/// length-prefixed little-endian record of 64-bit floats).
inline void save_checkpoint(const std::filesystem::path& path, const nn::ModelParams& params,
                            std::uint64_t train_seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("checkpoint: cannot write " + path.string());
    const nn::ModelConfig& c = params.config;
    out.write(detail::kMagic, 4);
    detail::put_u32(out, detail::kCheckpointVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(c.mode));
    detail::put_u32(out, (c.vae_learned_output_variance ? 1u : 0u) |
                             (c.dae_corruption == nn::CorruptionKind::Gaussian ? 2u : 0u));
    for (std::size_t dim : {c.image_dim, c.mlp_hidden, c.latent_dim, c.lstm_hidden, c.embed_dim,
                            c.attn_dim, c.num_letters}) {
        detail::put_u64(out, dim);
    }
    for (double v : {c.lambda_ae, c.dropout_retain, c.logvar_clamp, c.dae_strength}) {
        detail::put_f64(out, v);
    }
    detail::put_u64(out, train_seed);

    auto named = params.named();
    detail::put_u32(out, static_cast<std::uint32_t>(named.size()));
    for (const auto& [name, tensor] : named) {
        detail::put_string(out, name);
        detail::put_u32(out, static_cast<std::uint32_t>(tensor->ndim()));
        for (std::size_t d : tensor->shape()) detail::put_u64(out, d);
        for (double v : tensor->values()) detail::put_f64(out, v);
    }
    if (!out) throw DataError("checkpoint: write failed for " + path.string());
}

struct LoadedCheckpoint {
    nn::ModelParams params;
    std::uint64_t train_seed = 0;
};

inline LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::kMagic, 4) != 0) {
        throw CheckpointCorrupt("checkpoint: bad magic in " + path.string());
    }
    std::uint32_t version = detail::get_u32(in);
    if (version != detail::kCheckpointVersion) {
        throw CheckpointVersionMismatch("checkpoint: version " + std::to_string(version) +
                                        " is not supported (expected " +
                                        std::to_string(detail::kCheckpointVersion) + ")");
    }
    nn::ModelConfig c;
    std::uint32_t mode = detail::get_u32(in);
    if (mode > 3) throw CheckpointCorrupt("checkpoint: invalid mode field");
    c.mode = static_cast<nn::AeMode>(mode);
    std::uint32_t flags = detail::get_u32(in);
    c.vae_learned_output_variance = (flags & 1u) != 0;
    c.dae_corruption = (flags & 2u) ? nn::CorruptionKind::Gaussian : nn::CorruptionKind::Masking;
    c.image_dim = detail::get_u64(in);
    c.mlp_hidden = detail::get_u64(in);
    c.latent_dim = detail::get_u64(in);
    c.lstm_hidden = detail::get_u64(in);
    c.embed_dim = detail::get_u64(in);
    c.attn_dim = detail::get_u64(in);
    c.num_letters = detail::get_u64(in);
    c.lambda_ae = detail::get_f64(in);
    c.dropout_retain = detail::get_f64(in);
    c.logvar_clamp = detail::get_f64(in);
    c.dae_strength = detail::get_f64(in);

    LoadedCheckpoint result;
    result.train_seed = detail::get_u64(in);
    result.params = nn::ModelParams::init(c, 0);

    std::uint32_t count = detail::get_u32(in);
    auto named = result.params.named();
    if (count != named.size()) {
        throw CheckpointMismatch("checkpoint: holds " + std::to_string(count) + " tensors, model needs " +
                                 std::to_string(named.size()));
    }
    for (std::uint32_t k = 0; k < count; ++k) {
        std::string name = detail::get_string(in);
        std::uint32_t ndim = detail::get_u32(in);
        if (ndim == 0 || ndim > 4) throw CheckpointCorrupt("checkpoint: invalid rank for " + name);
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape) d = detail::get_u64(in);
        num::Tensor* target = nullptr;
        for (auto& nt : named) {
            if (nt.name == name) {
                target = nt.tensor;
                break;
            }
        }
        if (!target) throw CheckpointMismatch("checkpoint: unexpected tensor '" + name + "'");
        if (shape != target->shape()) {
            throw CheckpointMismatch("checkpoint: tensor '" + name + "' has shape mismatch");
        }
        for (double& v : target->values()) v = detail::get_f64(in);
    }
    return result;
}

/// Verifies that a loaded checkpoint fits the run's configured mode and
/// architecture.
inline void require_matching(const nn::ModelParams& loaded, const nn::ModelConfig& expected) {
    const nn::ModelConfig& c = loaded.config;
    if (c.mode != expected.mode) {
        throw CheckpointMismatch(std::string("checkpoint: mode '") + nn::to_string(c.mode) +
                                 "' does not match configured mode '" + nn::to_string(expected.mode) + "'");
    }
    if (!c.same_architecture(expected)) {
        throw CheckpointMismatch("checkpoint: architecture does not match the configured model");
    }
}

}  // namespace fsrec::eval
