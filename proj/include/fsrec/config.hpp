#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fsrec/dataset.hpp"
#include "fsrec/errors.hpp"
#include "fsrec/model.hpp"
#include "fsrec/splits.hpp"
#include "fsrec/trainer.hpp"

namespace fsrec::eval {

/// Everything a run needs, filled from a flat key-value config file.
/// Unknown keys are errors.
struct RunConfig {
    nn::ModelConfig model;
    train::TrainConfig train;
    data::DataGenConfig data;
    std::size_t pool_frames = 2000;
    std::size_t pool_styles = 8;
    data::Protocol protocol = data::Protocol::SD;
    int fold = 0;
    int target_signer = 0;
    std::string dataset_dir;
    std::string words_file;
    std::size_t beam_width = 5;

    void set(const std::string& key, const std::string& raw);
    static RunConfig load(const std::filesystem::path& path);
    void finalize();
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
    std::istringstream ss(raw);
    T value{};
    ss >> value;
    if (ss.fail() || !(ss >> std::ws).eof()) {
        throw UsageError("config: bad value '" + raw + "' for key '" + key + "'");
    }
    return value;
}

inline bool parse_bool(const std::string& key, const std::string& raw) {
    if (raw == "true" || raw == "1" || raw == "yes") return true;
    if (raw == "false" || raw == "0" || raw == "no") return false;
    throw UsageError("config: bad boolean '" + raw + "' for key '" + key + "'");
}

}  // namespace detail

inline void RunConfig::set(const std::string& key, const std::string& raw) {
    using detail::parse_bool;
    using detail::parse_number;
    // model
    if (key == "mode") {
        if (raw == "ae") model.mode = nn::AeMode::Ae;
        else if (raw == "dae") model.mode = nn::AeMode::Dae;
        else if (raw == "vae") model.mode = nn::AeMode::Vae;
        else if (raw == "none") model.mode = nn::AeMode::None;
        else throw UsageError("config: mode must be ae|dae|vae|none, got '" + raw + "'");
    } else if (key == "lambda_ae") {
        model.lambda_ae = parse_number<double>(key, raw);
        if (model.lambda_ae < 0) throw UsageError("config: lambda_ae must be >= 0");
    } else if (key == "mlp_hidden") {
        model.mlp_hidden = parse_number<std::size_t>(key, raw);
    } else if (key == "latent_dim") {
        model.latent_dim = parse_number<std::size_t>(key, raw);
    } else if (key == "lstm_hidden") {
        model.lstm_hidden = parse_number<std::size_t>(key, raw);
    } else if (key == "embed_dim") {
        model.embed_dim = parse_number<std::size_t>(key, raw);
    } else if (key == "attn_dim") {
        model.attn_dim = parse_number<std::size_t>(key, raw);
    } else if (key == "dropout_retain") {
        model.dropout_retain = parse_number<double>(key, raw);
        if (model.dropout_retain <= 0 || model.dropout_retain > 1) {
            throw UsageError("config: dropout_retain must be in (0, 1]");
        }
    } else if (key == "dae_corruption") {
        if (raw == "masking") model.dae_corruption = nn::CorruptionKind::Masking;
        else if (raw == "gaussian") model.dae_corruption = nn::CorruptionKind::Gaussian;
        else throw UsageError("config: dae_corruption must be masking|gaussian");
    } else if (key == "dae_strength") {
        model.dae_strength = parse_number<double>(key, raw);
    } else if (key == "vae_logvar_clamp") {
        model.logvar_clamp = parse_number<double>(key, raw);
    } else if (key == "vae_learned_output_variance") {
        model.vae_learned_output_variance = parse_bool(key, raw);
    }
    // training
    else if (key == "batch_size") {
        train.batch_size = parse_number<std::size_t>(key, raw);
    } else if (key == "learning_rate") {
        train.learning_rate = parse_number<double>(key, raw);
    } else if (key == "decay_factor") {
        train.decay_factor = parse_number<double>(key, raw);
    } else if (key == "patience") {
        train.patience = parse_number<std::size_t>(key, raw);
    } else if (key == "lr_floor") {
        train.lr_floor = parse_number<double>(key, raw);
    } else if (key == "max_epochs") {
        train.max_epochs = parse_number<std::size_t>(key, raw);
    } else if (key == "grad_clip") {
        train.grad_clip = parse_number<double>(key, raw);
    } else if (key == "seed") {
        train.seed = parse_number<std::uint64_t>(key, raw);
    } else if (key == "max_decode_len") {
        train.max_decode_len = parse_number<std::size_t>(key, raw);
        if (train.max_decode_len < 1) throw UsageError("config: max_decode_len must be >= 1");
    }
    // data generation
    else if (key == "image_size") {
        data.image_size = parse_number<std::size_t>(key, raw);
        if (data.image_size != data::kImageSize) throw UsageError("config: image_size must be 64");
    } else if (key == "signers") {
        data.signers = parse_number<std::size_t>(key, raw);
    } else if (key == "words_per_signer") {
        data.words_per_signer = parse_number<std::size_t>(key, raw);
    } else if (key == "repetitions") {
        data.repetitions = parse_number<std::size_t>(key, raw);
    } else if (key == "frames_per_letter") {
        data.frames_per_letter = parse_number<std::size_t>(key, raw);
    } else if (key == "transition_frames") {
        data.transition_frames = parse_number<std::size_t>(key, raw);
    } else if (key == "augment_copies") {
        data.augment_copies = parse_number<std::size_t>(key, raw);
    } else if (key == "aug_scale") {
        data.aug_scale = parse_number<double>(key, raw);
    } else if (key == "aug_translate_px") {
        data.aug_translate_px = parse_number<double>(key, raw);
    } else if (key == "aug_rotate_deg") {
        data.aug_rotate_deg = parse_number<double>(key, raw);
    } else if (key == "words_file") {
        words_file = raw;
    } else if (key == "pool_frames") {
        pool_frames = parse_number<std::size_t>(key, raw);
    } else if (key == "pool_styles") {
        pool_styles = parse_number<std::size_t>(key, raw);
    }
    // protocol and run
    else if (key == "protocol") {
        if (raw == "sd") protocol = data::Protocol::SD;
        else if (raw == "si") protocol = data::Protocol::SI;
        else if (raw == "sa") protocol = data::Protocol::SA;
        else throw UsageError("config: protocol must be sd|si|sa");
    } else if (key == "fold") {
        fold = parse_number<int>(key, raw);
    } else if (key == "target_signer") {
        target_signer = parse_number<int>(key, raw);
    } else if (key == "dataset") {
        dataset_dir = raw;
    } else if (key == "beam_width") {
        beam_width = parse_number<std::size_t>(key, raw);
        if (beam_width < 1) throw UsageError("config: beam_width must be >= 1");
    } else {
        throw UsageError("config: unknown key '" + key + "'");
    }
}

inline RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config: cannot open " + path.string());
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string stripped = detail::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        }
        std::string key = detail::trim(stripped.substr(0, eq));
        std::string value = detail::trim(stripped.substr(eq + 1));
        if (key.empty()) throw UsageError("config: empty key on line " + std::to_string(lineno));
        cfg.set(key, value);
    }
    cfg.finalize();
    return cfg;
}

inline void RunConfig::finalize() {
    model.image_dim = data.image_size * data.image_size;
    data.seed = train.seed;
    if (!words_file.empty()) {
        std::ifstream wf(words_file);
        if (!wf) throw DataError("config: cannot open words_file " + words_file);
        data.words.clear();
        std::string w;
        while (std::getline(wf, w)) {
            w = detail::trim(w);
            if (!w.empty()) data.words.push_back(w);
        }
        if (data.words.empty()) throw DataError("config: words_file " + words_file + " is empty");
    }
    if (model.latent_dim >= model.image_dim) {
        throw UsageError("config: latent_dim must be smaller than the image dimensionality");
    }
}

}  // namespace fsrec::eval
