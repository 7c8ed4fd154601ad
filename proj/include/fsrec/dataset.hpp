#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fsrec/errors.hpp"
#include "fsrec/image.hpp"
#include "fsrec/synth.hpp"
#include "fsrec/tensor.hpp"

namespace fsrec::data {

/// Default word list for synthetic data: common English words, a few names
/// and borrowed words, all fingerspellable.
inline const std::vector<std::string>& default_words() {
    static const std::vector<std::string> words = {
        "ABOUT",    "AFTER",   "AGAIN",   "ALMOST",  "ALWAYS",  "ANSWER",  "BANANA",  "BECAUSE",
        "BEFORE",   "BETWEEN", "BOTTLE",  "BRIDGE",  "BROTHER", "BUTTER",  "CAMERA",  "CANDLE",
        "CARBON",   "CASTLE",  "CHANGE",  "CIRCLE",  "CLOUD",   "COFFEE",  "COPPER",  "CORNER",
        "COUNTRY",  "CYCLE",   "DANGER",  "DESIGN",  "DINNER",  "DOCTOR",  "DOUBLE",  "DRAGON",
        "DURING",   "EFFORT",  "EIGHT",   "ENERGY",  "ENGINE",  "EXPERT",  "FAMILY",  "FINGER",
        "FIREWIRE", "FLOWER",  "FOREST",  "FRIEND",  "FUTURE",  "GARDEN",  "GLASS",   "GOLDEN",
        "GUITAR",   "HAMMER",  "HANDLE",  "HAPPY",   "HARBOR",  "HEAVY",   "HONEY",   "HORSE",
        "HOUSE",    "HUNGRY",  "ISLAND",  "JACKET",  "JOURNEY", "JUNGLE",  "KERUL",   "KITCHEN",
        "KNIGHT",   "LADDER",  "LAPTOP",  "LETTER",  "LIBYA",   "LISTEN",  "LITTLE",  "LUCKY",
        "MACHINE",  "MARKET",  "MEDICINE","MEMBER",  "METAL",   "MINUTE",  "MODERN",  "MONKEY",
        "MORNING",  "MOUNTAIN","MUSIC",   "NATURE",  "NEEDLE",  "NOTEBOOK","NUMBER",  "OFFICE",
        "ORANGE",   "OXYGEN",  "PAPER",   "PEOPLE",  "PEPPER",  "PERSON",  "PICTURE", "PLANET",
        "POCKET",   "POWER",   "PROBLEM", "PURPLE",  "QUESTION","QUIET",   "RABBIT",  "RECORD",
        "RIVER",    "ROCKET",  "SADDLE",  "SCHOOL",  "SECOND",  "SECRET",  "SEVEN",   "SHADOW",
        "SIGNAL",   "SILVER",  "SIMPLE",  "SINGER",  "SISTER",  "SPIDER",  "SPRING",  "SPRUCE",
        "SQUARE",   "STATION", "STONE",   "STREET",  "STRONG",  "SUGAR",   "SUMMER",  "SYSTEM",
        "TABLE",    "TANZANIA","TEACHER", "TEMPLE",  "THEORY",  "THUNDER", "TIGER",   "TOWER",
        "TRAVEL",   "TWELVE",  "UMBRELLA","UNCLE",   "UNDER",   "UNIQUE",  "VALLEY",  "VELVET",
        "VICTORY",  "VILLAGE", "VIOLIN",  "WATER",   "WEATHER", "WINDOW",  "WINTER",  "WISDOM",
        "WONDER",   "YELLOW",  "ZEBRA",   "ZIGZAG",
    };
    return words;
}

struct DataGenConfig {
    std::size_t image_size = kImageSize;
    std::size_t signers = 4;
    std::size_t words_per_signer = 100;
    std::size_t repetitions = 1;
    std::size_t frames_per_letter = 3;
    std::size_t transition_frames = 1;
    std::size_t augment_copies = 0;
    double aug_scale = 0.8;
    double aug_translate_px = 10.0;
    double aug_rotate_deg = 30.0;
    std::uint64_t seed = 1;
    std::vector<std::string> words;  // empty means default_words()

    const std::vector<std::string>& word_list() const {
        return words.empty() ? default_words() : words;
    }
};

/// One manifest record; frames regenerate deterministically from it given
/// the dataset-level generation parameters.
struct InstanceMeta {
    int signer = 0;
    std::string word;
    std::uint64_t seed = 0;
    std::size_t frames = 0;
    bool augmented = false;
};

inline std::size_t sequence_length(const std::string& word, std::size_t frames_per_letter,
                                   std::size_t transition_frames) {
    return word.size() * frames_per_letter + (word.size() - 1) * transition_frames;
}

/// Synthetic fingerspelling corpus: a manifest of word instances whose
/// frames are either regenerated on demand or read from the flat binary
/// written next to the manifest.
class Dataset {
public:
    static Dataset build(DataGenConfig cfg) {
        if (cfg.image_size != kImageSize) {
            throw DataError("dataset: image_size must be 64");
        }
        if (cfg.signers < 1) throw DataError("dataset: need at least one signer");
        const auto& list = cfg.word_list();
        if (cfg.words_per_signer > list.size()) {
            throw DataError("dataset: words_per_signer exceeds word list size " +
                            std::to_string(list.size()));
        }
        Dataset ds;
        ds.cfg_ = std::move(cfg);
        Rng seeds = Rng(ds.cfg_.seed).split("instance");
        std::uint64_t index = 0;
        for (std::size_t s = 0; s < ds.cfg_.signers; ++s) {
            for (std::size_t w = 0; w < ds.cfg_.words_per_signer; ++w) {
                for (std::size_t r = 0; r < ds.cfg_.repetitions; ++r) {
                    InstanceMeta m;
                    m.signer = static_cast<int>(s);
                    m.word = list[w];
                    m.seed = seeds.split(index++).next_u64();
                    m.frames = sequence_length(m.word, ds.cfg_.frames_per_letter,
                                               ds.cfg_.transition_frames);
                    ds.instances_.push_back(std::move(m));
                }
            }
        }
        if (ds.cfg_.augment_copies > 0) {
            std::size_t originals = ds.instances_.size();
            for (std::size_t c = 0; c < ds.cfg_.augment_copies; ++c) {
                for (std::size_t i = 0; i < originals; ++i) {
                    InstanceMeta m = ds.instances_[i];
                    m.augmented = true;
                    m.seed = seeds.split(index++).next_u64();
                    ds.instances_.push_back(std::move(m));
                }
            }
        }
        return ds;
    }

    const DataGenConfig& gen() const { return cfg_; }
    const std::vector<InstanceMeta>& instances() const { return instances_; }
    std::size_t size() const { return instances_.size(); }

    std::vector<int> signer_ids() const {
        std::vector<int> ids;
        ids.reserve(instances_.size());
        for (const auto& m : instances_) ids.push_back(m.signer);
        return ids;
    }

    /// The instance's frames; read from the binary sidecar when the dataset
    /// was loaded with one, regenerated from the manifest otherwise.
    FrameSequence sequence(std::size_t index) const {
        const InstanceMeta& m = instances_.at(index);
        if (!frames_path_.empty()) {
            return read_sequence(index);
        }
        return generate_sequence(m);
    }

    /// Frames flattened to an S x 4096 matrix.
    Tensor frames(std::size_t index) const { return sequence(index).stacked(); }

    void save(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        std::ofstream mf(dir / "manifest.txt");
        if (!mf) throw DataError("dataset: cannot write manifest in " + dir.string());
        mf << "fsrec-dataset v1\n";
        mf << "seed " << cfg_.seed << "\n";
        mf << "image_size " << cfg_.image_size << "\n";
        mf << "signers " << cfg_.signers << "\n";
        mf << "words_per_signer " << cfg_.words_per_signer << "\n";
        mf << "repetitions " << cfg_.repetitions << "\n";
        mf << "frames_per_letter " << cfg_.frames_per_letter << "\n";
        mf << "transition_frames " << cfg_.transition_frames << "\n";
        mf << "augment_copies " << cfg_.augment_copies << "\n";
        mf << "aug_scale " << cfg_.aug_scale << "\n";
        mf << "aug_translate_px " << cfg_.aug_translate_px << "\n";
        mf << "aug_rotate_deg " << cfg_.aug_rotate_deg << "\n";
        mf << "instances " << instances_.size() << "\n";
        mf << "# index signer word seed frames augmented\n";
        for (std::size_t i = 0; i < instances_.size(); ++i) {
            const auto& m = instances_[i];
            mf << i << " " << m.signer << " " << m.word << " " << m.seed << " " << m.frames << " "
               << (m.augmented ? 1 : 0) << "\n";
        }
        mf.close();

        std::ofstream bf(dir / "frames.f64", std::ios::binary);
        if (!bf) throw DataError("dataset: cannot write frames.f64 in " + dir.string());
        for (std::size_t i = 0; i < instances_.size(); ++i) {
            FrameSequence seq = generate_sequence(instances_[i]);
            for (const Tensor& f : seq.frames) {
                bf.write(reinterpret_cast<const char*>(f.values().data()),
                         static_cast<std::streamsize>(f.size() * sizeof(double)));
            }
        }
    }

    static Dataset load(const std::filesystem::path& dir) {
        std::ifstream mf(dir / "manifest.txt");
        if (!mf) throw DataError("dataset: cannot open manifest in " + dir.string());
        std::string header;
        std::getline(mf, header);
        if (header != "fsrec-dataset v1") {
            throw DataError("dataset: unrecognized manifest header '" + header + "'");
        }
        Dataset ds;
        std::size_t expected = 0;
        std::string line;
        while (std::getline(mf, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') break;  // column comment precedes the records
            std::istringstream ss(line);
            std::string key;
            ss >> key;
            if (key == "seed") ss >> ds.cfg_.seed;
            else if (key == "image_size") ss >> ds.cfg_.image_size;
            else if (key == "signers") ss >> ds.cfg_.signers;
            else if (key == "words_per_signer") ss >> ds.cfg_.words_per_signer;
            else if (key == "repetitions") ss >> ds.cfg_.repetitions;
            else if (key == "frames_per_letter") ss >> ds.cfg_.frames_per_letter;
            else if (key == "transition_frames") ss >> ds.cfg_.transition_frames;
            else if (key == "augment_copies") ss >> ds.cfg_.augment_copies;
            else if (key == "aug_scale") ss >> ds.cfg_.aug_scale;
            else if (key == "aug_translate_px") ss >> ds.cfg_.aug_translate_px;
            else if (key == "aug_rotate_deg") ss >> ds.cfg_.aug_rotate_deg;
            else if (key == "instances") ss >> expected;
            else throw DataError("dataset: unknown manifest key '" + key + "'");
            if (ss.fail()) throw DataError("dataset: malformed manifest line '" + line + "'");
        }
        while (std::getline(mf, line)) {
            if (line.empty()) continue;
            std::istringstream ss(line);
            std::size_t idx;
            int aug;
            InstanceMeta m;
            ss >> idx >> m.signer >> m.word >> m.seed >> m.frames >> aug;
            if (ss.fail()) throw DataError("dataset: malformed manifest record '" + line + "'");
            m.augmented = aug != 0;
            ds.instances_.push_back(std::move(m));
        }
        if (expected != ds.instances_.size()) {
            throw DataError("dataset: manifest promises " + std::to_string(expected) +
                            " instances but lists " + std::to_string(ds.instances_.size()));
        }
        auto bin = dir / "frames.f64";
        if (std::filesystem::exists(bin)) {
            std::uint64_t total_frames = 0;
            for (const auto& m : ds.instances_) total_frames += m.frames;
            std::uint64_t expect_bytes = total_frames * kImageSize * kImageSize * sizeof(double);
            if (std::filesystem::file_size(bin) != expect_bytes) {
                throw DataError("dataset: frames.f64 size does not match the manifest");
            }
            ds.frames_path_ = bin.string();
            ds.offsets_.reserve(ds.instances_.size());
            std::uint64_t off = 0;
            for (const auto& m : ds.instances_) {
                ds.offsets_.push_back(off);
                off += m.frames * kImageSize * kImageSize * sizeof(double);
            }
        }
        return ds;
    }

private:
    FrameSequence generate_sequence(const InstanceMeta& m) const {
        SignerStyle style = SignerStyle::make(m.signer, cfg_.seed);
        FrameSequence seq =
            synth_generate(m.word, style, cfg_.frames_per_letter, cfg_.transition_frames, m.seed);
        if (m.augmented) {
            Rng aug_seeds = Rng(m.seed).split("aug");
            for (std::size_t f = 0; f < seq.frames.size(); ++f) {
                TransformSpec spec{cfg_.aug_scale, cfg_.aug_translate_px, cfg_.aug_rotate_deg,
                                   aug_seeds.split(f).next_u64()};
                seq.frames[f] = augment(seq.frames[f], spec);
            }
        }
        return seq;
    }

    FrameSequence read_sequence(std::size_t index) const {
        const InstanceMeta& m = instances_[index];
        std::ifstream bf(frames_path_, std::ios::binary);
        if (!bf) throw DataError("dataset: cannot open " + frames_path_);
        bf.seekg(static_cast<std::streamoff>(offsets_[index]));
        FrameSequence seq;
        seq.signer = m.signer;
        seq.word = m.word;
        seq.frames.reserve(m.frames);
        for (std::size_t f = 0; f < m.frames; ++f) {
            Tensor frame({kImageSize, kImageSize});
            bf.read(reinterpret_cast<char*>(frame.values().data()),
                    static_cast<std::streamsize>(frame.size() * sizeof(double)));
            if (!bf) throw DataError("dataset: truncated frames.f64");
            seq.frames.push_back(std::move(frame));
        }
        return seq;
    }

    DataGenConfig cfg_;
    std::vector<InstanceMeta> instances_;
    std::string frames_path_;
    std::vector<std::uint64_t> offsets_;
};

}  // namespace fsrec::data
