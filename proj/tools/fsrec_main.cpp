// fsrec command line: synthetic data generation, curriculum training,
// decoding and evaluation for the fingerspelling recognizer.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fsrec/fsrec.hpp"

namespace fs = std::filesystem;
using namespace fsrec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

struct GlobalArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string checkpoint;
    std::string out_dir = ".";
    std::string data_dir;
};

eval::RunConfig load_config(const GlobalArgs& args) {
    eval::RunConfig cfg;
    if (!args.config_path.empty()) {
        cfg = eval::RunConfig::load(args.config_path);
    } else {
        cfg.finalize();
    }
    if (args.seed) {
        cfg.train.seed = *args.seed;
        cfg.data.seed = *args.seed;
    }
    if (!args.data_dir.empty()) cfg.dataset_dir = args.data_dir;
    return cfg;
}

data::Dataset load_dataset(const eval::RunConfig& cfg) {
    if (cfg.dataset_dir.empty()) {
        throw UsageError("no dataset: set 'dataset' in the config or pass --data");
    }
    return data::Dataset::load(cfg.dataset_dir);
}

nn::ModelParams initial_params(const eval::RunConfig& cfg, const GlobalArgs& args) {
    if (!args.checkpoint.empty()) {
        eval::LoadedCheckpoint loaded = eval::load_checkpoint(args.checkpoint);
        eval::require_matching(loaded.params, cfg.model);
        return std::move(loaded.params);
    }
    return nn::ModelParams::init(cfg.model, cfg.train.seed);
}

data::ExperimentSplit make_run_split(const eval::RunConfig& cfg, const data::Dataset& ds) {
    return data::make_splits(ds.signer_ids(), cfg.protocol, cfg.fold, cfg.target_signer,
                             cfg.train.seed);
}

void write_report(const fs::path& dir, const std::string& name, const train::TrainReport& report) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    out << report.to_tsv();
}

std::vector<std::size_t> parse_width_list(const std::string& text) {
    std::vector<std::size_t> widths;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t w = 0;
        try {
            w = static_cast<std::size_t>(std::stoul(item));
        } catch (const std::exception&) {
            throw UsageError("bad beam width '" + item + "'");
        }
        if (w < 1) throw UsageError("beam width must be >= 1");
        widths.push_back(w);
    }
    if (widths.empty()) throw UsageError("no beam widths given");
    return widths;
}

struct DecodedInstance {
    std::size_t index;
    int signer;
    std::string reference;
    std::string hypothesis;
    double log_prob;
    std::vector<num::Tensor> alphas;
    std::vector<int> hyp_ids;
};

std::vector<DecodedInstance> decode_set(const nn::ModelParams& params, const data::Dataset& ds,
                                        const std::vector<std::size_t>& indices, std::size_t beam_width,
                                        std::size_t max_len) {
    Vocab vocab = params.config.vocab();
    std::vector<DecodedInstance> out;
    out.reserve(indices.size());
    for (std::size_t idx : indices) {
        auto hyps = dec::beam_decode(params, ds.frames(idx), beam_width, max_len);
        const dec::Hypothesis& top = hyps.front();
        DecodedInstance d;
        d.index = idx;
        d.signer = ds.instances()[idx].signer;
        d.reference = ds.instances()[idx].word;
        d.hypothesis = vocab.to_string(top.letters);
        d.log_prob = top.log_prob;
        d.alphas = top.alphas;
        d.hyp_ids = top.letters;
        out.push_back(std::move(d));
    }
    return out;
}

void write_decoded(const fs::path& dir, const std::vector<DecodedInstance>& decoded) {
    fs::create_directories(dir);
    std::ofstream out(dir / "decoded.tsv");
    out << "index\tsigner\treference\thypothesis\tlog_prob\n";
    for (const auto& d : decoded) {
        out << d.index << "\t" << d.signer << "\t" << d.reference << "\t" << d.hypothesis << "\t"
            << d.log_prob << "\n";
    }
}

int cmd_generate(const GlobalArgs& args) {
    eval::RunConfig cfg = load_config(args);
    data::Dataset ds = data::Dataset::build(cfg.data);
    ds.save(args.out_dir);
    std::cout << "wrote " << ds.size() << " instances (" << cfg.data.signers << " signers) to "
              << args.out_dir << "\n";
    return kExitOk;
}

int cmd_pretrain(const GlobalArgs& args) {
    eval::RunConfig cfg = load_config(args);
    auto pool = data::make_unlabeled_pool(cfg.pool_frames, cfg.pool_styles, cfg.train.seed);
    nn::ModelParams params = initial_params(cfg, args);
    train::TrainResult result = train::pretrain_unlabeled(pool, std::move(params), cfg.train);
    fs::create_directories(args.out_dir);
    fs::path ckpt = fs::path(args.out_dir) / "pretrained.ckpt";
    eval::save_checkpoint(ckpt, result.params, cfg.train.seed);
    write_report(args.out_dir, "pretrain_report.tsv", result.report);
    std::cout << "pretrained on " << pool.size() << " unlabeled frames; final loss "
              << (result.report.epochs.empty() ? 0.0 : result.report.epochs.back().train_loss)
              << "; checkpoint " << ckpt.string() << "\n";
    return kExitOk;
}

int cmd_train(const GlobalArgs& args) {
    eval::RunConfig cfg = load_config(args);
    if (cfg.protocol == data::Protocol::SA) {
        throw UsageError("protocol sa trains through the adapt command");
    }
    data::Dataset ds = load_dataset(cfg);
    data::ExperimentSplit split = make_run_split(cfg, ds);
    nn::ModelParams params = initial_params(cfg, args);
    train::TrainResult result = train::train_labeled(ds, split, std::move(params), cfg.train);
    fs::create_directories(args.out_dir);
    fs::path ckpt = fs::path(args.out_dir) / "model.ckpt";
    eval::save_checkpoint(ckpt, result.params, cfg.train.seed);
    write_report(args.out_dir, "train_report.tsv", result.report);
    std::cout << "trained " << result.report.epochs.size() << " epochs ("
              << data::to_string(cfg.protocol) << "); final validation letter accuracy "
              << result.report.final_val_letter_accuracy << "%; checkpoint " << ckpt.string() << "\n";
    return kExitOk;
}

int cmd_adapt(const GlobalArgs& args) {
    eval::RunConfig cfg = load_config(args);
    if (args.checkpoint.empty()) {
        throw UsageError("adapt needs --checkpoint with the signer-independent model");
    }
    data::Dataset ds = load_dataset(cfg);
    data::ExperimentSplit split =
        data::make_splits(ds.signer_ids(), data::Protocol::SA, cfg.fold, cfg.target_signer,
                          cfg.train.seed);
    eval::LoadedCheckpoint loaded = eval::load_checkpoint(args.checkpoint);
    eval::require_matching(loaded.params, cfg.model);
    train::TrainResult result = train::adapt(std::move(loaded.params), ds, split, cfg.train);
    fs::create_directories(args.out_dir);
    fs::path ckpt = fs::path(args.out_dir) / "adapted.ckpt";
    eval::save_checkpoint(ckpt, result.params, cfg.train.seed);
    write_report(args.out_dir, "adapt_report.tsv", result.report);
    std::cout << "adapted to signer " << cfg.target_signer << " over "
              << result.report.epochs.size() << " epochs; checkpoint " << ckpt.string() << "\n";
    return kExitOk;
}

int cmd_decode(const GlobalArgs& args, const std::string& widths_text) {
    eval::RunConfig cfg = load_config(args);
    if (args.checkpoint.empty()) throw UsageError("decode needs --checkpoint");
    data::Dataset ds = load_dataset(cfg);
    data::ExperimentSplit split = make_run_split(cfg, ds);
    eval::LoadedCheckpoint loaded = eval::load_checkpoint(args.checkpoint);
    eval::require_matching(loaded.params, cfg.model);
    std::size_t width = widths_text.empty() ? cfg.beam_width : parse_width_list(widths_text).front();
    auto decoded = decode_set(loaded.params, ds, split.test, width, cfg.train.max_decode_len);
    write_decoded(args.out_dir, decoded);
    std::cout << "decoded " << decoded.size() << " instances with beam width " << width << " into "
              << (fs::path(args.out_dir) / "decoded.tsv").string() << "\n";
    return kExitOk;
}

int cmd_evaluate(const GlobalArgs& args, const std::string& widths_text) {
    eval::RunConfig cfg = load_config(args);
    if (args.checkpoint.empty()) throw UsageError("evaluate needs --checkpoint");
    data::Dataset ds = load_dataset(cfg);
    data::ExperimentSplit split = make_run_split(cfg, ds);
    eval::LoadedCheckpoint loaded = eval::load_checkpoint(args.checkpoint);
    eval::require_matching(loaded.params, cfg.model);
    Vocab vocab = loaded.params.config.vocab();
    std::vector<std::size_t> widths =
        widths_text.empty() ? std::vector<std::size_t>{cfg.beam_width} : parse_width_list(widths_text);

    for (std::size_t width : widths) {
        auto decoded = decode_set(loaded.params, ds, split.test, width, cfg.train.max_decode_len);
        std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
        std::vector<eval::EditOps> alignments;
        pairs.reserve(decoded.size());
        for (const auto& d : decoded) {
            std::vector<int> ref = vocab.to_ids(d.reference);
            alignments.push_back(eval::edit_distance(d.hyp_ids, ref));
            pairs.emplace_back(d.hyp_ids, std::move(ref));
        }
        double ler = eval::letter_error_rate(pairs);
        std::cout << "beam=" << width << " LER " << ler << "% over " << decoded.size()
                  << " instances\n";
        if (width == widths.back()) {
            write_decoded(args.out_dir, decoded);
            eval::ConfusionMatrix cm = eval::confusion_matrix(alignments, vocab.num_letters);
            fs::create_directories(args.out_dir);
            std::ofstream counts(fs::path(args.out_dir) / "confusion_counts.csv");
            eval::write_confusion_csv(counts, cm, false);
            std::ofstream probs(fs::path(args.out_dir) / "confusion_probs.csv");
            eval::write_confusion_csv(probs, cm, true);
        }
    }
    return kExitOk;
}

int cmd_dump_attention(const GlobalArgs& args, long instance) {
    eval::RunConfig cfg = load_config(args);
    if (args.checkpoint.empty()) throw UsageError("dump-attention needs --checkpoint");
    data::Dataset ds = load_dataset(cfg);
    data::ExperimentSplit split = make_run_split(cfg, ds);
    eval::LoadedCheckpoint loaded = eval::load_checkpoint(args.checkpoint);
    eval::require_matching(loaded.params, cfg.model);
    Vocab vocab = loaded.params.config.vocab();

    std::vector<std::size_t> targets;
    if (instance >= 0) {
        if (static_cast<std::size_t>(instance) >= ds.size()) {
            throw DataError("instance index out of range");
        }
        targets.push_back(static_cast<std::size_t>(instance));
    } else {
        targets = split.test;
    }
    fs::create_directories(args.out_dir);
    for (std::size_t idx : targets) {
        auto hyps = dec::beam_decode(loaded.params, ds.frames(idx), cfg.beam_width,
                                     cfg.train.max_decode_len);
        const dec::Hypothesis& top = hyps.front();
        std::vector<std::string> labels;
        for (int id : top.letters) labels.emplace_back(1, vocab.letter_char(id));
        if (top.finished) labels.emplace_back("</w>");
        fs::path path = fs::path(args.out_dir) / ("attention_" + std::to_string(idx) + ".csv");
        std::ofstream out(path);
        eval::write_attention_csv(out, labels, top.alphas);
        std::cout << "wrote " << path.string() << " (" << ds.instances()[idx].word << " -> "
                  << vocab.to_string(top.letters) << ")\n";
    }
    return kExitOk;
}

int cmd_gradcheck(const GlobalArgs& args) {
    std::uint64_t seed = args.seed.value_or(2);
    bool ok = true;
    for (const auto& r : nn::run_gradient_suite(seed)) {
        bool pass = r.max_rel_error < 1e-4;
        ok = ok && pass;
        std::cout << "mode " << nn::to_string(r.mode) << ": max relative error " << r.max_rel_error
                  << " over " << r.parameters << " parameters " << (pass ? "[ok]" : "[FAIL]") << "\n";
        if (!pass) std::cout << "  worst: " << r.worst_entry << "\n";
    }
    if (!ok) throw NumericError("gradient check failed");
    return kExitOk;
}

int cmd_render_heatmap(const std::string& input, const std::string& output, const std::string& kind) {
    std::ifstream in(input);
    if (!in) throw DataError("cannot open " + input);
    std::vector<std::vector<double>> grid;
    std::vector<std::string> row_labels, col_labels;
    if (kind == "attention") {
        eval::AttentionTable table = eval::parse_attention_csv(in);
        grid = table.rows;
        row_labels = table.labels;
        for (std::size_t i = 1; i <= (grid.empty() ? 0 : grid.front().size()); ++i) {
            col_labels.push_back(std::to_string(i));
        }
    } else if (kind == "confusion") {
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::stringstream ss(line);
            std::string cell;
            std::vector<std::string> cells;
            while (std::getline(ss, cell, ',')) cells.push_back(cell);
            if (first) {
                col_labels.assign(cells.begin() + 1, cells.end());
                first = false;
                continue;
            }
            row_labels.push_back(cells.front());
            std::vector<double> row;
            for (std::size_t i = 1; i < cells.size(); ++i) row.push_back(std::stod(cells[i]));
            grid.push_back(std::move(row));
        }
    } else {
        throw UsageError("--kind must be attention or confusion");
    }
    std::ofstream out(output);
    if (!out) throw DataError("cannot write " + output);
    eval::write_heatmap_svg(out, grid, row_labels, col_labels);
    std::cout << "wrote " << output << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fsrec: auto-encoder + attention encoder-decoder fingerspelling recognizer"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalArgs args;
    app.add_option("--config", args.config_path, "flat key=value config file");
    std::uint64_t seed_value = 0;
    CLI::Option* seed_opt = app.add_option("--seed", seed_value, "override the config seed");
    app.add_option("--checkpoint", args.checkpoint, "model checkpoint to load");
    app.add_option("--out-dir", args.out_dir, "output directory");
    app.add_option("--data", args.data_dir, "dataset directory (overrides config 'dataset')");

    auto* generate = app.add_subcommand("generate", "build a synthetic dataset and manifest");
    auto* pretrain = app.add_subcommand("pretrain", "auto-encoder pretraining on the unlabeled pool");
    auto* train_cmd = app.add_subcommand("train", "labeled training (SD or SI protocol)");
    auto* adapt_cmd = app.add_subcommand("adapt", "signer adaptation from an SI checkpoint");
    std::string decode_widths;
    auto* decode_cmd = app.add_subcommand("decode", "beam-decode the test split");
    decode_cmd->add_option("--beam-width", decode_widths, "beam width");
    std::string eval_widths;
    auto* eval_cmd = app.add_subcommand("evaluate", "letter error rate and confusion matrix");
    eval_cmd->add_option("--beam-width", eval_widths, "beam width or comma list (e.g. 1,3,5)");
    long instance = -1;
    auto* dump_cmd = app.add_subcommand("dump-attention", "export attention weight tables");
    dump_cmd->add_option("--instance", instance, "instance index (default: whole test split)");
    auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient suite");
    std::string hm_in, hm_out, hm_kind = "attention";
    auto* hm_cmd = app.add_subcommand("render-heatmap", "render an exported table as SVG");
    hm_cmd->add_option("--in", hm_in, "input csv")->required();
    hm_cmd->add_option("--out", hm_out, "output svg")->required();
    hm_cmd->add_option("--kind", hm_kind, "attention|confusion");

    try {
        app.parse(argc, argv);
        if (*seed_opt) args.seed = seed_value;
        if (generate->parsed()) return cmd_generate(args);
        if (pretrain->parsed()) return cmd_pretrain(args);
        if (train_cmd->parsed()) return cmd_train(args);
        if (adapt_cmd->parsed()) return cmd_adapt(args);
        if (decode_cmd->parsed()) return cmd_decode(args, decode_widths);
        if (eval_cmd->parsed()) return cmd_evaluate(args, eval_widths);
        if (dump_cmd->parsed()) return cmd_dump_attention(args, instance);
        if (grad_cmd->parsed()) return cmd_gradcheck(args);
        if (hm_cmd->parsed()) return cmd_render_heatmap(hm_in, hm_out, hm_kind);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
