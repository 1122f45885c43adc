#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "contextda/baselines.hpp"
#include "contextda/config.hpp"
#include "contextda/inference.hpp"
#include "contextda/metrics.hpp"
#include "contextda/synthetic.hpp"
#include "contextda/trainer.hpp"

namespace contextda::cli {

/// Raised for anything wrong with the configuration or the inputs; maps to
/// exit code 1. Everything else that escapes a command maps to exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// checkpoint
// ---------------------------------------------------------------------------

inline std::string join_sizes(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(v[i]);
    }
    return out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& s) {
    std::vector<std::size_t> out;
    for (const auto& cell : split_csv_line(s)) out.push_back(std::stoull(cell));
    return out;
}

inline void save_checkpoint(const std::string& path, const DetectorBundle& bundle,
                            const QNetwork& q, const ActionCounter& counter, std::size_t k_max,
                            const std::vector<std::size_t>& q_hidden, double learning_rate,
                            nn::UpdateRule rule) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << "contextda-checkpoint v1\n";
    out << "d_source " << bundle.d_source << "\n";
    out << "d_target " << bundle.d_target << "\n";
    out << "k_max " << k_max << "\n";
    out << "learning_rate " << format_float_exact(learning_rate) << "\n";
    out << "update_rule " << (rule == nn::UpdateRule::adam ? "adam" : "sgd") << "\n";
    out << "latent " << bundle.sizes.latent << "\n";
    out << "enc_hidden " << join_sizes(bundle.sizes.enc_hidden) << "\n";
    out << "dec_hidden " << join_sizes(bundle.sizes.dec_hidden) << "\n";
    out << "cls_hidden " << join_sizes(bundle.sizes.cls_hidden) << "\n";
    out << "ae_hidden " << join_sizes(bundle.sizes.ae_hidden) << "\n";
    out << "dropout " << format_float_exact(bundle.sizes.dropout) << "\n";
    out << "q_hidden " << join_sizes(q_hidden) << "\n";
    out << "counter_total " << counter.total << "\n";
    out << "counter";
    for (long long c : counter.counts) out << ' ' << c;
    out << "\n";
    bundle.save(out);
    auto q_mutable = const_cast<QNetwork&>(q);
    nn::ParamRefs q_params = q_mutable.net.params();
    nn::save_params(out, nn::ConstParamRefs(q_params.begin(), q_params.end()));
}

struct LoadedCheckpoint {
    DetectorBundle bundle;
    QNetwork q;
    ActionCounter counter;
    std::size_t k_max = 0;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("checkpoint '" + path + "' does not exist");
    std::string header;
    std::getline(in, header);
    if (header != "contextda-checkpoint v1")
        throw ValidationError("'" + path + "' is not a checkpoint file");

    std::map<std::string, std::string> fields;
    for (int i = 0; i < 14; ++i) {
        std::string line;
        std::getline(in, line);
        const auto sp = line.find(' ');
        if (sp == std::string::npos) throw std::runtime_error("checkpoint: malformed header line");
        fields[line.substr(0, sp)] = line.substr(sp + 1);
    }

    DetectorSizes sizes;
    sizes.latent = std::stoull(fields.at("latent"));
    sizes.enc_hidden = parse_sizes(fields.at("enc_hidden"));
    sizes.dec_hidden = parse_sizes(fields.at("dec_hidden"));
    sizes.cls_hidden = parse_sizes(fields.at("cls_hidden"));
    sizes.ae_hidden = parse_sizes(fields.at("ae_hidden"));
    sizes.dropout = std::stod(fields.at("dropout"));
    const double lr = std::stod(fields.at("learning_rate"));
    const nn::UpdateRule rule =
        fields.at("update_rule") == "sgd" ? nn::UpdateRule::sgd : nn::UpdateRule::adam;
    const std::size_t k_max = std::stoull(fields.at("k_max"));

    LoadedCheckpoint ckpt{
        DetectorBundle(std::stoull(fields.at("d_source")), std::stoull(fields.at("d_target")),
                       sizes, lr, 0, rule),
        QNetwork(2 * sizes.latent, parse_sizes(fields.at("q_hidden")), k_max * k_max, lr, 0, rule),
        ActionCounter(k_max), k_max};

    ckpt.counter.total = std::stoll(fields.at("counter_total"));
    {
        std::istringstream cs(fields.at("counter"));
        for (auto& c : ckpt.counter.counts)
            if (!(cs >> c)) throw std::runtime_error("checkpoint: truncated action counter");
    }
    ckpt.bundle.load(in);
    auto q_params = ckpt.q.net.params();
    nn::load_params(in, q_params);
    return ckpt;
}

// ---------------------------------------------------------------------------
// dataset assembly
// ---------------------------------------------------------------------------

inline std::vector<int> load_labels_csv(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || lines[0] != "label")
        throw ValidationError("labels file '" + path + "' must have a single 'label' column");
    std::vector<int> labels;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const double v = parse_double_cell(lines[i], i + 1, 1);
        if (v != 0.0 && v != 1.0)
            throw ValidationError("labels file '" + path + "': value outside {0,1} at row " +
                                  std::to_string(i + 1));
        labels.push_back(static_cast<int>(v));
    }
    return labels;
}

/// Builds the normalized domain pair the commands operate on, from either the
/// synthetic spec or the CSV paths in the config. Source labels are demanded
/// only where every code path needs them (training); comparison lets
/// dual-domain methods fail individually.
inline DomainPair load_dataset(const RunConfig& cfg, bool require_source_labels = true) {
    DomainPair pair;
    if (cfg.has_csv_data()) {
        if (!cfg.has("data.source") || !cfg.has("data.target"))
            throw ValidationError("both data.source and data.target are required");
        const std::string src_path = cfg.get_string("data.source");
        const std::string tgt_path = cfg.get_string("data.target");
        try {
            pair.source = load_csv(src_path);
            pair.target = load_csv(tgt_path);
        } catch (const std::exception& e) {
            throw ValidationError(e.what());
        }
        if (require_source_labels && !pair.source.labels)
            throw ValidationError("source file '" + src_path + "' has no label column");
        if (pair.target.labels) {
            // held out: evaluation may use them, training never sees them
            pair.target_labels = std::move(pair.target.labels);
            pair.target.labels.reset();
        }
        if (cfg.has("data.target_labels")) {
            pair.target_labels = load_labels_csv(cfg.get_string("data.target_labels"));
            if (pair.target_labels->size() != pair.target.length())
                throw ValidationError("target labels length does not match target series");
        }
    } else if (cfg.has_synthetic()) {
        try {
            pair = generate_synthetic(cfg.synthetic_spec());
        } catch (const std::exception& e) {
            throw ValidationError(e.what());
        }
    } else {
        throw ValidationError("config must provide data.* paths or a synthetic.* spec");
    }
    pair.source = normalize(pair.source);
    pair.target = normalize(pair.target);
    return pair;
}

// ---------------------------------------------------------------------------
// output writers
// ---------------------------------------------------------------------------

inline void write_report_csv(const std::string& path, const TrainReport& report) {
    CsvWriter csv(path);
    csv.write_row({"epoch", "t", "action_m", "action_n", "reward", "loss_cls", "loss_recon",
                   "loss_align", "loss_disc", "td_loss"});
    for (const auto& s : report.steps)
        csv.write_row({std::to_string(s.epoch), std::to_string(s.t), std::to_string(s.action_m),
                       std::to_string(s.action_n), format_float(s.reward), format_float(s.losses.cls),
                       format_float(s.losses.recon), format_float(s.losses.align),
                       format_float(s.losses.disc), format_float(s.td_loss)});
}

inline void write_scores_csv(const std::string& path, const ScoreSeries& scores,
                             const PredictionSeries& preds) {
    CsvWriter csv(path);
    csv.write_row({"t", "window_n", "score", "prediction"});
    for (std::size_t t = 0; t < scores.scores.size(); ++t)
        csv.write_row({std::to_string(t), std::to_string(scores.window_sizes[t]),
                       format_float(scores.scores[t]), std::to_string(preds.predictions[t])});
}

inline std::string sanitize(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c))) c = '_';
    return out;
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

struct CommandOptions {
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;   // overrides train.seed
    std::string checkpoint;              // overrides the default checkpoint path
};

inline TrainConfig effective_train_config(const RunConfig& cfg, const CommandOptions& opts) {
    TrainConfig train_cfg = cfg.train_config();
    if (opts.seed) train_cfg.seed = *opts.seed;
    return train_cfg;
}

/// generate: writes source.csv, target.csv and target_labels.csv from the
/// synthetic spec. Byte-identical on rerun.
inline int cmd_generate(const RunConfig& cfg, const CommandOptions& opts) {
    DomainPair pair;
    try {
        if (!cfg.has_synthetic()) throw ValidationError("generate requires a synthetic.* spec");
        pair = generate_synthetic(cfg.synthetic_spec());
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        std::filesystem::create_directories(opts.out_dir);
        const auto dir = std::filesystem::path(opts.out_dir);
        {
            CsvWriter csv((dir / "source.csv").string());
            std::vector<std::string> header;
            for (std::size_t c = 0; c < pair.source.dims(); ++c)
                header.push_back("f" + std::to_string(c));
            header.push_back("label");
            csv.write_row(header);
            for (std::size_t t = 0; t < pair.source.length(); ++t) {
                std::vector<std::string> row;
                for (std::size_t c = 0; c < pair.source.dims(); ++c)
                    row.push_back(format_float(pair.source.values(t, c)));
                row.push_back(std::to_string((*pair.source.labels)[t]));
                csv.write_row(row);
            }
        }
        {
            CsvWriter csv((dir / "target.csv").string());
            std::vector<std::string> header;
            for (std::size_t c = 0; c < pair.target.dims(); ++c)
                header.push_back("f" + std::to_string(c));
            csv.write_row(header);
            for (std::size_t t = 0; t < pair.target.length(); ++t) {
                std::vector<std::string> row;
                for (std::size_t c = 0; c < pair.target.dims(); ++c)
                    row.push_back(format_float(pair.target.values(t, c)));
                csv.write_row(row);
            }
        }
        {
            CsvWriter csv((dir / "target_labels.csv").string());
            csv.write_row({"label"});
            for (int y : *pair.target_labels) csv.write_row({std::to_string(y)});
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

/// train: runs the full training loop and writes checkpoint.txt, report.csv
/// and summary.txt.
inline int cmd_train(const RunConfig& cfg, const CommandOptions& opts) {
    DomainPair pair;
    TrainConfig train_cfg;
    try {
        pair = load_dataset(cfg);
        train_cfg = effective_train_config(cfg, opts);
        if (train_cfg.k_max > std::min(pair.source.length(), pair.target.length()))
            throw ValidationError("train.k_max exceeds the shortest domain length");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const TrainResult result = train(pair, train_cfg);
        std::filesystem::create_directories(opts.out_dir);
        const auto dir = std::filesystem::path(opts.out_dir);
        const std::string ckpt_path =
            opts.checkpoint.empty() ? (dir / "checkpoint.txt").string() : opts.checkpoint;
        save_checkpoint(ckpt_path, result.bundle, result.q, result.counter, train_cfg.k_max,
                        train_cfg.agent.q_hidden, train_cfg.learning_rate, train_cfg.update_rule);
        write_report_csv((dir / "report.csv").string(), result.report);

        std::ofstream summary(dir / "summary.txt");
        summary << "seed=" << train_cfg.seed << "\n";
        summary << "epochs=" << train_cfg.epochs << "\n";
        summary << "k_max=" << train_cfg.k_max << "\n";
        summary << "steps=" << result.report.steps.size() << "\n";
        summary << "counter_total=" << result.counter.total << "\n";
        if (result.counter.total > 0)
            summary << "most_frequent_source_window=" << most_frequent_source_window(result.counter)
                    << "\n";
        summary << "wall_seconds=" << format_float(result.report.wall_seconds) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

/// evaluate: scores the target series with a trained checkpoint, thresholds
/// at the configured contamination and writes scores.csv plus metrics.txt.
inline int cmd_evaluate(const RunConfig& cfg, const CommandOptions& opts) {
    DomainPair pair;
    std::optional<LoadedCheckpoint> ckpt;
    double contamination = 0.1;
    try {
        pair = load_dataset(cfg, /*require_source_labels=*/false);
        contamination = cfg.contamination();
        if (!(contamination > 0.0 && contamination <= 0.5))
            throw ValidationError("eval.contamination must lie in (0, 0.5]");
        const std::string ckpt_path =
            opts.checkpoint.empty()
                ? (std::filesystem::path(opts.out_dir) / "checkpoint.txt").string()
                : opts.checkpoint;
        ckpt.emplace(load_checkpoint(ckpt_path));
        if (ckpt->bundle.d_target != pair.target.dims() ||
            ckpt->bundle.d_source != pair.source.dims())
            throw ValidationError("checkpoint dimensions do not match the dataset");
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const ScoreSeries scores =
            infer_scores(ckpt->bundle, ckpt->q, ckpt->counter, pair.target, pair.source);
        const PredictionSeries preds = threshold_scores(scores, contamination);

        std::filesystem::create_directories(opts.out_dir);
        const auto dir = std::filesystem::path(opts.out_dir);
        write_scores_csv((dir / "scores.csv").string(), scores, preds);

        std::ofstream summary(dir / "metrics.txt");
        if (pair.target_labels) {
            summary << "macro_f1=" << format_float(macro_f1(preds.predictions, *pair.target_labels))
                    << "\n";
            summary << "auc=" << format_float(auc(scores.scores, *pair.target_labels)) << "\n";
        } else {
            summary << "macro_f1=unavailable\n";
            summary << "auc=unavailable\n";
        }
        summary << "contamination=" << format_float(contamination) << "\n";
        summary << "seed="
                << (opts.seed ? static_cast<long long>(*opts.seed) : cfg.get_int("train.seed", 0))
                << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

/// compare: runs each configured method over every seed, writing results.csv
/// (detail + per-method mean rows), long.csv in plot-ready long format, one
/// scores CSV per cell, and a timing log.
inline int cmd_compare(const RunConfig& cfg, const CommandOptions& opts) {
    DomainPair pair;
    TrainConfig train_cfg;
    std::vector<BaselineKind> kinds;
    std::vector<std::uint64_t> seeds;
    double contamination = 0.1;
    std::size_t fixed_window = 0, threads = 1;
    try {
        pair = load_dataset(cfg, /*require_source_labels=*/false);
        if (!pair.target_labels)
            throw ValidationError("compare requires target labels (data.target_labels)");
        train_cfg = effective_train_config(cfg, opts);
        if (train_cfg.k_max > std::min(pair.source.length(), pair.target.length()))
            throw ValidationError("train.k_max exceeds the shortest domain length");
        kinds = cfg.compare_methods();
        if (kinds.empty()) throw ValidationError("compare.methods must list at least one method");
        seeds = cfg.get_seed_list("compare.seeds");
        if (seeds.empty()) throw ValidationError("compare.seeds must list at least one seed");
        contamination = cfg.contamination();
        fixed_window = static_cast<std::size_t>(cfg.get_int("compare.fixed_window", 0));
        threads = static_cast<std::size_t>(cfg.get_int("compare.threads", 1));
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        const auto cells = compare(kinds, pair, train_cfg, contamination, seeds, fixed_window,
                                   threads);
        std::filesystem::create_directories(opts.out_dir);
        const auto dir = std::filesystem::path(opts.out_dir);

        {
            CsvWriter csv((dir / "results.csv").string());
            csv.write_row({"method", "seed", "macro_f1", "auc", "status"});
            for (const auto& cell : cells)
                csv.write_row({cell.method, std::to_string(cell.seed),
                               cell.failed ? "failed" : format_float(cell.macro_f1),
                               cell.failed ? "failed" : format_float(cell.auc_score),
                               cell.failed ? "failed" : "ok"});
            for (std::size_t k = 0; k < kinds.size(); ++k) {
                double f1 = 0.0, a = 0.0;
                std::size_t n = 0;
                for (std::size_t s = 0; s < seeds.size(); ++s) {
                    const auto& cell = cells[k * seeds.size() + s];
                    if (cell.failed) continue;
                    f1 += cell.macro_f1;
                    a += cell.auc_score;
                    ++n;
                }
                if (n > 0)
                    csv.write_row({baseline_name(kinds[k]), "mean",
                                   format_float(f1 / static_cast<double>(n)),
                                   format_float(a / static_cast<double>(n)), "ok"});
                else
                    csv.write_row({baseline_name(kinds[k]), "mean", "failed", "failed", "failed"});
            }
        }
        {
            CsvWriter csv((dir / "long.csv").string());
            csv.write_row({"method", "seed", "metric", "value"});
            for (const auto& cell : cells) {
                if (cell.failed) continue;
                csv.write_row({cell.method, std::to_string(cell.seed), "macro_f1",
                               format_float(cell.macro_f1)});
                csv.write_row(
                    {cell.method, std::to_string(cell.seed), "auc", format_float(cell.auc_score)});
            }
        }
        for (const auto& cell : cells) {
            if (cell.failed) continue;
            const PredictionSeries preds = threshold_scores(cell.scores, contamination);
            write_scores_csv(
                (dir / ("scores_" + sanitize(cell.method) + "_" + std::to_string(cell.seed) + ".csv"))
                    .string(),
                cell.scores, preds);
        }
        {
            std::ofstream log(dir / "timings.txt");
            for (const auto& cell : cells)
                log << cell.method << " seed=" << cell.seed << " "
                    << format_float(cell.runtime_s) << "s"
                    << (cell.failed ? " failed: " + cell.error : "") << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace contextda::cli
