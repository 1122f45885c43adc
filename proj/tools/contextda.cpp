// Experiment front end: generate | train | evaluate | compare.

#include <CLI11.hpp>

#include <iostream>

#include "contextda/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Context-sampling domain adaptation for time series anomaly detection"};
    app.require_subcommand(1);

    std::string config_path;
    contextda::cli::CommandOptions opts;
    std::int64_t seed_flag = -1;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "path to the key=value config file")->required();
        cmd->add_option("--out", opts.out_dir, "output directory (default: out)");
        cmd->add_option("--seed", seed_flag, "override train.seed");
        cmd->add_option("--checkpoint", opts.checkpoint, "checkpoint path");
    };

    auto* generate = app.add_subcommand("generate", "write synthetic source/target CSVs");
    auto* train = app.add_subcommand("train", "train and write checkpoint + report");
    auto* evaluate = app.add_subcommand("evaluate", "score a target series with a checkpoint");
    auto* compare = app.add_subcommand("compare", "run the configured methods over all seeds");
    for (auto* cmd : {generate, train, evaluate, compare}) add_common(cmd);

    CLI11_PARSE(app, argc, argv);

    contextda::RunConfig cfg;
    try {
        cfg = contextda::RunConfig::parse_file(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    if (seed_flag >= 0) opts.seed = static_cast<std::uint64_t>(seed_flag);

    if (generate->parsed()) return contextda::cli::cmd_generate(cfg, opts);
    if (train->parsed()) return contextda::cli::cmd_train(cfg, opts);
    if (evaluate->parsed()) return contextda::cli::cmd_evaluate(cfg, opts);
    if (compare->parsed()) return contextda::cli::cmd_compare(cfg, opts);
    return 1;
}
