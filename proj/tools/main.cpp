#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>

#include "bandsim/cli.hpp"

namespace {

struct CliArgs {
    std::string config;
    std::string input;
    std::string output;
    std::string ref;
    std::uint64_t seed = 0;
    int workers = 0;
    bool crop512 = false;
};

void add_common(CLI::App* cmd, CliArgs& args) {
    cmd->add_option("--config", args.config, "JSON config file (flags override it)");
    cmd->add_option("-i,--input", args.input, "input directory");
    cmd->add_option("-o,--output", args.output, "output directory");
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--workers", args.workers, "worker threads (0 = all cores)");
}

// Config file first, explicit flags second.
bandsim::RunConfig resolve(CLI::App* cmd, const CliArgs& args) {
    bandsim::RunConfig cfg;
    if (!args.config.empty()) cfg = bandsim::load_config(args.config);
    auto passed = [cmd](const char* name) {
        const CLI::Option* opt = cmd->get_option_no_throw(name);
        return opt && opt->count() > 0;
    };
    if (passed("--input")) cfg.input_dir = args.input;
    if (passed("--output")) cfg.output_dir = args.output;
    if (passed("--ref")) cfg.ref_dir = args.ref;
    if (passed("--seed")) cfg.master_seed = args.seed;
    if (passed("--workers")) cfg.workers = args.workers;
    if (passed("--crop512")) cfg.crop512 = args.crop512;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bandsim: flicker-banding synthesis, band decomposition, and quality scoring"};
    app.require_subcommand(1);
    CliArgs args;

    CLI::App* synth = app.add_subcommand("synth", "synthesize degraded/clean training pairs");
    add_common(synth, args);

    CLI::App* decompose = app.add_subcommand("decompose", "split images into low/mid/high frequency bands");
    add_common(decompose, args);

    CLI::App* taloss = app.add_subcommand("taloss", "trajectory-alignment loss on .lq/.gt MFG4 fixture pairs");
    add_common(taloss, args);

    CLI::App* evaluate = app.add_subcommand("evaluate", "full-reference metrics for restored vs ground truth");
    add_common(evaluate, args);
    evaluate->add_option("--ref", args.ref, "ground-truth directory");
    evaluate->add_flag("--crop512", args.crop512, "center-crop both sides to 512x512 before scoring");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return bandsim::run_synth(resolve(synth, args));
        if (decompose->parsed()) return bandsim::run_decompose(resolve(decompose, args));
        if (taloss->parsed()) return bandsim::run_taloss(resolve(taloss, args));
        if (evaluate->parsed()) return bandsim::run_evaluate(resolve(evaluate, args));
    } catch (const std::exception& e) {
        std::cerr << "[bandsim] error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
