// wasslip <gen-data|train|certify|attack|verify> --config <path> [--out <dir>] [--seed <u64>]

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "wasslip/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"wasslip: robust risk certificates, attacks and Lipschitz-regularized training"};
    app.require_subcommand(1);

    struct Options {
        std::string config;
        std::string out;
        std::uint64_t seed = 0;
    };
    Options opts;
    std::string chosen;
    for (const char* name : {"gen-data", "train", "certify", "attack", "verify"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opts.config, "JSON experiment config")->required();
        sub->add_option("--out", opts.out, "output directory (overrides config 'output')");
        sub->add_option("--seed", opts.seed, "master seed (overrides config 'seed')");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return wasslip::cli::kUsageError;
    }

    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    const CLI::App* sub = app.get_subcommand(chosen);
    if (sub->count("--out")) out = opts.out;
    if (sub->count("--seed")) seed = opts.seed;
    return wasslip::cli::run_command(chosen, opts.config, out, seed);
}
