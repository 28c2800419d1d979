// lteval: run, sweep and plot learning-tradeoff experiments.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lteval/lteval.h"

namespace {

int exit_code(lteval_status s) {
    switch (s) {
    case LTEVAL_OK: return 0;
    case LTEVAL_ERR_CONFIG: return 1;
    case LTEVAL_ERR_PARTIAL: return 3;
    case LTEVAL_ERR_INVALID_ARG: return 1;
    default: return 2;
    }
}

int report(lteval_status s) {
    if (s != LTEVAL_OK) std::fprintf(stderr, "lteval: %s\n", lteval_last_error());
    return exit_code(s);
}

lteval_status open(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out_dir,
                   lteval_experiment** exp) {
    auto s = lteval_experiment_open(path.c_str(), exp);
    if (s != LTEVAL_OK) return s;
    if (seed) s = lteval_experiment_set_seed(*exp, *seed);
    if (s == LTEVAL_OK && !out_dir.empty()) s = lteval_experiment_set_output_dir(*exp, out_dir.c_str());
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluate batch and streaming learners on performance and emissions"};
    app.set_version_flag("--version", std::string(lteval_version()));
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::string out_dir;
    app.add_option("--seed", seed, "Override the config seed");
    app.add_option("--out-dir", out_dir, "Output directory (default: $LTEVAL_OUTPUT_ROOT/<run_id>)");

    std::string config;
    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("config", config, "Experiment config (YAML or a previous manifest.json)")->required();
    run->fallthrough();

    auto* sweep = app.add_subcommand("sweep", "Run every cell of a config grid");
    sweep->add_option("config", config, "Experiment config with a grid section")->required();
    sweep->fallthrough();

    std::vector<std::string> dirs;
    std::string plot_out;
    auto* plot = app.add_subcommand("plot", "Write trade-off plots for result directories");
    plot->add_option("dirs", dirs, "Result directories containing checkpoints.csv")->required();
    plot->add_option("-o,--output", plot_out, "Output SVG path (a .csv path writes the CSV there instead)")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (*plot) {
        std::vector<const char*> ptrs;
        for (const auto& d : dirs) ptrs.push_back(d.c_str());
        const auto s = lteval_plot(ptrs.data(), ptrs.size(), plot_out.c_str());
        if (s == LTEVAL_OK) std::printf("wrote %s\n", plot_out.c_str());
        return report(s);
    }

    lteval_experiment* exp = nullptr;
    auto s = open(config, seed, out_dir, &exp);
    if (s != LTEVAL_OK) {
        lteval_experiment_close(exp);
        return report(s);
    }

    if (*run) {
        s = lteval_experiment_run(exp);
        const auto n = lteval_experiment_checkpoint_count(exp);
        if (s == LTEVAL_OK || n > 0)
            std::printf("%s: %zu checkpoints\n", lteval_experiment_output_dir(exp), n);
    } else {
        std::size_t cells = 0, failures = 0;
        s = lteval_experiment_sweep(exp, &cells, &failures);
        if (s == LTEVAL_OK || s == LTEVAL_ERR_PARTIAL)
            std::printf("%s: %zu cells, %zu failed\n", lteval_experiment_output_dir(exp), cells, failures);
    }
    lteval_experiment_close(exp);
    return report(s);
}
