// qinv_cli: dataset generation, training, sweeps and process tomography for
// learned quasi-inverses of qubit channels.
//
// Exit codes: 0 success, 1 config error, 2 numeric failure, 3 I/O error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qinv/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct CommonOptions {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App *cmd, CommonOptions &opts, bool config_required) {
    auto *config = cmd->add_option("--config", opts.config, "Experiment config (JSON)");
    if (config_required) {
        config->required();
    }
    cmd->add_option("--out", opts.out, "Output directory");
    cmd->add_option("--seed", opts.seed, "Override the config seed");
}

qinv::ExperimentConfig resolve_config(const CommonOptions &opts, qinv::fs::path &out) {
    qinv::ExperimentConfig config = qinv::load_config(opts.config);
    if (opts.seed) {
        config.seed = *opts.seed;
        config.train.seed = *opts.seed;
    }
    if (!opts.out.empty()) {
        out = opts.out;
    } else if (!config.output_dir.empty()) {
        out = config.output_dir;
    } else {
        throw qinv::ConfigError("no output directory: pass --out or set output_dir");
    }
    return config;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Learned quasi-inverses of single-qubit channels"};
    app.require_subcommand(1);

    CommonOptions gen_opts, train_opts, sweep_opts, tomo_opts;
    std::string run_dir;

    auto *gen = app.add_subcommand("gen-data", "Write random-state datasets as CSV");
    add_common(gen, gen_opts, true);
    auto *train = app.add_subcommand("train", "Train one network per noise value");
    add_common(train, train_opts, true);
    auto *sweep = app.add_subcommand("sweep", "Train and evaluate over the noise grid");
    add_common(sweep, sweep_opts, true);
    auto *tomo = app.add_subcommand("tomography", "Process tomography of a run artifact");
    add_common(tomo, tomo_opts, false);
    tomo->add_option("--run", run_dir, "Run artifact directory (defaults to --out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        qinv::fs::path out;
        if (gen->parsed()) {
            qinv::cmd_gen_data(resolve_config(gen_opts, out), out);
        } else if (train->parsed()) {
            qinv::cmd_train(resolve_config(train_opts, out), out);
        } else if (sweep->parsed()) {
            qinv::cmd_sweep(resolve_config(sweep_opts, out), out);
        } else if (tomo->parsed()) {
            if (tomo_opts.out.empty()) {
                throw qinv::ConfigError("tomography needs --out");
            }
            qinv::fs::path run = run_dir.empty() ? qinv::fs::path(tomo_opts.out) : qinv::fs::path(run_dir);
            qinv::cmd_tomography(run, tomo_opts.out);
        }
    } catch (const qinv::ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const qinv::NumericError &e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const qinv::IoError &e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
