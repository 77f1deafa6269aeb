#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "gpcover/cli.hpp"
#include "gpcover/config.hpp"

namespace {

struct Flags {
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t iters = 0;
    std::size_t trials = 0;
    double epsilon = 0.0;
    double alpha = 0.0;
};

void add_common(CLI::App* cmd, Flags& flags) {
    cmd->add_option("--config", flags.config, "scenario config file")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--seed", flags.seed, "override the config seed");
    cmd->add_option("--out", flags.out, "output directory");
    cmd->add_option("--iters", flags.iters, "override max iterations");
}

bool passed(const CLI::App* cmd, const std::string& name) {
    const CLI::Option* opt = cmd->get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
}

gpcover::CliConfig load_with_overrides(const CLI::App* cmd, const Flags& flags) {
    gpcover::CliConfig cfg = gpcover::load_config(flags.config);
    if (passed(cmd, "--seed")) cfg.scenario.seed = flags.seed;
    if (passed(cmd, "--out")) cfg.out_dir = flags.out;
    if (passed(cmd, "--iters")) cfg.scenario.max_iters = flags.iters;
    if (passed(cmd, "--trials")) cfg.trials = flags.trials;
    if (passed(cmd, "--epsilon")) cfg.epsilon = flags.epsilon;
    if (passed(cmd, "--alpha")) cfg.alpha = flags.alpha;
    cfg.scenario.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"estimation-and-coverage simulation"};
    app.require_subcommand(1);

    Flags flags;

    CLI::App* simulate =
        app.add_subcommand("simulate", "run the full estimation-and-coverage loop");
    add_common(simulate, flags);

    CLI::App* lloyd =
        app.add_subcommand("lloyd", "run pure Lloyd descent on the true field");
    add_common(lloyd, flags);

    CLI::App* experiment = app.add_subcommand("experiment", "verification studies");
    experiment->require_subcommand(1);

    CLI::App* decay = experiment->add_subcommand(
        "variance-decay", "fraction of trials reaching a variance level, per t");
    add_common(decay, flags);
    decay->add_option("--trials", flags.trials, "number of independent seeds");
    decay->add_option("--epsilon", flags.epsilon, "target max grid variance");

    CLI::App* rkhs = experiment->add_subcommand(
        "rkhs-consistency", "estimator error vs sample count on one exploration");
    add_common(rkhs, flags);
    rkhs->add_option("--alpha", flags.alpha, "regularization decay exponent");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return gpcover::cmd_simulate(load_with_overrides(simulate, flags),
                                         std::cout);
        }
        if (lloyd->parsed()) {
            return gpcover::cmd_lloyd(load_with_overrides(lloyd, flags), std::cout);
        }
        if (decay->parsed()) {
            return gpcover::cmd_variance_decay(load_with_overrides(decay, flags),
                                               std::cout);
        }
        if (rkhs->parsed()) {
            return gpcover::cmd_rkhs_consistency(load_with_overrides(rkhs, flags),
                                                 std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
