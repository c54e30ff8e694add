#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fragility/app/commands.hpp"

namespace app = fragility::app;

int main(int argc, char** argv) {
    CLI::App cli{"Synthetic ground motions, shear-frame response and seismic fragility curves"};
    cli.require_subcommand(1);

    app::CliOptions opt;
    std::string units;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string out;
    std::string config;

    auto common = [&](CLI::App* sub, bool takes_inputs, const char* inputs_help) {
        sub->add_option("--config", config, "configuration file (INI sections run, ground_motion, structure, fit, "
                                            "bootstrap)");
        sub->add_option("--seed", seed, "master seed, overrides run.seed");
        sub->add_option("--out", out, "output directory, overrides run.output");
        sub->add_option("--threads", threads, "worker threads (0 = all cores); results do not depend on it");
        sub->add_flag("--plot", opt.plot, "write SVG charts next to the curve tables");
        sub->add_option("--units", units, "unit of two-column motion files: g or m/s2")
            ->check(CLI::IsMember({"g", "m/s2"}));
        if (takes_inputs) sub->add_option("inputs", opt.inputs, inputs_help);
    };
    common(cli.add_subcommand("generate", "synthesize motions and a parameter summary"), false, "");
    common(cli.add_subcommand("simulate", "structural analysis of motion files into demand records"), true,
           "motion files or directories (default <out>/motions)");
    common(cli.add_subcommand("fit", "fragility curves from a demand-records CSV"), true,
           "records CSV (default <out>/records.csv)");
    common(cli.add_subcommand("bootstrap", "bootstrap bands from a demand-records CSV"), true,
           "records CSV (default <out>/records.csv)");
    common(cli.add_subcommand("pipeline", "generate, simulate, fit and bootstrap"), false, "");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.exit(e) == 0 ? 0 : 1;
    }

    try {
        auto* sub = cli.get_subcommands().front();
        if (sub->count("--config")) opt.config = config;
        if (sub->count("--seed")) opt.seed = seed;
        if (sub->count("--out")) opt.out = out;
        if (sub->count("--threads")) opt.threads = threads;
        if (sub->count("--units")) opt.units = app::parse_units(units);
        return app::run_command(sub->get_name(), opt);
    } catch (const fragility::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return app::exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(fragility::ErrorKind::Data);
    }
}
