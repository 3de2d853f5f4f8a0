#include <CLI11.hpp>

#include <iostream>

#include "plab/cli.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Experiments for p-Laplace Schroedinger problems with L1 data"};
    app.require_subcommand(1);

    std::optional<std::filesystem::path> config_path;
    plab::cli::Overrides o;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--out", o.out, "output directory (overrides 'out')");
        sub->add_option("--seed", o.seed, "random seed (overrides 'seed')");
        sub->add_option("--tol", o.tol, "tolerance (overrides 'tol')");
        sub->add_option("--threads", o.threads, "worker threads (overrides 'threads')")->check(CLI::PositiveNumber);
    };

    auto* solve = app.add_subcommand("solve", "minimize the discrete energy once");
    auto* pipeline = app.add_subcommand("pipeline", "truncation scheme with all estimate checks");
    auto* confinement = app.add_subcommand("confinement", "bad-set measures of a potential");
    auto* compactness = app.add_subcommand("compactness", "compactness diagnostics for a family");
    auto* verify = app.add_subcommand("verify", "run the verification suites");
    for (auto* sub : {solve, pipeline, confinement, compactness, verify}) common(sub);
    pipeline->add_flag("--debug-halve-stability-constant", o.halve_stability_constant,
                       "use C_p / 2 in the stability check (forces a failure)");
    verify->add_option("--suite", o.suite, "run only this suite");

    CLI11_PARSE(app, argc, argv);

    const std::string name = app.get_subcommands().front()->get_name();
    nlohmann::json config;
    try {
        config = plab::cli::apply_overrides(plab::cli::load_config(config_path), o);
    } catch (const plab::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return plab::cli::kConfigFailure;
    }
    return plab::cli::run(name, config, std::cout);
}
