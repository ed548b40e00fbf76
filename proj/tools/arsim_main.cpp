#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arsim/arsim.hpp"

namespace {

arsim::RunConfig load_with_overrides(const std::string& config_path, const std::string& out_dir,
                                     int cadence) {
    arsim::RunConfig cfg = arsim::load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (cadence > 0) cfg.cadence = cadence;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace arsim;

    CLI::App app{"arsim - pseudospectral Aw-Rascle solver on the periodic torus"};
    app.require_subcommand(1);

    std::string config_path, out_dir, ref;
    int cadence = 0;
    bool strict = false;
    double perturb = 0.0;
    std::vector<std::string> snapshots;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides config)");
        sub->add_option("--cadence", cadence, "observer cadence in steps (overrides config)");
        sub->add_flag("--strict", strict, "abort on the first invariant failure");
    };

    CLI::App* run = app.add_subcommand("run", "integrate one configuration");
    add_common(run, true);

    CLI::App* sweep = app.add_subcommand("sweep", "run the [sweep] axes of a configuration");
    add_common(sweep, true);

    CLI::App* compare =
        app.add_subcommand("compare", "relative-energy study against a reference");
    add_common(compare, true);
    compare->add_option("--ref", ref, "reference: snapshot directory or config file")
        ->required();
    compare->add_option("--perturb", perturb, "perturbation amplitude for the run initial data");

    CLI::App* check = app.add_subcommand("check", "recompute diagnostics from snapshots");
    check->add_option("snapshots", snapshots, "snapshot files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : commands::kExitConfig;
    }

    try {
        if (run->parsed())
            return commands::cmd_run(load_with_overrides(config_path, out_dir, cadence), strict,
                                     std::cout, std::cerr);
        if (sweep->parsed())
            return commands::cmd_sweep(load_with_overrides(config_path, out_dir, cadence),
                                       strict, std::cout, std::cerr);
        if (compare->parsed())
            return commands::cmd_compare(load_with_overrides(config_path, out_dir, cadence), ref,
                                         perturb, strict, std::cout, std::cerr);
        if (check->parsed()) return commands::cmd_check(snapshots, std::cout, std::cerr);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return commands::kExitConfig;
    } catch (const InvariantError& e) {
        std::cerr << "invariant failure: " << e.what() << "\n";
        return commands::kExitInvariant;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return commands::kExitRuntime;
    }
    return commands::kExitConfig;
}
