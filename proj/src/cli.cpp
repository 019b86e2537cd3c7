#include <CLI11.hpp>
#include <iostream>

#include "rabistark/config.hpp"
#include "rabistark/version.hpp"

namespace rabistark {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitConvergence = 4;

const char* kind_name(RunKind k) {
    switch (k) {
        case RunKind::Scan: return "scan";
        case RunKind::Trace: return "trace";
        case RunKind::IonCompare: return "ion-compare";
        case RunKind::Channels: return "channels";
    }
    return "?";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Rabi-Stark model simulator: resonance scans, population traces, "
                 "dissipative dynamics and the trapped-ion realization"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> overrides;
    std::map<std::string, RunKind> kinds = {{"scan", RunKind::Scan},
                                            {"trace", RunKind::Trace},
                                            {"ion-compare", RunKind::IonCompare},
                                            {"channels", RunKind::Channels}};
    for (const auto& [name, kind] : kinds) {
        auto* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
        sub->add_option("--config", config_path, "experiment definition (JSON)")->required();
        sub->add_option("--set", overrides, "override a config key, e.g. --set scan.step=0.005");
        sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string chosen = app.get_subcommands().front()->get_name();
    try {
        RunConfig cfg = load_config_file(config_path, overrides);
        if (kind_name(cfg.kind) != chosen)
            throw ConfigError("config kind '" + std::string(kind_name(cfg.kind)) +
                              "' does not match subcommand '" + chosen + "'");
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        execute(cfg);
        std::cout << "wrote " << cfg.out_dir << "/data.csv and manifest.json\n";
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const SingularChannelError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace rabistark
