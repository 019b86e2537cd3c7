#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rabistark/experiments.hpp"

namespace rabistark {

enum class RunKind { Scan, Trace, IonCompare, Channels };

struct ChannelsBlock {
    int k = 3;
    int n_min = 0;
    int n_max = 0;
    ModelParams params;
};

// One validated experiment definition. Exactly one parameter block style is
// allowed per run: model units (omega = 1) or ion drive units (angular kHz).
struct RunConfig {
    RunKind kind = RunKind::Scan;
    std::optional<ScanSpec> scan;
    std::optional<TraceSpec> trace;
    std::optional<IonCompareSpec> ion_compare;
    std::optional<ChannelsBlock> channels;
    std::string out_dir = "out";
    std::string echo;  // merged config as canonical JSON text
};

// Parse + validate a JSON config (comments allowed). Throws ConfigError with
// the JSON path of the offending key. `overrides` are dotted "a.b.c=value"
// assignments applied before validation.
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

RunConfig load_config_file(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

// Execute a run and write data.csv (+ peaks.csv for scans) and manifest.json
// into out_dir. Partial outputs are removed on failure.
void execute(const RunConfig& config);

// Exit codes: 0 ok, 2 config, 3 numeric, 4 convergence.
int run_cli(int argc, const char* const* argv);

}  // namespace rabistark
