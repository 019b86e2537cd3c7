#include "rabistark/config.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rabistark/version.hpp"

namespace rabistark {

namespace {

using nlohmann::json;

constexpr double kTwoPi = 2.0 * M_PI;

int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i)
        if (text[i] == '\n') ++line;
    return line;
}

// Schema whitelist; unknown keys are rejected with their JSON path.
const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"", {"kind", "model", "ion", "initial", "scan", "grid", "time", "dissipation",
              "observable", "numeric", "peaks", "channels", "output"}},
        {"/model", {"omega0", "omega", "gamma", "g"}},
        {"/ion", {"nu_khz", "eta", "omega_r_khz", "omega_b_khz", "omega_s_khz",
                  "delta_r_khz", "delta_b_khz", "phi_r", "phi_b", "phi_s", "ratio_tol"}},
        {"/scan", {"parameter", "start", "stop", "step"}},
        {"/grid", {"t_start", "t_end", "n_samples"}},
        {"/time", {"rule", "t", "k", "n", "branch", "mode"}},
        {"/dissipation", {"kappa"}},
        {"/numeric", {"n_max", "tol", "workers", "convergence_check"}},
        {"/peaks", {"min_prominence"}},
        {"/channels", {"k", "n_min", "n_max"}},
        {"/output", {"dir"}},
    };
    return s;
}

void check_unknown_keys(const json& j) {
    for (const auto& [section, keys] : schema()) {
        const json* node = &j;
        if (!section.empty()) {
            const json::json_pointer ptr(section);
            if (!j.contains(ptr)) continue;
            node = &j.at(ptr);
        }
        if (!node->is_object()) throw ConfigError("expected an object", section.empty() ? "/" : section);
        for (const auto& [key, value] : node->items()) {
            (void)value;
            if (!keys.count(key)) throw ConfigError("unknown key", section + "/" + key);
        }
    }
}

double number_at(const json& j, const std::string& path, std::optional<double> fallback = {}) {
    const json::json_pointer ptr(path);
    if (!j.contains(ptr)) {
        if (fallback) return *fallback;
        throw ConfigError("missing required number", path);
    }
    const json& v = j.at(ptr);
    if (!v.is_number()) throw ConfigError("expected a number", path);
    return v.get<double>();
}

int int_at(const json& j, const std::string& path, std::optional<int> fallback = {}) {
    const json::json_pointer ptr(path);
    if (!j.contains(ptr)) {
        if (fallback) return *fallback;
        throw ConfigError("missing required integer", path);
    }
    const json& v = j.at(ptr);
    if (!v.is_number_integer()) throw ConfigError("expected an integer", path);
    return v.get<int>();
}

std::string string_at(const json& j, const std::string& path, std::optional<std::string> fallback = {}) {
    const json::json_pointer ptr(path);
    if (!j.contains(ptr)) {
        if (fallback) return *fallback;
        throw ConfigError("missing required string", path);
    }
    const json& v = j.at(ptr);
    if (!v.is_string()) throw ConfigError("expected a string", path);
    return v.get<std::string>();
}

bool bool_at(const json& j, const std::string& path, bool fallback) {
    const json::json_pointer ptr(path);
    if (!j.contains(ptr)) return fallback;
    const json& v = j.at(ptr);
    if (!v.is_boolean()) throw ConfigError("expected a boolean", path);
    return v.get<bool>();
}

ModelParams model_block(const json& j) {
    try {
        return ModelParams(number_at(j, "/model/omega0"), number_at(j, "/model/omega", 1.0),
                           number_at(j, "/model/gamma", 0.0), number_at(j, "/model/g", 0.0));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), "/model");
    }
}

DrivePhase phase_at(const json& j, const std::string& path, DrivePhase fallback) {
    const json::json_pointer ptr(path);
    if (!j.contains(ptr)) return fallback;
    const std::string s = string_at(j, path);
    if (s == "0") return DrivePhase::Zero;
    if (s == "-pi") return DrivePhase::MinusPi;
    throw ConfigError("phase must be \"0\" or \"-pi\"", path);
}

IonDriveParams ion_block(const json& j) {
    IonDriveParams d;
    d.nu = kTwoPi * number_at(j, "/ion/nu_khz");
    d.eta = number_at(j, "/ion/eta");
    d.omega_r = kTwoPi * number_at(j, "/ion/omega_r_khz");
    d.omega_b = kTwoPi * number_at(j, "/ion/omega_b_khz");
    d.omega_s = kTwoPi * number_at(j, "/ion/omega_s_khz");
    d.delta_r = kTwoPi * number_at(j, "/ion/delta_r_khz");
    d.delta_b = kTwoPi * number_at(j, "/ion/delta_b_khz");
    d.phi_r = phase_at(j, "/ion/phi_r", DrivePhase::MinusPi);
    d.phi_b = phase_at(j, "/ion/phi_b", DrivePhase::MinusPi);
    d.phi_s = phase_at(j, "/ion/phi_s", DrivePhase::MinusPi);
    return d;
}

TimeGrid grid_block(const json& j) {
    try {
        return TimeGrid(number_at(j, "/grid/t_start", 0.0), number_at(j, "/grid/t_end"),
                        int_at(j, "/grid/n_samples"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what(), "/grid");
    }
}

TimeRule time_block(const json& j) {
    const std::string rule = string_at(j, "/time/rule");
    if (rule == "fixed") return TimeRule::fixed_time(number_at(j, "/time/t"));
    if (rule != "channel_pi") throw ConfigError("rule must be \"fixed\" or \"channel_pi\"", "/time/rule");
    const std::string branch = string_at(j, "/time/branch");
    if (branch != "plus" && branch != "minus") throw ConfigError("branch must be plus|minus", "/time/branch");
    const std::string mode = string_at(j, "/time/mode", std::string("per_point"));
    if (mode != "per_point" && mode != "panel") throw ConfigError("mode must be per_point|panel", "/time/mode");
    return TimeRule::channel_pi(int_at(j, "/time/k"), int_at(j, "/time/n"),
                                branch == "plus" ? Branch::Plus : Branch::Minus, mode == "per_point");
}

json parse_text(const std::string& text) {
    try {
        return json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError("syntax error at line " + std::to_string(line_of_byte(text, e.byte)) +
                          ": " + e.what());
    }
}

void apply_override(json& j, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override must look like section.key=value: " + assignment);
    std::string path = "/" + assignment.substr(0, eq);
    for (auto& c : path)
        if (c == '.') c = '/';
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw;  // plain string
    }
    j[json::json_pointer(path)] = value;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
    json j = parse_text(text);
    if (!j.is_object()) throw ConfigError("top level must be an object");
    for (const auto& o : overrides) apply_override(j, o);
    check_unknown_keys(j);

    RunConfig cfg;
    const std::string kind = string_at(j, "/kind");
    if (kind == "scan") cfg.kind = RunKind::Scan;
    else if (kind == "trace") cfg.kind = RunKind::Trace;
    else if (kind == "ion-compare") cfg.kind = RunKind::IonCompare;
    else if (kind == "channels") cfg.kind = RunKind::Channels;
    else throw ConfigError("kind must be scan|trace|ion-compare|channels", "/kind");

    const bool has_model = j.contains("model");
    const bool has_ion = j.contains("ion");
    if (has_model && has_ion)
        throw ConfigError("exactly one parameter block style per run: both /model and /ion present");
    if (cfg.kind == RunKind::IonCompare) {
        if (!has_ion) throw ConfigError("ion-compare needs an ion block", "/ion");
    } else if (!has_model) {
        throw ConfigError("this run kind needs a model block", "/model");
    }

    const int n_max = int_at(j, "/numeric/n_max", 0);
    // Ion integrations compare populations at the 0.1 level; 1e-8 is plenty there.
    const double tol = number_at(j, "/numeric/tol", cfg.kind == RunKind::IonCompare ? 1e-8 : 1e-9);
    const int workers = int_at(j, "/numeric/workers", 0);
    const bool convergence = bool_at(j, "/numeric/convergence_check", true);
    cfg.out_dir = string_at(j, "/output/dir", std::string("out"));

    switch (cfg.kind) {
        case RunKind::Scan: {
            ScanSpec spec;
            spec.parameter = string_at(j, "/scan/parameter");
            spec.start = number_at(j, "/scan/start");
            spec.stop = number_at(j, "/scan/stop");
            spec.step = number_at(j, "/scan/step");
            if (!(spec.step > 0)) throw ConfigError("step must be positive", "/scan/step");
            if (spec.stop < spec.start) throw ConfigError("empty sweep range", "/scan");
            spec.base = model_block(j);
            spec.initial = string_at(j, "/initial");
            spec.time_rule = time_block(j);
            spec.observable = string_at(j, "/observable", std::string("n_mean"));
            spec.n_max = n_max;
            spec.tol = tol;
            spec.workers = workers;
            spec.min_prominence = number_at(j, "/peaks/min_prominence", 0.1);
            spec.convergence_check = convergence;
            try {
                parse_state_label(spec.initial);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what(), "/initial");
            }
            cfg.scan = spec;
            break;
        }
        case RunKind::Trace: {
            TraceSpec spec;
            spec.params = model_block(j);
            spec.initial = string_at(j, "/initial");
            spec.grid = grid_block(j);
            if (j.contains("dissipation")) {
                try {
                    spec.dissipation = LindbladParams(number_at(j, "/dissipation/kappa"));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what(), "/dissipation/kappa");
                }
            }
            spec.n_max = n_max;
            spec.tol = tol;
            spec.convergence_check = convergence;
            try {
                parse_state_label(spec.initial);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what(), "/initial");
            }
            cfg.trace = spec;
            break;
        }
        case RunKind::IonCompare: {
            IonCompareSpec spec;
            spec.drives = ion_block(j);
            spec.initial = string_at(j, "/initial");
            spec.grid = grid_block(j);
            spec.n_max = n_max;
            spec.tol = tol;
            spec.ratio_tol = number_at(j, "/ion/ratio_tol", 1e-3);
            spec.convergence_check = convergence;
            cfg.ion_compare = spec;
            break;
        }
        case RunKind::Channels: {
            ChannelsBlock block;
            block.k = int_at(j, "/channels/k");
            block.n_min = int_at(j, "/channels/n_min", 0);
            block.n_max = int_at(j, "/channels/n_max");
            if (block.n_max < block.n_min) throw ConfigError("empty n range", "/channels");
            block.params = model_block(j);
            cfg.channels = block;
            break;
        }
    }
    cfg.echo = j.dump(2);
    return cfg;
}

RunConfig load_config_file(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

namespace {

struct OutputSink {
    std::filesystem::path dir;
    std::vector<std::filesystem::path> written;

    void write(const std::string& name, const std::string& content) {
        std::filesystem::create_directories(dir);
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("cannot write " + path.string());
        written.push_back(path);
    }

    void remove_all() {
        for (const auto& p : written) std::filesystem::remove(p);
    }
};

std::string peaks_csv(const std::vector<Peak>& peaks) {
    std::string out = "location,height,prominence,width\n";
    for (const auto& p : peaks)
        out += format_double(p.location) + "," + format_double(p.height) + "," +
               format_double(p.prominence) + "," + format_double(p.width) + "\n";
    return out;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string out = "time";
    for (const auto& n : traj.names) out += "," + n;
    out += "\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        out += format_double(traj.times[i]);
        for (int c = 0; c < traj.values.cols(); ++c) out += "," + format_double(traj.values(i, c));
        out += "\n";
    }
    return out;
}

json convergence_json(bool checked, bool converged, double drift) {
    return json{{"checked", checked}, {"converged", converged}, {"drift", drift}};
}

json calibration_json(const IonDerivedParams& c) {
    return json{{"Omega0_khz", c.Omega0 / kTwoPi},
                {"eps_s", c.eps_s},
                {"Omega_dd_khz", c.Omega_dd / kTwoPi},
                {"omega_mode_khz", c.omega_mode / kTwoPi},
                {"omega_qubit_khz", c.omega_qubit / kTwoPi},
                {"g_khz", c.g / kTwoPi},
                {"gamma_khz", c.gamma / kTwoPi},
                {"g_jc_khz", c.g_jc / kTwoPi},
                {"g_ajc_khz", c.g_ajc / kTwoPi},
                {"omega_b_balanced_khz", c.omega_b_balanced / kTwoPi},
                {"g_over_omega_mode", c.g / c.omega_mode},
                {"gamma_over_omega_mode", c.gamma / c.omega_mode}};
}

}  // namespace

void execute(const RunConfig& config) {
    const auto started = std::chrono::steady_clock::now();
    OutputSink sink{config.out_dir, {}};

    json manifest;
    manifest["config"] = json::parse(config.echo);
    manifest["versions"] = {{"rabistark", kVersion},
                            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                          std::to_string(EIGEN_MINOR_VERSION)}};

    try {
        std::string data_csv;
        std::optional<std::string> peaks;
        bool conv_failed = false;

        switch (config.kind) {
            case RunKind::Scan: {
                const ScanResult res = run_scan(*config.scan);
                data_csv = config.scan->parameter + "," + config.scan->observable + ",skipped\n";
                for (std::size_t i = 0; i < res.swept.size(); ++i)
                    data_csv += format_double(res.swept[i]) + "," + format_double(res.values[i]) + "," +
                                std::to_string(int(res.skipped[i])) + "\n";
                peaks = peaks_csv(res.peaks);
                manifest["resolved"] = {{"n_max", res.n_max},
                                        {"points", res.swept.size()},
                                        {"skipped", std::count(res.skipped.begin(), res.skipped.end(), 1)}};
                manifest["convergence"] =
                    convergence_json(res.convergence_checked, res.converged, res.convergence_drift);
                json jp = json::array();
                for (const auto& p : res.peaks)
                    jp.push_back({{"location", p.location}, {"height", p.height},
                                  {"prominence", p.prominence}, {"width", p.width}});
                manifest["peaks"] = jp;
                conv_failed = res.convergence_checked && !res.converged;
                break;
            }
            case RunKind::Trace: {
                const TraceResult res = run_trace(*config.trace);
                data_csv = trajectory_csv(res.trajectory);
                manifest["resolved"] = {{"n_max", res.n_max}};
                manifest["convergence"] =
                    convergence_json(res.convergence_checked, res.converged, res.convergence_drift);
                conv_failed = res.convergence_checked && !res.converged;
                break;
            }
            case RunKind::IonCompare: {
                const ComparisonResult res = compare_ion_model(*config.ion_compare);
                data_csv = "time";
                for (const auto& n : res.ion.names) data_csv += ",ion_" + n;
                for (const auto& n : res.model.names) data_csv += ",model_" + n;
                data_csv += ",deviation\n";
                for (std::size_t i = 0; i < res.ion.times.size(); ++i) {
                    data_csv += format_double(res.ion.times[i]);
                    for (int c = 0; c < res.ion.values.cols(); ++c)
                        data_csv += "," + format_double(res.ion.values(i, c));
                    for (int c = 0; c < res.model.values.cols(); ++c)
                        data_csv += "," + format_double(res.model.values(i, c));
                    data_csv += "," + format_double(res.deviation[i]) + "\n";
                }
                manifest["calibration"] = calibration_json(res.derived);
                manifest["resolved"] = {{"n_max", res.n_max}, {"max_deviation", res.max_deviation}};
                manifest["convergence"] =
                    convergence_json(res.convergence_checked, res.converged, res.convergence_drift);
                conv_failed = res.convergence_checked && !res.converged;
                break;
            }
            case RunKind::Channels: {
                const ChannelsBlock& block = *config.channels;
                data_csv = "k,n,branch,delta_k,omega_k,shifted_delta,status\n";
                json table = json::array();
                for (int n = block.n_min; n <= block.n_max; ++n) {
                    for (const Branch b : {Branch::Plus, Branch::Minus}) {
                        std::string row = std::to_string(block.k) + "," + std::to_string(n) + "," +
                                          to_string(b) + ",";
                        try {
                            const KPhotonChannel ch = k_photon_channel(block.params, n, block.k, b);
                            const char* status = ch.status == ChannelStatus::Ok ? "ok"
                                                 : ch.status == ChannelStatus::NearResonant
                                                     ? "near_resonant"
                                                     : "forbidden_even_k";
                            row += format_double(ch.delta_k) + "," + format_double(ch.omega_k) + "," +
                                   (ch.shifted_delta ? format_double(*ch.shifted_delta) : "nan") + "," +
                                   status;
                            table.push_back({{"n", n}, {"branch", to_string(b)},
                                             {"delta_k", ch.delta_k}, {"omega_k", ch.omega_k},
                                             {"status", status}});
                        } catch (const SingularChannelError&) {
                            row += "nan,nan,nan,singular";
                            table.push_back({{"n", n}, {"branch", to_string(b)}, {"status", "singular"}});
                        }
                        data_csv += row + "\n";
                    }
                }
                manifest["channels"] = table;
                break;
            }
        }

        if (conv_failed) throw ConvergenceError("convergence re-check failed (drift >= 1e-6)");

        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
        manifest["wall_clock_seconds"] = elapsed.count();

        sink.write("data.csv", data_csv);
        if (peaks) sink.write("peaks.csv", *peaks);
        sink.write("manifest.json", manifest.dump(2) + "\n");
    } catch (...) {
        sink.remove_all();
        throw;
    }
}

}  // namespace rabistark
