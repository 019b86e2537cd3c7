#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rabistark/dynamics.hpp"
#include "rabistark/effective.hpp"

namespace rabistark {

struct Peak {
    double location = 0.0;    // parabolic-refined abscissa
    double height = 0.0;
    double prominence = 0.0;
    double width = 0.0;       // at half prominence
};

// Local maxima with prominence >= min_prominence; empty result is fine.
std::vector<Peak> find_peaks(const std::vector<double>& xs, const std::vector<double>& ys,
                             double min_prominence);

// Evolution-time rule of a scan point: either a fixed T or pi / (2 |Omega_k|)
// from a named channel, evaluated per swept point or once per panel.
struct TimeRule {
    bool fixed = false;
    double t_fixed = 0.0;
    int k = 1;
    int n = 0;
    Branch branch = Branch::Minus;
    bool per_point = true;

    static TimeRule fixed_time(double t) { return TimeRule{true, t, 1, 0, Branch::Minus, false}; }
    static TimeRule channel_pi(int k, int n, Branch b, bool per_point = true) {
        return TimeRule{false, 0.0, k, n, b, per_point};
    }
};

struct ScanSpec {
    std::string parameter = "omega0";  // omega0 | g | gamma | omega
    double start = 0.0, stop = 0.0, step = 0.0;
    ModelParams base;                  // swept field overwritten per point
    std::string initial = "g,0";
    TimeRule time_rule;
    std::string observable = "n_mean";
    int n_max = 0;                     // 0: auto, fock(initial) + k + 10
    double tol = 1e-9;
    int workers = 0;                   // 0: env / hardware default
    double min_prominence = 0.1;
    bool convergence_check = true;
};

struct ScanResult {
    std::vector<double> swept;
    std::vector<double> values;
    std::vector<std::uint8_t> skipped;  // singular channel or failed propagation
    std::vector<Peak> peaks;
    std::vector<double> resolved_times;
    bool convergence_checked = false;
    bool converged = true;
    double convergence_drift = 0.0;
    int n_max = 0;
};

ScanResult run_scan(const ScanSpec& spec);

struct TraceSpec {
    ModelParams params;
    std::string initial = "g,0";
    TimeGrid grid;
    std::optional<LindbladParams> dissipation;
    std::optional<QubitBasis> basis;   // default: basis of the initial label
    int n_max = 0;                     // 0: auto
    double tol = 1e-9;
    bool convergence_check = true;
};

struct TraceResult {
    Trajectory trajectory;
    bool convergence_checked = false;
    bool converged = true;
    double convergence_drift = 0.0;
    int n_max = 0;
};

TraceResult run_trace(const TraceSpec& spec);

struct IonCompareSpec {
    IonDriveParams drives;
    std::string initial = "plus,0";
    TimeGrid grid;
    int n_max = 0;            // 0: auto
    double tol = 1e-8;
    double ratio_tol = 1e-3;
    bool convergence_check = true;
};

// Full drive Hamiltonian vs the calibrated effective model, mapped to a common
// frame (the drive simulation is rotated by exp(i t [(Omega_dd/2) sx - omega^R n])
// before populations are read out in the sigma_x basis).
struct ComparisonResult {
    IonDerivedParams derived;
    Trajectory ion;
    Trajectory model;
    std::vector<double> deviation;  // per sample, max over population series
    double max_deviation = 0.0;
    bool convergence_checked = false;
    bool converged = true;
    double convergence_drift = 0.0;
    int n_max = 0;
};

ComparisonResult compare_ion_model(const IonCompareSpec& spec);

// "e,2", "g,5", "plus,3", "+,3", "minus,0", "-,0"
std::pair<QubitLabel, int> parse_state_label(const std::string& label);

int default_workers();

}  // namespace rabistark
