#include "rabistark/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

namespace rabistark {

namespace {

void parallel_for(int count, int workers, const std::function<void(int)>& body) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> cursor{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const int i = cursor.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n_threads = std::min(workers, count);
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

double resolve_channel_time(const ModelParams& p, const TimeRule& rule) {
    const KPhotonChannel ch = k_photon_channel(p, rule.n, rule.k, rule.branch);
    if (ch.omega_k == 0.0) throw SingularChannelError("time rule: vanishing channel rate");
    return M_PI / (2.0 * std::abs(ch.omega_k));
}

int auto_n_max(int initial_n, int k) { return initial_n + k + 10; }

ModelParams with_parameter(const ModelParams& base, const std::string& name, double value) {
    ModelParams p = base;
    if (name == "omega0") p.omega0 = value;
    else if (name == "omega") p.omega = value;
    else if (name == "gamma") p.gamma = value;
    else if (name == "g") p.g = value;
    else throw std::invalid_argument("scan: unknown parameter " + name);
    return p;
}

struct ScanPass {
    std::vector<double> values;
    std::vector<std::uint8_t> skipped;
    std::vector<double> times;
};

ScanPass scan_pass(const ScanSpec& spec, const std::vector<double>& xs, int n_max, int workers) {
    const HilbertSpace space(n_max);
    const auto [label, n0] = parse_state_label(spec.initial);
    const QubitBasis basis =
        (label == QubitLabel::Plus || label == QubitLabel::Minus) ? QubitBasis::SigmaX : QubitBasis::Bare;

    double panel_time = 0.0;
    if (!spec.time_rule.fixed && !spec.time_rule.per_point)
        panel_time = resolve_channel_time(spec.base, spec.time_rule);

    ScanPass pass;
    pass.values.assign(xs.size(), std::numeric_limits<double>::quiet_NaN());
    pass.skipped.assign(xs.size(), 0);
    pass.times.assign(xs.size(), 0.0);

    parallel_for(int(xs.size()), workers, [&](int i) {
        const ModelParams p = with_parameter(spec.base, spec.parameter, xs[i]);
        double t_end;
        try {
            t_end = spec.time_rule.fixed ? spec.time_rule.t_fixed
                    : spec.time_rule.per_point ? resolve_channel_time(p, spec.time_rule)
                                               : panel_time;
            pass.times[i] = t_end;
            const QOperator H = rabi_stark_hamiltonian(p, space);
            const StateVector psi0 = basis_state(space, label, n0);
            PropagateOptions opts;
            opts.tol = spec.tol;
            opts.basis = basis;
            const Trajectory traj = propagate_state(H, psi0, TimeGrid(0.0, t_end, 2), opts);
            const int col = traj.column_index(spec.observable);
            if (col < 0) throw std::invalid_argument("scan: unknown observable " + spec.observable);
            pass.values[i] = traj.values(traj.values.rows() - 1, col);
        } catch (const SingularChannelError&) {
            pass.skipped[i] = 1;
        } catch (const NumericError&) {
            pass.skipped[i] = 1;
        }
    });
    return pass;
}

}  // namespace

std::pair<QubitLabel, int> parse_state_label(const std::string& label) {
    const auto comma = label.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("state label must be '<qubit>,<n>': " + label);
    const std::string q = label.substr(0, comma);
    int n;
    try {
        std::size_t used = 0;
        n = std::stoi(label.substr(comma + 1), &used);
        if (used != label.size() - comma - 1) throw std::invalid_argument("");
    } catch (const std::exception&) {
        throw std::invalid_argument("state label has a bad Fock index: " + label);
    }
    QubitLabel ql;
    if (q == "e") ql = QubitLabel::Excited;
    else if (q == "g") ql = QubitLabel::Ground;
    else if (q == "plus" || q == "+") ql = QubitLabel::Plus;
    else if (q == "minus" || q == "-") ql = QubitLabel::Minus;
    else throw std::invalid_argument("state label has a bad qubit part: " + label);
    return {ql, n};
}

int default_workers() {
    if (const char* env = std::getenv("RABISTARK_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? int(hc) : 1;
}

std::vector<Peak> find_peaks(const std::vector<double>& xs, const std::vector<double>& ys,
                             double min_prominence) {
    if (xs.size() != ys.size()) throw std::invalid_argument("find_peaks: size mismatch");
    const int n = int(ys.size());
    std::vector<Peak> peaks;
    if (n < 3) return peaks;

    for (int i = 1; i + 1 < n; ++i) {
        if (!(ys[i] > ys[i - 1] && ys[i] >= ys[i + 1])) continue;

        // Base on each side: the minimum between the peak and the nearest
        // strictly higher sample (or the end of the record).
        double left_min = ys[i], right_min = ys[i];
        for (int j = i - 1; j >= 0; --j) {
            if (ys[j] > ys[i]) break;
            left_min = std::min(left_min, ys[j]);
        }
        for (int j = i + 1; j < n; ++j) {
            if (ys[j] > ys[i]) break;
            right_min = std::min(right_min, ys[j]);
        }
        const double prominence = ys[i] - std::max(left_min, right_min);
        if (prominence < min_prominence) continue;

        Peak pk;
        pk.height = ys[i];
        pk.prominence = prominence;
        const double denom = ys[i - 1] - 2.0 * ys[i] + ys[i + 1];
        pk.location = xs[i];
        if (denom < 0) {
            const double shift = 0.5 * (ys[i - 1] - ys[i + 1]) / denom;
            pk.location = xs[i] + shift * (xs[i + 1] - xs[i - 1]) * 0.5;
        }

        const double half = ys[i] - 0.5 * prominence;
        double left_x = xs.front(), right_x = xs.back();
        for (int j = i; j > 0; --j) {
            if (ys[j - 1] <= half) {
                const double f = (ys[j] - half) / (ys[j] - ys[j - 1]);
                left_x = xs[j] + f * (xs[j - 1] - xs[j]);
                break;
            }
        }
        for (int j = i; j + 1 < n; ++j) {
            if (ys[j + 1] <= half) {
                const double f = (ys[j] - half) / (ys[j] - ys[j + 1]);
                right_x = xs[j] + f * (xs[j + 1] - xs[j]);
                break;
            }
        }
        pk.width = right_x - left_x;
        peaks.push_back(pk);
    }
    return peaks;
}

ScanResult run_scan(const ScanSpec& spec) {
    if (!(spec.step > 0)) throw std::invalid_argument("scan: step must be positive");
    if (spec.stop < spec.start) throw std::invalid_argument("scan: empty range");
    std::vector<double> xs;
    for (double x = spec.start; x <= spec.stop + 0.5 * spec.step; x += spec.step) xs.push_back(x);

    const auto [label, n0] = parse_state_label(spec.initial);
    const int n_max = spec.n_max > 0 ? spec.n_max : auto_n_max(n0, spec.time_rule.k);
    const int workers = spec.workers > 0 ? spec.workers : default_workers();

    ScanResult result;
    result.swept = xs;
    result.n_max = n_max;

    ScanPass pass = scan_pass(spec, xs, n_max, workers);
    result.values = pass.values;
    result.skipped = pass.skipped;
    result.resolved_times = pass.times;

    if (spec.convergence_check) {
        const ScanPass check = scan_pass(spec, xs, n_max + 10, workers);
        double drift = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            if (!pass.skipped[i] && !check.skipped[i])
                drift = std::max(drift, std::abs(pass.values[i] - check.values[i]));
        result.convergence_checked = true;
        result.convergence_drift = drift;
        result.converged = drift < 1e-6;
    }

    std::vector<double> xs_ok, ys_ok;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!result.skipped[i]) {
            xs_ok.push_back(xs[i]);
            ys_ok.push_back(result.values[i]);
        }
    }
    result.peaks = find_peaks(xs_ok, ys_ok, spec.min_prominence);
    return result;
}

namespace {

Trajectory trace_pass(const TraceSpec& spec, int n_max) {
    const HilbertSpace space(n_max);
    const auto [label, n0] = parse_state_label(spec.initial);
    const QubitBasis basis = spec.basis.value_or(
        (label == QubitLabel::Plus || label == QubitLabel::Minus) ? QubitBasis::SigmaX : QubitBasis::Bare);
    const QOperator H = rabi_stark_hamiltonian(spec.params, space);
    const StateVector psi0 = basis_state(space, label, n0);
    PropagateOptions opts;
    opts.tol = spec.tol;
    opts.basis = basis;
    if (spec.dissipation && spec.dissipation->kappa > 0.0)
        return propagate_density(H, *spec.dissipation, DensityMatrix::from_pure(psi0), spec.grid, opts);
    return propagate_state(H, psi0, spec.grid, opts);
}

double shared_series_drift(const Trajectory& a, const Trajectory& b) {
    double drift = 0.0;
    for (std::size_t c = 0; c < a.names.size(); ++c) {
        const int cb = b.column_index(a.names[c]);
        if (cb < 0) continue;
        drift = std::max(drift, (a.values.col(c) - b.values.col(cb)).cwiseAbs().maxCoeff());
    }
    return drift;
}

}  // namespace

TraceResult run_trace(const TraceSpec& spec) {
    const auto [label, n0] = parse_state_label(spec.initial);
    const int n_max = spec.n_max > 0 ? spec.n_max : auto_n_max(n0, 1);

    TraceResult result;
    result.n_max = n_max;
    result.trajectory = trace_pass(spec, n_max);
    if (spec.convergence_check) {
        TraceSpec wider = spec;
        wider.n_max = n_max + 10;
        const Trajectory check = trace_pass(wider, n_max + 10);
        result.convergence_checked = true;
        result.convergence_drift = shared_series_drift(result.trajectory, check);
        result.converged = result.convergence_drift < 1e-6;
    }
    return result;
}

namespace {

struct IonPass {
    Trajectory ion;    // model-frame, sigma_x basis
    Trajectory model;
};

IonPass ion_pass(const IonCompareSpec& spec, const IonDerivedParams& derived, int n_max) {
    const HilbertSpace space(n_max);
    const auto [label, n0] = parse_state_label(spec.initial);
    const StateVector psi0 = basis_state(space, label, n0);

    PropagateOptions ion_opts;
    ion_opts.tol = spec.tol;
    ion_opts.basis = QubitBasis::SigmaX;
    ion_opts.store_states = true;
    Trajectory raw = propagate_state(ion_full_action(spec.drives, space), psi0, spec.grid, ion_opts);

    // Rotate each snapshot into the model frame: psi -> e^{i G t} psi with
    // G = (Omega_dd/2) sx (x) 1 - omega^R 1 (x) n. Diagonal in the sigma_x (x)
    // Fock coordinates, so only coordinate phases change.
    const int fd = space.fock_dim();
    for (std::size_t s = 0; s < raw.states.size(); ++s) {
        const double t = raw.times[s];
        Vector& psi = raw.states[s];
        for (int n = 0; n < fd; ++n) {
            const Complex plus = (psi(n) + psi(fd + n)) / std::sqrt(2.0);
            const Complex minus = (psi(n) - psi(fd + n)) / std::sqrt(2.0);
            const Complex mode_ph = std::exp(-I * derived.omega_mode * double(n) * t);
            const Complex p = plus * std::exp(I * 0.5 * derived.Omega_dd * t) * mode_ph;
            const Complex m = minus * std::exp(-I * 0.5 * derived.Omega_dd * t) * mode_ph;
            psi(n) = (p + m) / std::sqrt(2.0);
            psi(fd + n) = (p - m) / std::sqrt(2.0);
        }
    }

    IonPass pass;
    pass.ion = trajectory_from_states(space, raw.times, raw.states, QubitBasis::SigmaX);

    PropagateOptions model_opts;
    model_opts.tol = spec.tol;
    model_opts.basis = QubitBasis::SigmaX;
    pass.model = propagate_state(ion_effective_hamiltonian(derived, space), psi0, spec.grid, model_opts);
    return pass;
}

}  // namespace

ComparisonResult compare_ion_model(const IonCompareSpec& spec) {
    ComparisonResult result;
    result.derived = ion_calibration(spec.drives, spec.ratio_tol);

    // Population deviations carry beat notes at Omega_dd; the output sampling
    // must resolve them or the reported maximum is an aliasing artifact.
    const double rate = (spec.grid.n_samples - 1) / (spec.grid.t_end - spec.grid.t_start);
    if (rate < 2.0 * std::abs(result.derived.Omega_dd) / (2.0 * M_PI))
        throw std::invalid_argument("compare_ion_model: output sampling below 2 Omega_dd");

    const auto [label, n0] = parse_state_label(spec.initial);
    if (label != QubitLabel::Plus && label != QubitLabel::Minus)
        throw std::invalid_argument("compare_ion_model: initial state must be a sigma_x label");
    const int n_max = spec.n_max > 0 ? spec.n_max : auto_n_max(n0, 3);
    result.n_max = n_max;

    IonPass pass = ion_pass(spec, result.derived, n_max);

    const int n_pop = 2 * (n_max + 1);
    result.deviation.assign(pass.ion.times.size(), 0.0);
    for (std::size_t i = 0; i < pass.ion.times.size(); ++i) {
        double d = 0.0;
        for (int c = 0; c < n_pop; ++c)
            d = std::max(d, std::abs(pass.ion.values(i, c) - pass.model.values(i, c)));
        result.deviation[i] = d;
        result.max_deviation = std::max(result.max_deviation, d);
    }

    if (spec.convergence_check) {
        const IonPass check = ion_pass(spec, result.derived, n_max + 10);
        result.convergence_checked = true;
        result.convergence_drift = std::max(shared_series_drift(pass.ion, check.ion),
                                            shared_series_drift(pass.model, check.model));
        result.converged = result.convergence_drift < 1e-6;
    }

    pass.ion.states.clear();
    result.ion = std::move(pass.ion);
    result.model = std::move(pass.model);
    return result;
}

}  // namespace rabistark
