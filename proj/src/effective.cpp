#include "rabistark/effective.hpp"

#include <cmath>

namespace rabistark {

namespace {

double double_factorial(int k) {
    double out = 1.0;
    for (int v = k; v > 1; v -= 2) out *= v;
    return out;
}

void require_nonzero(double delta, const char* what) {
    if (delta == 0.0) throw SingularChannelError(std::string(what) + ": vanishing detuning denominator");
}

}  // namespace

DetuningSet detunings(const ModelParams& p, int n) {
    if (n < 0) throw std::invalid_argument("detunings: n must be >= 0");
    DetuningSet d;
    d.n = n;
    d.omega0_n = p.omega0 + p.gamma * (2 * n + 1);
    d.delta_plus = p.omega + d.omega0_n;
    d.delta_minus = p.omega - d.omega0_n;
    d.rabi = p.g * std::sqrt(double(n + 1));
    return d;
}

StarkShift stark_shifts(const ModelParams& p, int n) {
    if (n < 0) throw std::invalid_argument("stark_shifts: n must be >= 0");
    const DetuningSet dn = detunings(p, n);
    StarkShift s;
    s.n = n;
    require_nonzero(dn.delta_minus, "stark_shifts");
    require_nonzero(dn.delta_plus, "stark_shifts");
    s.delta_e = -dn.rabi * dn.rabi / dn.delta_minus;
    s.delta_g = -dn.rabi * dn.rabi / dn.delta_plus;
    if (n > 0) {  // Omega_{-1} = 0: no lower neighbor at n = 0
        const DetuningSet dm = detunings(p, n - 1);
        require_nonzero(dm.delta_plus, "stark_shifts");
        require_nonzero(dm.delta_minus, "stark_shifts");
        s.delta_e += dm.rabi * dm.rabi / dm.delta_plus;
        s.delta_g += dm.rabi * dm.rabi / dm.delta_minus;
    }
    return s;
}

KPhotonChannel k_photon_channel(const ModelParams& p, int n, int k, Branch branch) {
    if (n < 0 || k < 1) throw std::invalid_argument("k_photon_channel: need n >= 0, k >= 1");
    KPhotonChannel ch;
    ch.k = k;
    ch.n = n;
    ch.branch = branch;
    if (k % 2 == 0) {
        ch.status = ChannelStatus::ForbiddenEvenOrder;
        return ch;
    }

    ch.delta_k = (k - 1) * p.omega + detunings(p, n + (k - 1) / 2).delta(branch);

    // sqrt((n+k)!/n!) as a plain product; k = 1 then reduces bit-exactly to Omega_n.
    double ladder_sq = 1.0;
    for (int j = n + 1; j <= n + k; ++j) ladder_sq *= j;
    const double branch_gamma = (branch == Branch::Plus) ? p.omega - p.gamma : p.omega + p.gamma;
    double gk = p.g, bg_pow = 1.0;
    for (int j = 1; j < k; ++j) gk *= p.g;
    for (int j = 0; j < (k - 1) / 2; ++j) bg_pow *= branch_gamma;
    double omega_k = gk * std::sqrt(ladder_sq) / (double_factorial(k - 1) * bg_pow);
    for (int s = 1; s + 2 <= k; s += 2) {
        const double delta_s = (s - 1) * p.omega + detunings(p, n + (s - 1) / 2).delta(branch);
        require_nonzero(delta_s, "k_photon_channel");
        omega_k /= delta_s;
        // Validity guard: intermediate detunings must dominate their channel rates.
        const KPhotonChannel inner = (s == 1)
            ? [&] { KPhotonChannel c; c.omega_k = detunings(p, n).rabi; return c; }()
            : k_photon_channel(p, n, s, branch);
        if (std::abs(delta_s) < 10.0 * std::abs(inner.omega_k)) ch.status = ChannelStatus::NearResonant;
    }
    ch.omega_k = omega_k;

    if (k == 3) {
        try {
            ch.shifted_delta = shifted_three_photon_detuning(p, n, branch);
        } catch (const SingularChannelError&) {
            ch.shifted_delta = std::nullopt;
        }
    }
    return ch;
}

double shifted_three_photon_detuning(const ModelParams& p, int n, Branch branch) {
    const double delta3 = 2.0 * p.omega + detunings(p, n + 1).delta(branch);
    const StarkShift upper = stark_shifts(p, n + 3);
    const StarkShift lower = stark_shifts(p, n);
    if (branch == Branch::Plus) return delta3 + upper.delta_e - lower.delta_g;
    return delta3 + upper.delta_g - lower.delta_e;
}

std::vector<double> solve_resonance(const ModelParams& p, int k, int n, Branch branch,
                                    bool shifted, double lo, double hi) {
    if (k % 2 == 0) throw std::invalid_argument("solve_resonance: k must be odd");
    const double sign = (branch == Branch::Plus) ? -1.0 : 1.0;
    const double closed = sign * k * p.omega - p.gamma * (2 * n + k);
    if (!shifted) return {closed};
    if (k != 3) throw std::invalid_argument("solve_resonance: shifted roots are k = 3 only");

    if (lo == 0.0 && hi == 0.0) {
        lo = closed - 2.0 * p.omega;
        hi = closed + 2.0 * p.omega;
    }
    if (!(hi > lo)) throw std::invalid_argument("solve_resonance: empty bracket");

    auto f = [&](double omega0) -> std::optional<double> {
        ModelParams q = p;
        q.omega0 = omega0;
        try {
            return shifted_three_photon_detuning(q, n, branch);
        } catch (const SingularChannelError&) {
            return std::nullopt;
        }
    };

    // Scan for sign changes; bisection refines each. Stark poles also flip the
    // sign but with diverging |f| on both flanks, so those crossings are dropped.
    const int cells = 2000;
    const double h = (hi - lo) / cells;
    std::vector<double> roots;
    std::optional<double> prev = f(lo);
    double prev_x = lo;
    for (int i = 1; i <= cells; ++i) {
        const double x = lo + i * h;
        const std::optional<double> cur = f(x);
        if (prev && cur && *prev * *cur < 0.0) {
            double a = prev_x, b = x, fa = *prev;
            for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
                const double mid = 0.5 * (a + b);
                const std::optional<double> fm = f(mid);
                if (!fm) break;
                if (fa * *fm <= 0.0) {
                    b = mid;
                } else {
                    a = mid;
                    fa = *fm;
                }
            }
            const double root = 0.5 * (a + b);
            const std::optional<double> fr = f(root);
            const double scale = std::max({std::abs(*prev), std::abs(*cur), 1.0});
            if (fr && std::abs(*fr) < scale) roots.push_back(root);  // genuine zero, not a pole
        }
        prev = cur;
        prev_x = x;
    }
    if (roots.empty()) throw std::runtime_error("solve_resonance: no root in bracket");
    return roots;
}

}  // namespace rabistark
