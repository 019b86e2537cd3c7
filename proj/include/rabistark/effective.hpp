#pragma once

#include <optional>
#include <vector>

#include "rabistark/models.hpp"

namespace rabistark {

// First-order detunings at Fock index n:
//   omega0_n = omega0 + gamma (2n+1),  d+_n = omega + omega0_n,  d-_n = omega - omega0_n,
//   Omega_n = g sqrt(n+1).
struct DetuningSet {
    int n = 0;
    double omega0_n = 0.0;
    double delta_plus = 0.0;
    double delta_minus = 0.0;
    double rabi = 0.0;

    double delta(Branch b) const { return b == Branch::Plus ? delta_plus : delta_minus; }
};

DetuningSet detunings(const ModelParams& p, int n);

// Second-order Stark shifts:
//   Delta^e_n = Omega_{n-1}^2 / d+_{n-1} - Omega_n^2 / d-_n
//   Delta^g_n = Omega_{n-1}^2 / d-_{n-1} - Omega_n^2 / d+_n
// with Omega_{-1} = 0. Singular (throws) when an involved first-order detuning
// vanishes; second-order theory does not apply there.
struct StarkShift {
    int n = 0;
    double delta_e = 0.0;
    double delta_g = 0.0;
};

StarkShift stark_shifts(const ModelParams& p, int n);

enum class ChannelStatus {
    Ok,
    NearResonant,        // an intermediate |delta| < 10 |Omega|; perturbation suspect
    ForbiddenEvenOrder,  // even k: parity symmetry, RWA averages the channel out
};

// k-photon channel |.,n> <-> |.,n+k> (odd k):
//   delta_k = (k-1) omega + d^branch_{n+(k-1)/2}
//   Omega_k = g^k / ((k-1)!! (omega -+ gamma)^{(k-1)/2}) sqrt((n+k)!/n!) prod_s 1/delta^(s)
// The stored Omega_k is signed; figures compare magnitudes.
struct KPhotonChannel {
    int k = 0;
    int n = 0;
    Branch branch = Branch::Minus;
    double delta_k = 0.0;
    double omega_k = 0.0;
    std::optional<double> shifted_delta;  // k = 3 only
    ChannelStatus status = ChannelStatus::Ok;
};

KPhotonChannel k_photon_channel(const ModelParams& p, int n, int k, Branch branch);

// Stark-shifted three-photon oscillation frequency:
//   branch +: delta3 + Delta^e_{n+3} - Delta^g_n
//   branch -: delta3 + Delta^g_{n+3} - Delta^e_n
double shifted_three_photon_detuning(const ModelParams& p, int n, Branch branch);

// omega0 roots of the channel detuning. Unshifted: the closed form
// omega0 = -+ (k omega) - gamma (2n+k) for branch +/-. Shifted (k = 3 only):
// bracketing + bisection of the shifted detuning over [lo, hi] to 1e-10,
// skipping Stark-shift poles. p.omega0 is ignored.
std::vector<double> solve_resonance(const ModelParams& p, int k, int n, Branch branch,
                                    bool shifted = false, double lo = 0.0, double hi = 0.0);

}  // namespace rabistark
