#pragma once

#include <functional>

#include "rabistark/qspace.hpp"

namespace rabistark {

// Couplings of H = (omega0/2) sz + omega n + gamma n sz + g sx (a + a^dag).
// Model-level work uses omega = 1; the trapped-ion path carries angular kHz.
struct ModelParams {
    double omega0 = 0.0;
    double omega = 1.0;
    double gamma = 0.0;
    double g = 0.0;

    ModelParams() = default;
    ModelParams(double omega0_, double omega_, double gamma_, double g_)
        : omega0(omega0_), omega(omega_), gamma(gamma_), g(g_) {
        if (!(omega > 0)) throw std::invalid_argument("ModelParams: omega must be positive");
    }

    // |gamma| >= omega is the spectral-collapse boundary; construction is allowed
    // but perturbative channels diverge there.
    bool spectral_collapse() const { return std::abs(gamma) >= omega; }
};

struct LindbladParams {
    double kappa = 0.0;

    LindbladParams() = default;
    explicit LindbladParams(double kappa_) : kappa(kappa_) {
        if (kappa < 0) throw std::invalid_argument("LindbladParams: kappa must be >= 0");
    }
};

enum class DrivePhase { Zero, MinusPi };

inline double phase_value(DrivePhase p) { return p == DrivePhase::Zero ? 0.0 : -M_PI; }
inline double phase_sign(DrivePhase p) { return p == DrivePhase::Zero ? 1.0 : -1.0; }  // e^{i phi}

// Laboratory drive settings for the single-ion realization. All frequencies are
// angular (rad/ms when quoting kHz linewidths), time in ms.
struct IonDriveParams {
    double nu = 0.0;       // trap frequency
    double eta = 0.0;      // Lamb-Dicke parameter
    double omega_r = 0.0;  // red-sideband Rabi frequency
    double omega_b = 0.0;  // blue-sideband Rabi frequency
    double omega_s = 0.0;  // carrier Rabi frequency
    double delta_r = 0.0;  // red detuning
    double delta_b = 0.0;  // blue detuning
    DrivePhase phi_r = DrivePhase::MinusPi;
    DrivePhase phi_b = DrivePhase::MinusPi;
    DrivePhase phi_s = DrivePhase::MinusPi;

    bool ld_regime_ok(int n_max) const { return eta * std::sqrt(double(n_max)) < 0.3; }
};

// Effective model realized by a drive set, plus the intermediate quantities the
// calibration is built from. The model qubit basis is {|+>,|->}: the engineered
// Hamiltonian is Eq-(1)-like with sigma_x in the role of sigma_z.
struct IonDerivedParams {
    double Omega0 = 0.0;       // Omega_S (1 - eta^2/2)
    double eps_s = 0.0;        // Omega_S / nu
    double Omega_dd = 0.0;     // dressing frequency, (delta_r + delta_b)/2
    double omega_mode = 0.0;   // omega^R  = (delta_r - delta_b)/2
    double omega_qubit = 0.0;  // omega0^R from the branch's Omega_dd relation
    double g = 0.0;            // (eta Omega_r/4)(1 -+ eps_s), sign branch from phi_s
    double gamma = 0.0;        // +- eta^2 Omega_S / 2
    double g_jc = 0.0, g_ajc = 0.0;
    double g1_r = 0.0, g1_b = 0.0;  // eta Omega_{r,b} / 4
    double g2_r = 0.0, g2_b = 0.0;  // eta Omega_S Omega_{r,b} / (4 nu)
    double omega_b_balanced = 0.0;  // Omega_r times the branch's balancing ratio

    ModelParams to_model_params() const { return ModelParams(omega_qubit, omega_mode, gamma, g); }
};

// Eq-(1) Hamiltonian on the composite space. Hermitian by construction.
QOperator rabi_stark_hamiltonian(const ModelParams& p, const HilbertSpace& space);

// Interaction picture w.r.t. the diagonal part: sum_n Omega_n (s+ e^{i d+_n t} +
// s- e^{i d-_n t}) |n+1><n| + H.c. Equals U0^dag (H - H0) U0 on the truncated space.
QOperator interaction_picture_hamiltonian(const ModelParams& p, const HilbertSpace& space, double t);

// -i[H, rho] + kappa (2 a rho a^dag - a^dag a rho - rho a^dag a).
Matrix lindblad_rhs(const QOperator& H, const LindbladParams& lp, const DensityMatrix& rho);
Matrix lindblad_rhs(const Matrix& H, double kappa, const Matrix& rho, const HilbertSpace& space);

// Full ion drive Hamiltonian with the exact displacement-operator exponential
// (no Lamb-Dicke expansion): the eta^2 carrier Stark term and the second-order
// sideband corrections are contained rather than hand-added.
QOperator ion_full_hamiltonian(const IonDriveParams& d, const HilbertSpace& space, double t);

// Lamb-Dicke truncation after the vibrational RWA; verification intermediate.
QOperator ion_ld_hamiltonian(const IonDriveParams& d, const HilbertSpace& space, double t);

// Engineered model in ion coordinates:
// (omega0^R/2) sx + omega^R n + g sy (a + a^dag) + gamma n sx.
QOperator ion_effective_hamiltonian(const IonDerivedParams& c, const HilbertSpace& space);

// Drive set -> effective model parameters. Requires phi_r = phi_b = -pi and
// phi_s selecting the sign branch (phi_s = -pi: gamma > 0, phi_s = 0: gamma < 0),
// with Omega_b/Omega_r within ratio_tol of the branch's balancing ratio.
IonDerivedParams ion_calibration(const IonDriveParams& d, double ratio_tol = 1e-3);

// In-place y = H(t) x evaluators for the time-dependent propagator.
using HamiltonianAction =
    std::function<void(double, Eigen::Ref<const Vector>, Eigen::Ref<Vector>)>;

struct TimeDependentHamiltonian {
    HilbertSpace space;
    HamiltonianAction apply;
};

TimeDependentHamiltonian ion_full_action(const IonDriveParams& d, const HilbertSpace& space);
TimeDependentHamiltonian ion_ld_action(const IonDriveParams& d, const HilbertSpace& space);

}  // namespace rabistark
