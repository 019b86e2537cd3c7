#include "rabistark/models.hpp"

#include <cmath>

#include "rabistark/effective.hpp"

namespace rabistark {

QOperator rabi_stark_hamiltonian(const ModelParams& p, const HilbertSpace& space) {
    const auto& pauli = qubit_ops();
    const LadderOps lad = ladder_ops(space);
    Matrix h = embed(space, 0.5 * p.omega0 * pauli.sz, Matrix::Identity(space.fock_dim(), space.fock_dim())).mat;
    h += embed(space, pauli.id * p.omega, lad.number).mat;
    h += embed(space, p.gamma * pauli.sz, lad.number).mat;
    h += embed(space, p.g * pauli.sx, lad.a + lad.a_dagger).mat;
    return QOperator(space, std::move(h));
}

QOperator interaction_picture_hamiltonian(const ModelParams& p, const HilbertSpace& space, double t) {
    Matrix h = Matrix::Zero(space.dim(), space.dim());
    for (int n = 0; n + 1 <= space.n_max; ++n) {
        const DetuningSet d = detunings(p, n);
        const Complex up = d.rabi * std::exp(I * d.delta_plus * t);    // s+ (x) |n+1><n|
        const Complex down = d.rabi * std::exp(I * d.delta_minus * t); // s- (x) |n+1><n|
        const int e_n = space.index(QubitLabel::Excited, n);
        const int e_n1 = space.index(QubitLabel::Excited, n + 1);
        const int g_n = space.index(QubitLabel::Ground, n);
        const int g_n1 = space.index(QubitLabel::Ground, n + 1);
        h(e_n1, g_n) = up;
        h(g_n, e_n1) = std::conj(up);
        h(g_n1, e_n) = down;
        h(e_n, g_n1) = std::conj(down);
    }
    return QOperator(space, std::move(h));
}

Matrix lindblad_rhs(const Matrix& H, double kappa, const Matrix& rho, const HilbertSpace& space) {
    if (H.rows() != rho.rows() || rho.rows() != space.dim())
        throw std::invalid_argument("lindblad_rhs: dimension mismatch");
    const LadderOps lad = ladder_ops(space);
    const Matrix A = embed_mode(space, lad.a).mat;
    const Matrix N = embed_mode(space, lad.number).mat;
    Matrix out = -I * (H * rho - rho * H);
    if (kappa != 0.0) out += kappa * (2.0 * A * rho * A.adjoint() - N * rho - rho * N);
    return out;
}

Matrix lindblad_rhs(const QOperator& H, const LindbladParams& lp, const DensityMatrix& rho) {
    require_same_space(H.space, rho.space, "lindblad_rhs");
    return lindblad_rhs(H.mat, lp.kappa, rho.mat, H.space);
}

namespace {

// Sum of drive coefficients on s+ (x) D(i eta e^{i nu t}); the three beams share
// the displacement factor. Detunings: red at -nu + delta_r, blue at nu + delta_b,
// carrier on resonance.
Complex drive_coefficient(const IonDriveParams& d, double t) {
    const Complex red = 0.5 * d.omega_r * phase_sign(d.phi_r) * std::exp(I * (d.nu - d.delta_r) * t);
    const Complex blue = 0.5 * d.omega_b * phase_sign(d.phi_b) * std::exp(-I * (d.nu + d.delta_b) * t);
    const Complex carrier = 0.5 * d.omega_s * phase_sign(d.phi_s);
    return red + blue + carrier;
}

void check_phases(const IonDriveParams& d) {
    // DrivePhase restricts to {0, -pi} by construction; nothing further here.
    (void)d;
}

// Fock-block of the LD Hamiltonian at time t (the operator multiplying s+).
Matrix ld_block(const IonDriveParams& d, const HilbertSpace& space, double t) {
    const LadderOps lad = ladder_ops(space);
    const double g_r = 0.5 * d.eta * d.omega_r;
    const double g_b = 0.5 * d.eta * d.omega_b;
    const double Omega0 = d.omega_s * (1.0 - 0.5 * d.eta * d.eta);
    const double gamma = 0.5 * d.eta * d.eta * d.omega_s;
    Matrix b = phase_sign(d.phi_r) * I * g_r * std::exp(-I * d.delta_r * t) * lad.a;
    b += phase_sign(d.phi_b) * I * g_b * std::exp(-I * d.delta_b * t) * lad.a_dagger;
    b += phase_sign(d.phi_s) * (0.5 * Omega0 * Matrix::Identity(space.fock_dim(), space.fock_dim()) - gamma * lad.number);
    return b;
}

QOperator from_sigma_plus_block(const HilbertSpace& space, const Matrix& block) {
    const int d = space.fock_dim();
    Matrix h = Matrix::Zero(space.dim(), space.dim());
    h.block(0, d, d, d) = block;
    h.block(d, 0, d, d) = block.adjoint();
    return QOperator(space, std::move(h));
}

}  // namespace

QOperator ion_full_hamiltonian(const IonDriveParams& d, const HilbertSpace& space, double t) {
    check_phases(d);
    const DisplacementOp disp = displacement_op(space, I * d.eta * std::exp(I * d.nu * t));
    return from_sigma_plus_block(space, drive_coefficient(d, t) * disp.mat);
}

QOperator ion_ld_hamiltonian(const IonDriveParams& d, const HilbertSpace& space, double t) {
    check_phases(d);
    return from_sigma_plus_block(space, ld_block(d, space, t));
}

QOperator ion_effective_hamiltonian(const IonDerivedParams& c, const HilbertSpace& space) {
    const auto& pauli = qubit_ops();
    const LadderOps lad = ladder_ops(space);
    Matrix h = embed(space, 0.5 * c.omega_qubit * pauli.sx, Matrix::Identity(space.fock_dim(), space.fock_dim())).mat;
    h += embed(space, pauli.id * c.omega_mode, lad.number).mat;
    h += embed(space, c.gamma * pauli.sx, lad.number).mat;
    h += embed(space, c.g * pauli.sy, lad.a + lad.a_dagger).mat;
    return QOperator(space, std::move(h));
}

IonDerivedParams ion_calibration(const IonDriveParams& d, double ratio_tol) {
    if (!(d.nu > 0)) throw std::invalid_argument("ion_calibration: nu must be positive");
    if (d.phi_r != DrivePhase::MinusPi || d.phi_b != DrivePhase::MinusPi)
        throw std::invalid_argument("ion_calibration: sideband phases must be -pi");

    IonDerivedParams out;
    out.eps_s = d.omega_s / d.nu;
    out.Omega0 = d.omega_s * (1.0 - 0.5 * d.eta * d.eta);
    out.Omega_dd = 0.5 * (d.delta_r + d.delta_b);
    out.omega_mode = 0.5 * (d.delta_r - d.delta_b);
    out.g1_r = 0.25 * d.eta * d.omega_r;
    out.g1_b = 0.25 * d.eta * d.omega_b;
    out.g2_r = out.g1_r * out.eps_s;
    out.g2_b = out.g1_b * out.eps_s;

    double ratio;
    if (d.phi_s == DrivePhase::MinusPi) {
        // gamma > 0 branch: Omega_dd = -(Omega0 + omega0^R)
        out.gamma = 0.5 * d.eta * d.eta * d.omega_s;
        out.omega_qubit = -out.Omega0 - out.Omega_dd;
        ratio = (1.0 - out.eps_s) / (1.0 + out.eps_s);
        out.g = out.g1_r * (1.0 - out.eps_s);
        out.g_jc = out.g1_r - out.g2_r;
        out.g_ajc = out.g1_b + out.g2_b;
    } else {
        // gamma < 0 branch: Omega_dd = Omega0 - omega0^R
        out.gamma = -0.5 * d.eta * d.eta * d.omega_s;
        out.omega_qubit = out.Omega0 - out.Omega_dd;
        ratio = (1.0 + out.eps_s) / (1.0 - out.eps_s);
        out.g = out.g1_r * (1.0 + out.eps_s);
        out.g_jc = out.g1_r + out.g2_r;
        out.g_ajc = out.g1_b - out.g2_b;
    }
    out.omega_b_balanced = d.omega_r * ratio;

    if (d.omega_r == 0.0) {
        if (d.omega_b != 0.0)
            throw std::invalid_argument("ion_calibration: unbalanced drive ratio (omega_r = 0)");
    } else if (std::abs(d.omega_b / d.omega_r - ratio) > ratio_tol) {
        throw std::invalid_argument("ion_calibration: unbalanced drive ratio");
    }
    return out;
}

TimeDependentHamiltonian ion_full_action(const IonDriveParams& d, const HilbertSpace& space) {
    check_phases(d);
    const int fd = space.fock_dim();
    // |z| = eta is constant along the drive, so D(i eta e^{i nu t}) is a fixed
    // matrix conjugated by Fock phases: D_t = Phi D0 Phi^dag, Phi = diag(e^{i nu n t}).
    const Matrix D0 = displacement_op(space, I * d.eta).mat;
    const Matrix D0H = D0.adjoint();
    auto apply = [d, fd, D0, D0H, buf = Vector(fd), phases = Vector(fd)](
                     double t, Eigen::Ref<const Vector> x, Eigen::Ref<Vector> y) mutable {
        const Complex step = std::exp(I * d.nu * t);
        Complex ph = 1.0;
        for (int n = 0; n < fd; ++n) {
            phases(n) = ph;
            ph *= step;
        }
        const Complex c = drive_coefficient(d, t);
        // y_e = c * Phi D0 Phi^dag x_g ; y_g = conj(c) * Phi D0^dag Phi^dag x_e
        buf = phases.conjugate().cwiseProduct(x.segment(fd, fd));
        y.segment(0, fd) = c * phases.cwiseProduct((D0 * buf).eval());
        buf = phases.conjugate().cwiseProduct(x.segment(0, fd));
        y.segment(fd, fd) = std::conj(c) * phases.cwiseProduct((D0H * buf).eval());
    };
    return TimeDependentHamiltonian{space, std::move(apply)};
}

TimeDependentHamiltonian ion_ld_action(const IonDriveParams& d, const HilbertSpace& space) {
    check_phases(d);
    const int fd = space.fock_dim();
    auto apply = [d, space, fd, block = Matrix(fd, fd)](
                     double t, Eigen::Ref<const Vector> x, Eigen::Ref<Vector> y) mutable {
        block = ld_block(d, space, t);
        y.segment(0, fd) = block * x.segment(fd, fd);
        y.segment(fd, fd) = block.adjoint() * x.segment(0, fd);
    };
    return TimeDependentHamiltonian{space, std::move(apply)};
}

}  // namespace rabistark
