#include "rabistark/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "rabistark/detail/dormand_prince.hpp"

namespace rabistark {

int Trajectory::column_index(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : int(it - names.begin());
}

Eigen::VectorXd Trajectory::column(const std::string& name) const {
    const int idx = column_index(name);
    if (idx < 0) throw std::invalid_argument("Trajectory: no series named " + name);
    return values.col(idx);
}

std::vector<std::string> observable_names(const HilbertSpace& space, QubitBasis basis) {
    std::vector<std::string> names;
    names.reserve(space.dim() + 2);
    const char* upper = basis == QubitBasis::Bare ? "e" : "plus";
    const char* lower = basis == QubitBasis::Bare ? "g" : "minus";
    for (int n = 0; n <= space.n_max; ++n) names.push_back(std::string("P_") + upper + "_" + std::to_string(n));
    for (int n = 0; n <= space.n_max; ++n) names.push_back(std::string("P_") + lower + "_" + std::to_string(n));
    names.emplace_back("n_mean");
    names.emplace_back("sigma_ee");
    return names;
}

Eigen::VectorXd observable_values(const HilbertSpace& space, const Vector& amps, QubitBasis basis) {
    const int fd = space.fock_dim();
    Eigen::VectorXd out(space.dim() + 2);
    double n_mean = 0.0, ee = 0.0;
    for (int n = 0; n < fd; ++n) {
        const Complex ce = amps(n);
        const Complex cg = amps(fd + n);
        double p_up, p_dn;
        if (basis == QubitBasis::Bare) {
            p_up = std::norm(ce);
            p_dn = std::norm(cg);
        } else {
            p_up = 0.5 * std::norm(ce + cg);
            p_dn = 0.5 * std::norm(ce - cg);
        }
        out(n) = p_up;
        out(fd + n) = p_dn;
        n_mean += n * (std::norm(ce) + std::norm(cg));
        ee += std::norm(ce);
    }
    out(2 * fd) = n_mean;
    out(2 * fd + 1) = ee;
    return out;
}

Eigen::VectorXd observable_values(const HilbertSpace& space, const Matrix& rho, QubitBasis basis) {
    const int fd = space.fock_dim();
    Eigen::VectorXd out(space.dim() + 2);
    double n_mean = 0.0, ee = 0.0;
    for (int n = 0; n < fd; ++n) {
        const double p_ee = rho(n, n).real();
        const double p_gg = rho(fd + n, fd + n).real();
        double p_up, p_dn;
        if (basis == QubitBasis::Bare) {
            p_up = p_ee;
            p_dn = p_gg;
        } else {
            const double cross = rho(n, fd + n).real();
            p_up = 0.5 * (p_ee + p_gg) + cross;
            p_dn = 0.5 * (p_ee + p_gg) - cross;
        }
        out(n) = p_up;
        out(fd + n) = p_dn;
        n_mean += n * (p_ee + p_gg);
        ee += p_ee;
    }
    out(2 * fd) = n_mean;
    out(2 * fd + 1) = ee;
    return out;
}

double mean_photon_number(const StateVector& psi) {
    return observable_values(psi.space, psi.amps, QubitBasis::Bare)(psi.space.dim());
}

double excited_population(const StateVector& psi) {
    return observable_values(psi.space, psi.amps, QubitBasis::Bare)(psi.space.dim() + 1);
}

double population(const StateVector& psi, QubitLabel label, int n) {
    const QubitBasis basis =
        (label == QubitLabel::Plus || label == QubitLabel::Minus) ? QubitBasis::SigmaX : QubitBasis::Bare;
    const Eigen::VectorXd vals = observable_values(psi.space, psi.amps, basis);
    const int fd = psi.space.fock_dim();
    const bool upper = label == QubitLabel::Excited || label == QubitLabel::Plus;
    return vals(upper ? n : fd + n);
}

double expectation(const QOperator& op, const StateVector& psi) {
    require_same_space(op.space, psi.space, "expectation");
    return (psi.amps.adjoint() * op.mat * psi.amps)(0, 0).real();
}

double expectation(const QOperator& op, const DensityMatrix& rho) {
    require_same_space(op.space, rho.space, "expectation");
    return (op.mat * rho.mat).trace().real();
}

Trajectory trajectory_from_states(const HilbertSpace& space, const std::vector<double>& times,
                                  const std::vector<Vector>& states, QubitBasis basis) {
    Trajectory traj;
    traj.times = times;
    traj.names = observable_names(space, basis);
    traj.values.resize(times.size(), traj.names.size());
    for (std::size_t i = 0; i < states.size(); ++i)
        traj.values.row(i) = observable_values(space, states[i], basis).transpose();
    traj.states = states;
    return traj;
}

namespace {

struct EigenH {
    Eigen::VectorXd evals;
    Matrix evecs;
};

EigenH diagonalize(const QOperator& H) {
    if (!is_hermitian(H.mat, 1e-10)) throw std::invalid_argument("propagate: Hamiltonian not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(H.mat);
    return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace

Trajectory propagate_state(const QOperator& H, const StateVector& psi0, const TimeGrid& grid,
                           const PropagateOptions& opts) {
    require_same_space(H.space, psi0.space, "propagate_state");
    const EigenH eh = diagonalize(H);
    const Vector w = eh.evecs.adjoint() * psi0.amps;

    Trajectory traj;
    traj.times = grid.times();
    traj.names = observable_names(H.space, opts.basis);
    traj.values.resize(grid.n_samples, traj.names.size());
    if (opts.store_states) traj.states.reserve(grid.n_samples);

    Vector psi(psi0.amps.size());
    for (int i = 0; i < grid.n_samples; ++i) {
        const double t = traj.times[i];
        psi = eh.evecs * (Eigen::exp((-I * t) * eh.evals.cast<Complex>().array()) * w.array()).matrix();
        traj.values.row(i) = observable_values(H.space, psi, opts.basis).transpose();
        if (opts.store_states) traj.states.push_back(psi);
    }
    return traj;
}

Trajectory propagate_state(const TimeDependentHamiltonian& H, const StateVector& psi0,
                           const TimeGrid& grid, const PropagateOptions& opts) {
    require_same_space(H.space, psi0.space, "propagate_state");

    Trajectory traj;
    traj.times = grid.times();
    traj.names = observable_names(H.space, opts.basis);
    traj.values.resize(grid.n_samples, traj.names.size());
    if (opts.store_states) traj.states.reserve(grid.n_samples);

    auto rhs = [&H, tmp = Vector(psi0.amps.size())](double t, const Vector& y, Vector& dydt) mutable {
        H.apply(t, y, tmp);
        dydt = -I * tmp;
    };
    const double norm_budget = 100.0 * opts.tol;
    detail::integrate_dp5(
        rhs, psi0.amps, grid.t_start, grid.t_end, traj.times, opts.tol,
        [&](std::size_t i, const Vector& y) {
            if (std::abs(y.norm() - 1.0) > norm_budget)
                throw NumericError("propagate_state: norm drift exceeded budget");
            traj.values.row(i) = observable_values(H.space, y, opts.basis).transpose();
            if (opts.store_states) traj.states.push_back(y);
        });
    return traj;
}

Trajectory propagate_density(const QOperator& H, const LindbladParams& lp, const DensityMatrix& rho0,
                             const TimeGrid& grid, const PropagateOptions& opts) {
    require_same_space(H.space, rho0.space, "propagate_density");
    const HilbertSpace space = H.space;
    const int dim = space.dim();
    const EigenH eh = diagonalize(H);

    Trajectory traj;
    traj.times = grid.times();
    traj.names = observable_names(space, opts.basis);
    traj.values.resize(grid.n_samples, traj.names.size());

    Matrix rho_t(dim, dim);
    Eigen::SelfAdjointEigenSolver<Matrix> psd;
    auto emit = [&](std::size_t i, const Matrix& sigma_hat, double t) {
        // back from the eigenframe: rho = V e^{-i L t} sigma e^{i L t} V^dag
        const Vector ph = Eigen::exp((-I * t) * eh.evals.cast<Complex>().array()).matrix();
        rho_t.noalias() = eh.evecs * (ph.asDiagonal() * sigma_hat * ph.conjugate().asDiagonal()) * eh.evecs.adjoint();
        const double tr = rho_t.trace().real();
        if (std::abs(tr - 1.0) > 1e-7) throw NumericError("propagate_density: trace drift beyond 1e-7");
        psd.compute(rho_t, Eigen::EigenvaluesOnly);
        if (psd.eigenvalues().minCoeff() < -1e-6)
            throw NumericError("propagate_density: positivity violated beyond tolerance");
        traj.values.row(i) = observable_values(space, rho_t, opts.basis).transpose();
    };

    const Matrix sigma0 = eh.evecs.adjoint() * rho0.mat * eh.evecs;

    if (lp.kappa == 0.0) {
        for (int i = 0; i < grid.n_samples; ++i) emit(i, sigma0, traj.times[i]);
        return traj;
    }

    // Dissipator in the eigenframe: sigma' = kappa (2 A(t) sigma A(t)^dag
    // - M(t) sigma - sigma M(t)), with A(t) = A_hat .* E(t), M(t) = (A_hat^dag
    // A_hat) .* E(t) and E_jk = e^{i (l_j - l_k) t}. Trace-free identically.
    const Matrix a_hat = eh.evecs.adjoint() * embed_mode(space, ladder_ops(space).a).mat * eh.evecs;
    const Matrix m_hat = a_hat.adjoint() * a_hat;

    struct Work {
        Vector ph;
        Matrix at, mt, tmp;
    };
    auto rhs = [&, w = Work{Vector(dim), Matrix(dim, dim), Matrix(dim, dim), Matrix(dim, dim)}](
                   double t, const Matrix& sig, Matrix& dsig) mutable {
        w.ph = Eigen::exp((I * t) * eh.evals.cast<Complex>().array()).matrix();
        w.at = w.ph.asDiagonal() * a_hat * w.ph.conjugate().asDiagonal();
        w.mt = w.ph.asDiagonal() * m_hat * w.ph.conjugate().asDiagonal();
        w.tmp.noalias() = w.at * sig;
        dsig.noalias() = 2.0 * w.tmp * w.at.adjoint();
        dsig.noalias() -= w.mt * sig;
        dsig.noalias() -= sig * w.mt;
        dsig *= lp.kappa;
    };
    detail::integrate_dp5(rhs, sigma0, grid.t_start, grid.t_end, traj.times, opts.tol,
                          [&](std::size_t i, const Matrix& sig) { emit(i, sig, traj.times[i]); });
    return traj;
}

}  // namespace rabistark
