#pragma once

#include <string>
#include <vector>

#include "rabistark/models.hpp"

namespace rabistark {

// Output sampling; independent of the integrator's internal step control.
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 0.0;
    int n_samples = 2;

    TimeGrid() = default;
    TimeGrid(double t0, double t1, int n) : t_start(t0), t_end(t1), n_samples(n) {
        if (!(t_end > t_start)) throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
        if (n_samples < 2) throw std::invalid_argument("TimeGrid: need at least 2 samples");
    }

    std::vector<double> times() const {
        std::vector<double> ts(n_samples);
        const double h = (t_end - t_start) / (n_samples - 1);
        for (int i = 0; i < n_samples; ++i) ts[i] = t_start + i * h;
        ts.back() = t_end;
        return ts;
    }
};

// Named real time series: populations P_<label>_<n> for every basis state, then
// n_mean = <a^dag a> and sigma_ee = <s+ s->. Optional state snapshots.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // n_samples x n_series
    std::vector<Vector> states;

    int column_index(const std::string& name) const;
    Eigen::VectorXd column(const std::string& name) const;
    double max_of(const std::string& name) const { return column(name).maxCoeff(); }
    double min_of(const std::string& name) const { return column(name).minCoeff(); }
};

struct PropagateOptions {
    double tol = 1e-9;
    QubitBasis basis = QubitBasis::Bare;
    bool store_states = false;
};

// Constant Hamiltonian: exact propagator through the Hermitian eigendecomposition.
Trajectory propagate_state(const QOperator& H, const StateVector& psi0, const TimeGrid& grid,
                           const PropagateOptions& opts = {});

// Time-dependent Hamiltonian: adaptive Dormand-Prince 5(4) on i dpsi/dt = H(t) psi.
// Norm drift beyond 100 * tol raises NumericError.
Trajectory propagate_state(const TimeDependentHamiltonian& H, const StateVector& psi0,
                           const TimeGrid& grid, const PropagateOptions& opts = {});

// Constant-H Lindblad evolution. The unitary part is absorbed exactly by moving
// to the Hamiltonian eigenframe; only the dissipator is integrated (adaptive
// DP5(4) on the transformed equation). Trace is preserved identically by the
// transformed right-hand side; positivity is checked at every sample.
Trajectory propagate_density(const QOperator& H, const LindbladParams& lp, const DensityMatrix& rho0,
                             const TimeGrid& grid, const PropagateOptions& opts = {});

// Observable bundles for a single state / density matrix.
std::vector<std::string> observable_names(const HilbertSpace& space, QubitBasis basis);
Eigen::VectorXd observable_values(const HilbertSpace& space, const Vector& amps, QubitBasis basis);
Eigen::VectorXd observable_values(const HilbertSpace& space, const Matrix& rho, QubitBasis basis);

double mean_photon_number(const StateVector& psi);
double excited_population(const StateVector& psi);
double population(const StateVector& psi, QubitLabel label, int n);

// Expectation of a Hermitian operator.
double expectation(const QOperator& op, const StateVector& psi);
double expectation(const QOperator& op, const DensityMatrix& rho);

// Rebuild the named series of a trajectory from stored snapshots (used after
// frame transformations).
Trajectory trajectory_from_states(const HilbertSpace& space, const std::vector<double>& times,
                                  const std::vector<Vector>& states, QubitBasis basis);

}  // namespace rabistark
