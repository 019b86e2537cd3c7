#pragma once

#include <optional>

#include "rabistark/types.hpp"

namespace rabistark {

// Operator on the composite qubit (x) Fock space. Entries are dense; problem sizes
// here stay below dim ~ 128 so there is nothing to gain from sparsity.
struct QOperator {
    HilbertSpace space;
    Matrix mat;

    QOperator(const HilbertSpace& s, Matrix m) : space(s), mat(std::move(m)) {
        if (mat.rows() != space.dim() || mat.cols() != space.dim())
            throw std::invalid_argument("QOperator: matrix size does not match space");
    }
};

// Normalized pure state on the composite space; norm checked at construction.
struct StateVector {
    HilbertSpace space;
    Vector amps;

    StateVector(const HilbertSpace& s, Vector a) : space(s), amps(std::move(a)) {
        if (amps.size() != space.dim())
            throw std::invalid_argument("StateVector: length does not match space");
        if (std::abs(amps.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("StateVector: not normalized");
    }
};

// Density matrix with the usual sanity budget: Hermitian to 1e-10, unit trace to
// 1e-8, eigenvalues >= -1e-8.
struct DensityMatrix {
    HilbertSpace space;
    Matrix mat;

    DensityMatrix(const HilbertSpace& s, Matrix m);

    static DensityMatrix from_pure(const StateVector& psi);
};

struct LadderOps {
    Matrix a;         // annihilation, Fock-only, size fock_dim
    Matrix a_dagger;  // creation
    Matrix number;    // a^dag a, exactly diagonal
};

// a|n> = sqrt(n)|n-1>, a^dag|n> = sqrt(n+1)|n+1>; the element leaving the
// truncated space (n_max -> n_max+1) is dropped.
LadderOps ladder_ops(const HilbertSpace& space);

struct PauliOps {
    Matrix2 sx, sy, sz, sp, sm, id;
};

// sigma_z |e> = |e>, sigma_z |g> = -|g>, sigma_+ = |e><g|.
const PauliOps& qubit_ops();

// Kronecker embedding, qubit factor first.
QOperator embed(const HilbertSpace& space, const Matrix2& qubit_part, const Matrix& mode_part);

// Convenience embeddings against the identity on the other factor.
QOperator embed_qubit(const HilbertSpace& space, const Matrix2& qubit_part);
QOperator embed_mode(const HilbertSpace& space, const Matrix& mode_part);

// |label, n>; plus/minus are the sigma_x eigenstates (|e> +- |g>)/sqrt(2).
StateVector basis_state(const HilbertSpace& space, QubitLabel label, int n);

struct DisplacementOp {
    Matrix mat;               // Fock-only, size fock_dim
    bool truncation_warning;  // |z|^2 * n_max suggests leakage above 1e-6
};

// D(z) = exp(z a^dag - z* a) via the closed-form Laguerre matrix elements,
// computed with log-factorials. Exact elements of the infinite-space operator,
// restricted to the truncated block; unitary on the interior away from the edge.
DisplacementOp displacement_op(const HilbertSpace& space, Complex z);

// Parity sigma_z (-1)^{a^dag a}; commutes with the Rabi-Stark Hamiltonian.
QOperator parity_op(const HilbertSpace& space);

bool is_hermitian(const Matrix& m, double tol);

}  // namespace rabistark
