#include "rabistark/qspace.hpp"

#include <cmath>

namespace rabistark {

DensityMatrix::DensityMatrix(const HilbertSpace& s, Matrix m) : space(s), mat(std::move(m)) {
    if (mat.rows() != space.dim() || mat.cols() != space.dim())
        throw std::invalid_argument("DensityMatrix: size does not match space");
    if (!is_hermitian(mat, 1e-10)) throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(mat.trace().real() - 1.0) > 1e-8 || std::abs(mat.trace().imag()) > 1e-8)
        throw std::invalid_argument("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(mat, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
}

DensityMatrix DensityMatrix::from_pure(const StateVector& psi) {
    return DensityMatrix(psi.space, psi.amps * psi.amps.adjoint());
}

LadderOps ladder_ops(const HilbertSpace& space) {
    const int d = space.fock_dim();
    LadderOps ops{Matrix::Zero(d, d), Matrix::Zero(d, d), Matrix::Zero(d, d)};
    for (int n = 0; n + 1 < d; ++n) {
        const double amp = std::sqrt(double(n + 1));
        ops.a(n, n + 1) = amp;
        ops.a_dagger(n + 1, n) = amp;
    }
    for (int n = 0; n < d; ++n) ops.number(n, n) = double(n);
    return ops;
}

const PauliOps& qubit_ops() {
    static const PauliOps ops = [] {
        PauliOps p;
        p.sx << 0, 1, 1, 0;
        p.sy << 0, -I, I, 0;
        p.sz << 1, 0, 0, -1;
        p.sp << 0, 1, 0, 0;
        p.sm << 0, 0, 1, 0;
        p.id.setIdentity();
        return p;
    }();
    return ops;
}

QOperator embed(const HilbertSpace& space, const Matrix2& qubit_part, const Matrix& mode_part) {
    const int d = space.fock_dim();
    if (mode_part.rows() != d || mode_part.cols() != d)
        throw std::invalid_argument("embed: mode part size does not match space");
    Matrix out(space.dim(), space.dim());
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block(i * d, j * d, d, d) = qubit_part(i, j) * mode_part;
    return QOperator(space, std::move(out));
}

QOperator embed_qubit(const HilbertSpace& space, const Matrix2& qubit_part) {
    return embed(space, qubit_part, Matrix::Identity(space.fock_dim(), space.fock_dim()));
}

QOperator embed_mode(const HilbertSpace& space, const Matrix& mode_part) {
    return embed(space, Matrix2::Identity(), mode_part);
}

StateVector basis_state(const HilbertSpace& space, QubitLabel label, int n) {
    if (n < 0 || n > space.n_max) throw std::invalid_argument("basis_state: Fock index out of range");
    Vector amps = Vector::Zero(space.dim());
    const double r = 1.0 / std::sqrt(2.0);
    switch (label) {
        case QubitLabel::Excited: amps(space.index(QubitLabel::Excited, n)) = 1.0; break;
        case QubitLabel::Ground: amps(space.index(QubitLabel::Ground, n)) = 1.0; break;
        case QubitLabel::Plus:
            amps(space.index(QubitLabel::Excited, n)) = r;
            amps(space.index(QubitLabel::Ground, n)) = r;
            break;
        case QubitLabel::Minus:
            amps(space.index(QubitLabel::Excited, n)) = r;
            amps(space.index(QubitLabel::Ground, n)) = -r;
            break;
    }
    return StateVector(space, std::move(amps));
}

// <m|D(z)|n> = sqrt(n!/m!) z^{m-n} e^{-|z|^2/2} L_n^{(m-n)}(|z|^2) for m >= n,
// and the adjoint relation D(z)^dag = D(-z) for m < n. The generalized Laguerre
// values come from the three-term recurrence, which is stable for x >= 0.
DisplacementOp displacement_op(const HilbertSpace& space, Complex z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw std::invalid_argument("displacement_op: z must be finite");
    const int d = space.fock_dim();
    const double x = std::norm(z);
    Matrix out(d, d);

    // laguerre(k, alpha) over all orders k for fixed alpha = m-n.
    auto fill = [&](int alpha, auto&& put) {
        double lkm1 = 0.0, lk = 1.0;  // L_{-1} = 0, L_0 = 1
        for (int n = 0; n + alpha < d; ++n) {
            put(n, lk);
            const double lkp1 = ((2 * n + 1 + alpha - x) * lk - (n + alpha) * lkm1) / double(n + 1);
            lkm1 = lk;
            lk = lkp1;
        }
    };

    const double pref = std::exp(-0.5 * x);
    for (int alpha = 0; alpha < d; ++alpha) {
        const Complex zpow = std::pow(z, alpha);
        const Complex zbpow = std::pow(-std::conj(z), alpha);
        fill(alpha, [&](int n, double lag) {
            const int m = n + alpha;
            const double ratio = std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)));
            out(m, n) = ratio * zpow * pref * lag;
            out(n, m) = ratio * zbpow * pref * lag;
        });
    }
    return DisplacementOp{std::move(out), x * space.n_max > 1e-6};
}

QOperator parity_op(const HilbertSpace& space) {
    const int d = space.fock_dim();
    Matrix alt = Matrix::Zero(d, d);
    for (int n = 0; n < d; ++n) alt(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
    return embed(space, qubit_ops().sz, alt);
}

bool is_hermitian(const Matrix& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace rabistark
