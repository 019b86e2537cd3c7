#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "rabistark/qspace.hpp"

using namespace rabistark;

namespace {

Matrix random_complex(int rows, int cols, std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Complex(u(rng), u(rng));
    return m;
}

}  // namespace

TEST_CASE("ladder operators on n_max = 3") {
    const HilbertSpace space(3);
    const LadderOps lad = ladder_ops(space);

    Vector fock1 = Vector::Zero(4);
    fock1(1) = 1.0;
    const Vector lowered = lad.a * fock1;
    CHECK(std::abs(lowered(0) - 1.0) < 1e-15);  // a|1> = |0>

    Vector fock2 = Vector::Zero(4);
    fock2(2) = 1.0;
    const Vector raised = lad.a_dagger * fock2;
    CHECK(std::abs(raised(3) - std::sqrt(3.0)) < 1e-15);

    // truncation: the n_max -> n_max+1 element is dropped
    Vector top = Vector::Zero(4);
    top(3) = 1.0;
    CHECK((lad.a_dagger * top).norm() == 0.0);

    CHECK((lad.number - lad.a_dagger * lad.a).cwiseAbs().maxCoeff() < 1e-12);

    // number diagonal per qubit sector after embedding
    const QOperator n_op = embed_mode(space, lad.number);
    for (int q = 0; q < 2; ++q)
        for (int n = 0; n <= 3; ++n) CHECK(n_op.mat(q * 4 + n, q * 4 + n).real() == double(n));
}

TEST_CASE("qubit operator algebra") {
    const auto& p = qubit_ops();
    CHECK((p.sp * p.sm + p.sm * p.sp - Matrix2::Identity()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((p.sp - 0.5 * (p.sx + I * p.sy)).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((p.sx * p.sy - p.sy * p.sx - 2.0 * I * p.sz).cwiseAbs().maxCoeff() < 1e-15);

    // sigma_+ |g> = |e>, sigma_z conventions
    Eigen::Vector2cd g(0.0, 1.0), e(1.0, 0.0);
    CHECK(((p.sp * g) - e).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(((p.sz * e) - e).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(((p.sz * g) + g).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("embed structure and the mixed-product property") {
    const HilbertSpace space(3);
    const auto& pauli = qubit_ops();
    const LadderOps lad = ladder_ops(space);

    CHECK((embed(space, Matrix2::Identity(), Matrix::Identity(4, 4)).mat -
           Matrix::Identity(8, 8)).cwiseAbs().maxCoeff() == 0.0);

    // embed(sz, n) |e,2> = +2 |e,2>
    const QOperator zn = embed(space, pauli.sz, lad.number);
    const StateVector e2 = basis_state(space, QubitLabel::Excited, 2);
    CHECK(((zn.mat * e2.amps) - 2.0 * e2.amps).cwiseAbs().maxCoeff() < 1e-15);

    // embed(s+, a) |g,1> = |e,0>
    const QOperator pa = embed(space, pauli.sp, lad.a);
    const StateVector g1 = basis_state(space, QubitLabel::Ground, 1);
    const StateVector e0 = basis_state(space, QubitLabel::Excited, 0);
    CHECK(((pa.mat * g1.amps) - e0.amps).cwiseAbs().maxCoeff() < 1e-15);

    std::mt19937 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix2 q1 = random_complex(2, 2, rng), q2 = random_complex(2, 2, rng);
        const Matrix m1 = random_complex(4, 4, rng), m2 = random_complex(4, 4, rng);
        // mixed product: (q1 x m1)(q2 x m2) = (q1 q2) x (m1 m2)
        const Matrix lhs = embed(space, q1, m1).mat * embed(space, q2, m2).mat;
        const Matrix rhs = embed(space, q1 * q2, m1 * m2).mat;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        // bilinearity
        const Matrix sum = embed(space, q1, m1 + m2).mat;
        CHECK((sum - embed(space, q1, m1).mat - embed(space, q1, m2).mat).cwiseAbs().maxCoeff() < 1e-12);
    }

    CHECK_THROWS_AS(embed(space, Matrix2::Identity(), Matrix::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("basis states") {
    const HilbertSpace space(4);
    const StateVector e0 = basis_state(space, QubitLabel::Excited, 0);
    CHECK(e0.amps(0) == Complex(1.0));
    CHECK(e0.amps.norm() == 1.0);

    const StateVector plus3 = basis_state(space, QubitLabel::Plus, 3);
    CHECK(std::abs(plus3.amps(space.index(QubitLabel::Excited, 3)) - 1.0 / std::sqrt(2.0)) < 1e-15);
    CHECK(std::abs(plus3.amps(space.index(QubitLabel::Ground, 3)) - 1.0 / std::sqrt(2.0)) < 1e-15);

    const StateVector minus1 = basis_state(space, QubitLabel::Minus, 1);
    CHECK(std::abs(minus1.amps(space.index(QubitLabel::Ground, 1)) + 1.0 / std::sqrt(2.0)) < 1e-15);

    CHECK_THROWS_AS(basis_state(space, QubitLabel::Ground, 5), std::invalid_argument);
}

TEST_CASE("displacement operator closed form") {
    const HilbertSpace space(20);

    SUBCASE("z = 0 is the identity") {
        const DisplacementOp d = displacement_op(space, 0.0);
        CHECK((d.mat - Matrix::Identity(21, 21)).cwiseAbs().maxCoeff() < 1e-15);
        CHECK_FALSE(d.truncation_warning);
    }

    SUBCASE("vacuum matrix element, z = 0.1i") {
        // <0|D(z)|0> = e^{-|z|^2/2}; cross-checked below against a plain series
        // expansion of exp(z a^dag - z* a) truncated at order 6.
        const Complex z(0.0, 0.1);
        const DisplacementOp d = displacement_op(space, z);
        const double expected = std::exp(-0.005);
        CHECK(std::abs(d.mat(0, 0) - expected) < 1e-12);
        CHECK(std::abs(expected - 0.99501) < 1e-5);

        const LadderOps lad = ladder_ops(space);
        const Matrix gen = z * lad.a_dagger - std::conj(z) * lad.a;
        Matrix series = Matrix::Identity(21, 21);
        Matrix term = Matrix::Identity(21, 21);
        for (int k = 1; k <= 6; ++k) {
            term = (term * gen / double(k)).eval();
            series += term;
        }
        CHECK(std::abs(series(0, 0) - d.mat(0, 0)) < 1e-9);
    }

    SUBCASE("interior unitarity and inverse") {
        for (const Complex z : {Complex(0.3, 0.0), Complex(0.0, 0.25), Complex(0.2, -0.2)}) {
            const Matrix d = displacement_op(space, z).mat;
            const Matrix dinv = displacement_op(space, -z).mat;
            const Matrix prod = d * dinv;
            const Matrix gram = d.adjoint() * d;
            const int interior = space.n_max - 8;
            for (int i = 0; i <= interior; ++i)
                for (int j = 0; j <= interior; ++j) {
                    const double target = (i == j) ? 1.0 : 0.0;
                    CHECK(std::abs(prod(i, j) - target) < 1e-8);
                    CHECK(std::abs(gram(i, j) - target) < 1e-8);
                }
        }
    }

    SUBCASE("matches direct matrix exponentiation on the interior block") {
        const LadderOps lad = ladder_ops(space);
        for (const Complex z : {Complex(0.3, 0.0), Complex(0.1, 0.2), Complex(0.0, -0.3)}) {
            const Matrix gen = z * lad.a_dagger - std::conj(z) * lad.a;
            const Matrix direct = gen.exp();
            const Matrix closed = displacement_op(space, z).mat;
            const int interior = space.n_max - 8;
            double worst = 0.0;
            for (int i = 0; i <= interior; ++i)
                for (int j = 0; j <= interior; ++j) worst = std::max(worst, std::abs(direct(i, j) - closed(i, j)));
            CHECK(worst < 1e-8);
        }
    }

    SUBCASE("truncation warning flag") {
        CHECK(displacement_op(space, Complex(0.5, 0.0)).truncation_warning);
        CHECK_FALSE(displacement_op(HilbertSpace(2), Complex(1e-5, 0.0)).truncation_warning);
    }
}

TEST_CASE("parity operator squares to identity and anticommutes with the flip") {
    const HilbertSpace space(5);
    const QOperator pi_op = parity_op(space);
    CHECK((pi_op.mat * pi_op.mat - Matrix::Identity(space.dim(), space.dim())).cwiseAbs().maxCoeff() < 1e-15);
    const StateVector g1 = basis_state(space, QubitLabel::Ground, 1);
    CHECK(((pi_op.mat * g1.amps) - g1.amps).cwiseAbs().maxCoeff() < 1e-15);  // (-1)(-1)^1 = +1
}

TEST_CASE("state and density-matrix invariants are enforced") {
    const HilbertSpace space(2);
    Vector bad = Vector::Zero(space.dim());
    bad(0) = 0.5;
    CHECK_THROWS_AS(StateVector(space, bad), std::invalid_argument);

    const StateVector ok = basis_state(space, QubitLabel::Ground, 1);
    const DensityMatrix rho = DensityMatrix::from_pure(ok);
    CHECK(std::abs(rho.mat.trace().real() - 1.0) < 1e-14);

    Matrix not_herm = Matrix::Zero(space.dim(), space.dim());
    not_herm(0, 1) = 1.0;
    not_herm(0, 0) = 1.0;
    CHECK_THROWS_AS(DensityMatrix(space, not_herm), std::invalid_argument);
}
