#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace rabistark {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Matrix2 = Eigen::Matrix2cd;
using RealVector = Eigen::VectorXd;

inline constexpr Complex I{0.0, 1.0};

// Numerical failure during propagation (step underflow, norm/positivity budget blown).
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncation convergence re-check failed (observable drift at n_max+10 too large).
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid run configuration; `path` points at the offending key when known.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg, std::string path = {})
        : std::runtime_error(path.empty() ? msg : msg + " (at " + path + ")"), path(std::move(path)) {}
    std::string path;
};

// A perturbative channel hit an exact intermediate resonance (vanishing denominator).
struct SingularChannelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class QubitLabel { Excited, Ground, Plus, Minus };
enum class QubitBasis { Bare, SigmaX };
enum class Branch { Plus, Minus };  // Plus: counter-rotating (anti-JC), Minus: rotating (JC)

inline const char* to_string(Branch b) { return b == Branch::Plus ? "plus" : "minus"; }

// Two-level system tensor truncated Fock mode. Qubit factor first:
// coordinate = qubit_index * (n_max+1) + n, with |e> = 0, |g> = 1.
struct HilbertSpace {
    int n_max;

    explicit HilbertSpace(int n_max_) : n_max(n_max_) {
        if (n_max < 1) throw std::invalid_argument("HilbertSpace: n_max must be >= 1");
    }

    int fock_dim() const { return n_max + 1; }
    int dim() const { return 2 * (n_max + 1); }

    int index(QubitLabel q, int n) const {
        if (n < 0 || n > n_max) throw std::invalid_argument("HilbertSpace: Fock index out of range");
        if (q != QubitLabel::Excited && q != QubitLabel::Ground)
            throw std::invalid_argument("HilbertSpace: index() takes bare labels only");
        return (q == QubitLabel::Excited ? 0 : 1) * fock_dim() + n;
    }

    bool operator==(const HilbertSpace&) const = default;
};

inline void require_same_space(const HilbertSpace& a, const HilbertSpace& b, const char* what) {
    if (!(a == b)) throw std::invalid_argument(std::string(what) + ": Hilbert space mismatch");
}

}  // namespace rabistark
