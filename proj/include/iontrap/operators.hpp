// operators.hpp: truncated Fock-space and qubit operator algebra

#pragma once

#include <complex>

#include <Eigen/Dense>

namespace iontrap {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using Ket = Eigen::VectorXcd;

enum class Level { Ground = 0, Excited = 1 };

// Joint qubit ⊗ Fock space truncated at n_max phonons.
//
// Basis ordering is Fock-major: the joint index of |s, n> is 2*n + s with
// s = 0 for |g> and s = 1 for |e>. Every operator in the library uses it.
class HilbertConfig {
  public:
    explicit HilbertConfig(int n_max = 8);

    int n_max() const { return n_max_; }
    int fock_dim() const { return n_max_ + 1; }
    int dim() const { return 2 * (n_max_ + 1); }
    int index(Level s, int n) const { return 2 * n + static_cast<int>(s); }

    bool operator==(const HilbertConfig&) const = default;

  private:
    int n_max_;
};

// Ladder operator a on the Fock factor alone: entry (n-1, n) = sqrt(n).
ComplexMatrix annihilation(const HilbertConfig& cfg);
ComplexMatrix creation(const HilbertConfig& cfg);
ComplexMatrix number_operator(const HilbertConfig& cfg);

struct QubitOperators {
    ComplexMatrix sigma_plus;  // |e><g|
    ComplexMatrix sigma_minus; // |g><e|
    ComplexMatrix sigma_x;
    ComplexMatrix excited_projector; // sigma_plus * sigma_minus
};

QubitOperators qubit_operators();

// Embeds a 2x2 qubit operator and a Fock operator into the joint space.
// Throws std::invalid_argument on non-square or mis-sized factors.
ComplexMatrix tensor(const ComplexMatrix& qubit_op, const ComplexMatrix& fock_op);

Ket basis_ket(const HilbertConfig& cfg, Level s, int n);

// Diagnostics used by the invariant checks.
double hermiticity_error(const ComplexMatrix& m); // ||m - m^+||_F / ||m||_F
double min_eigenvalue(const ComplexMatrix& hermitian);
double spectral_radius(const ComplexMatrix& hermitian);

struct StateTolerances {
    double hermiticity = 1e-12;
    double trace = 1e-12;
    double positivity = -1e-10;
};

// Hermitian, unit-trace, positive semidefinite operator on the joint space.
class DensityMatrix {
  public:
    // Throws std::invalid_argument if any invariant fails at `tol`.
    static DensityMatrix validated(ComplexMatrix m, const StateTolerances& tol = {});
    static DensityMatrix pure(const Ket& psi);
    static DensityMatrix basis_state(const HilbertConfig& cfg, Level s, int n);

    // For states produced by the evolution routines, which apply their own
    // (looser) invariant checks.
    static DensityMatrix trusted(ComplexMatrix m) { return DensityMatrix(std::move(m)); }

    const ComplexMatrix& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    Complex trace() const { return m_.trace(); }

  private:
    explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
    ComplexMatrix m_;
};

// Sum over n of <g,n|rho|g,n>.
double ground_population(const ComplexMatrix& rho);
inline double ground_population(const DensityMatrix& rho) { return ground_population(rho.matrix()); }

// Population in the two highest retained Fock levels, both qubit states.
double top_levels_population(const ComplexMatrix& rho);

} // namespace iontrap
