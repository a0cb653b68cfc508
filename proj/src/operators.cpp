#include "iontrap/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace iontrap {

HilbertConfig::HilbertConfig(int n_max) : n_max_(n_max)
{
    if (n_max < 2) {
        throw std::invalid_argument("HilbertConfig: n_max must be >= 2, got " + std::to_string(n_max));
    }
}

ComplexMatrix annihilation(const HilbertConfig& cfg)
{
    const int d = cfg.fock_dim();
    ComplexMatrix a = ComplexMatrix::Zero(d, d);
    for (int n = 1; n < d; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

ComplexMatrix creation(const HilbertConfig& cfg) { return annihilation(cfg).adjoint(); }

ComplexMatrix number_operator(const HilbertConfig& cfg)
{
    const int d = cfg.fock_dim();
    ComplexMatrix num = ComplexMatrix::Zero(d, d);
    for (int n = 0; n < d; ++n) {
        num(n, n) = static_cast<double>(n);
    }
    return num;
}

QubitOperators qubit_operators()
{
    QubitOperators q;
    q.sigma_plus = ComplexMatrix::Zero(2, 2);
    q.sigma_plus(1, 0) = 1.0; // |e><g|
    q.sigma_minus = q.sigma_plus.adjoint();
    q.sigma_x = q.sigma_plus + q.sigma_minus;
    q.excited_projector = q.sigma_plus * q.sigma_minus;
    return q;
}

ComplexMatrix tensor(const ComplexMatrix& qubit_op, const ComplexMatrix& fock_op)
{
    if (qubit_op.rows() != 2 || qubit_op.cols() != 2) {
        throw std::invalid_argument("tensor: qubit factor must be 2x2");
    }
    if (fock_op.rows() != fock_op.cols() || fock_op.rows() < 1) {
        throw std::invalid_argument("tensor: Fock factor must be square");
    }
    const Eigen::Index nf = fock_op.rows();
    ComplexMatrix out(2 * nf, 2 * nf);
    for (Eigen::Index n = 0; n < nf; ++n) {
        for (Eigen::Index m = 0; m < nf; ++m) {
            out.block<2, 2>(2 * n, 2 * m) = fock_op(n, m) * qubit_op;
        }
    }
    return out;
}

Ket basis_ket(const HilbertConfig& cfg, Level s, int n)
{
    if (n < 0 || n > cfg.n_max()) {
        throw std::out_of_range("basis_ket: Fock index " + std::to_string(n) + " outside truncation");
    }
    Ket psi = Ket::Zero(cfg.dim());
    psi(cfg.index(s, n)) = 1.0;
    return psi;
}

double hermiticity_error(const ComplexMatrix& m)
{
    const double norm = m.norm();
    if (norm == 0.0) {
        return 0.0;
    }
    return (m - m.adjoint()).norm() / norm;
}

double min_eigenvalue(const ComplexMatrix& hermitian)
{
    const ComplexMatrix h = 0.5 * (hermitian + hermitian.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double spectral_radius(const ComplexMatrix& hermitian)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

DensityMatrix DensityMatrix::validated(ComplexMatrix m, const StateTolerances& tol)
{
    if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() < 6) {
        throw std::invalid_argument("DensityMatrix: matrix must be square with joint-space dimension");
    }
    const double herm = hermiticity_error(m);
    if (herm > tol.hermiticity) {
        throw std::invalid_argument("DensityMatrix: not Hermitian (relative error " + std::to_string(herm) + ")");
    }
    const double tr_err = std::abs(m.trace() - Complex(1.0, 0.0));
    if (tr_err > tol.trace) {
        throw std::invalid_argument("DensityMatrix: trace differs from 1 by " + std::to_string(tr_err));
    }
    const double lmin = min_eigenvalue(m);
    if (lmin < tol.positivity) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(lmin));
    }
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const Ket& psi)
{
    const double norm = psi.norm();
    if (norm == 0.0) {
        throw std::invalid_argument("DensityMatrix::pure: zero vector");
    }
    const Ket unit = psi / norm;
    return validated(unit * unit.adjoint());
}

DensityMatrix DensityMatrix::basis_state(const HilbertConfig& cfg, Level s, int n)
{
    return pure(basis_ket(cfg, s, n));
}

double ground_population(const ComplexMatrix& rho)
{
    double pg = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); i += 2) {
        pg += rho(i, i).real();
    }
    return pg;
}

double top_levels_population(const ComplexMatrix& rho)
{
    const Eigen::Index d = rho.rows();
    double p = 0.0;
    for (Eigen::Index i = d - 4; i < d; ++i) {
        p += rho(i, i).real();
    }
    return p;
}

} // namespace iontrap
