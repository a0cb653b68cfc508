// Test-only reference routes, independent of the library's evolution code.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = Eigen::MatrixXcd;

// Column-stacking vec: vec(A X B) = (B^T ⊗ A) vec(X).
inline Mat kron(const Mat& a, const Mat& b)
{
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Superoperator of d rho/dt = -i[H, rho] - sum_k c_k [A_k, [A_k, rho]].
inline Mat liouvillian(const Mat& h, const std::vector<std::pair<double, Mat>>& double_commutators)
{
    const Eigen::Index d = h.rows();
    const Mat id = Mat::Identity(d, d);
    const std::complex<double> i1(0.0, 1.0);
    Mat l = -i1 * (kron(id, h) - kron(h.transpose(), id));
    for (const auto& [c, a] : double_commutators) {
        const Mat a2 = a * a;
        l -= c * (kron(id, a2) + kron(a2.transpose(), id) - 2.0 * kron(a.transpose(), a));
    }
    return l;
}

// Scaling and squaring with a truncated Taylor series.
inline Mat expm(const Mat& m)
{
    const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    const Mat a = m / std::pow(2.0, squarings);
    Mat term = Mat::Identity(m.rows(), m.cols());
    Mat sum = term;
    for (int k = 1; k <= 30; ++k) {
        term = (term * a) / static_cast<double>(k);
        sum += term;
    }
    for (int s = 0; s < squarings; ++s) sum = sum * sum;
    return sum;
}

inline Mat evolve(const Mat& liou, const Mat& rho0, double t)
{
    const Eigen::Index d = rho0.rows();
    const Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(rho0.data(), d * d);
    const Eigen::VectorXcd out = expm(liou * t) * v;
    return Eigen::Map<const Mat>(out.data(), d, d);
}

inline double ground_population(const Mat& rho)
{
    double p = 0.0;
    for (Eigen::Index i = 0; i < rho.rows(); i += 2) p += rho(i, i).real();
    return p;
}

inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols)
{
    std::normal_distribution<double> nd;
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = {nd(rng), nd(rng)};
    return m;
}

// Random full-rank density matrix.
inline Mat random_density(std::mt19937_64& rng, Eigen::Index d)
{
    const Mat x = random_matrix(rng, d, d);
    Mat rho = x * x.adjoint();
    return rho / rho.trace();
}

} // namespace oracle
