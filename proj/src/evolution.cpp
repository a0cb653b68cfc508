#include "iontrap/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "iontrap/errors.hpp"

namespace iontrap {

TimeGrid::TimeGrid(double t0, double t1, int n_points) : t0_(t0), t1_(t1), n_points_(n_points)
{
    if (!(t0 >= 0.0) || !(t1 > t0) || !std::isfinite(t1)) {
        throw ConfigError("TimeGrid: need 0 <= t0 < t1");
    }
    if (n_points < 2) {
        throw ConfigError("TimeGrid: need at least 2 points");
    }
}

std::vector<double> TimeGrid::times() const
{
    std::vector<double> out(n_points_);
    for (int k = 0; k < n_points_; ++k) {
        out[k] = at(k);
    }
    return out;
}

double expectation(const ComplexMatrix& rho, const ComplexMatrix& op)
{
    return (rho.cwiseProduct(op.transpose())).sum().real();
}

namespace {

using Rhs = std::function<ComplexMatrix(const ComplexMatrix&)>;

// Tracks the per-grid-point invariants shared by every evolution route.
class InvariantMonitor {
  public:
    InvariantMonitor(const ComplexMatrix& g, const ComplexMatrix& rho0, const InvariantTolerances& tol)
        : g_(g), g2_(g * g), tol_(tol)
    {
        const double norm = spectral_radius(g);
        m1_0_ = expectation(rho0, g_);
        m2_0_ = expectation(rho0, g2_);
        scale1_ = std::max({std::abs(m1_0_), norm, 1e-300});
        scale2_ = std::max({std::abs(m2_0_), norm * norm, 1e-300});
    }

    void check_trace(const ComplexMatrix& rho, double t)
    {
        const double err = std::abs(rho.trace() - Complex(1.0, 0.0));
        summary.max_trace_error = std::max(summary.max_trace_error, err);
        if (err > tol_.trace) {
            std::ostringstream os;
            os << "trace drift " << err << " exceeds " << tol_.trace << " at t = " << t << " (step "
               << summary.step << "); reduce the step size";
            throw InvariantError(os.str());
        }
    }

    void check_hermiticity(const ComplexMatrix& rho, double t)
    {
        const double herm = hermiticity_error(rho);
        summary.max_hermiticity_error = std::max(summary.max_hermiticity_error, herm);
        if (herm > tol_.hermiticity) {
            std::ostringstream os;
            os << "Hermiticity error " << herm << " exceeds " << tol_.hermiticity << " at t = " << t;
            throw InvariantError(os.str());
        }
    }

    void record_grid_point(const ComplexMatrix& rho, double t)
    {
        check_trace(rho, t);
        const double lmin = min_eigenvalue(rho);
        summary.min_eigenvalue = std::min(summary.min_eigenvalue, lmin);
        if (lmin < tol_.positivity) {
            std::ostringstream os;
            os << "negative eigenvalue " << lmin << " below " << tol_.positivity << " at t = " << t;
            throw InvariantError(os.str());
        }
        summary.max_energy_drift =
            std::max(summary.max_energy_drift, std::abs(expectation(rho, g_) - m1_0_) / scale1_);
        summary.max_energy2_drift =
            std::max(summary.max_energy2_drift, std::abs(expectation(rho, g2_) - m2_0_) / scale2_);
        summary.max_truncation_population =
            std::max(summary.max_truncation_population, top_levels_population(rho));
    }

    void finish()
    {
        if (summary.max_truncation_population > tol_.truncation_warning) {
            std::ostringstream os;
            os << "population in the top two Fock levels reached " << summary.max_truncation_population
               << "; increase n_max";
            summary.warnings.push_back(os.str());
        }
    }

    InvariantSummary summary;

  private:
    ComplexMatrix g_;
    ComplexMatrix g2_;
    InvariantTolerances tol_;
    double m1_0_ = 0.0;
    double m2_0_ = 0.0;
    double scale1_ = 1.0;
    double scale2_ = 1.0;
};

Evolution integrate_rk4(const DensityMatrix& rho0, const Generator& g, const Rhs& rhs, double rate_scale,
                        const TimeGrid& grid, const EvolveOptions& opts)
{
    if (rho0.dim() != g.matrix.rows()) {
        throw ConfigError("initial state and generator dimensions differ");
    }
    const double spacing = grid.spacing();
    double h_max = 0.0;
    if (opts.step) {
        if (!(*opts.step > 0.0) || *opts.step * rate_scale > 0.1) {
            std::ostringstream os;
            os << "step " << *opts.step << " violates step * rate_scale <= 0.1 (rate_scale " << rate_scale << ")";
            throw ConfigError(os.str());
        }
        h_max = std::min(*opts.step, spacing);
    } else {
        if (!(opts.step_norm > 0.0) || opts.step_norm > 0.1) {
            throw ConfigError("step_norm must lie in (0, 0.1]");
        }
        h_max = rate_scale > 0.0 ? std::min(opts.step_norm / rate_scale, spacing) : spacing;
    }
    const int substeps = std::max(1, static_cast<int>(std::ceil(spacing / h_max - 1e-9)));
    const double h = spacing / substeps;

    InvariantMonitor monitor(g.matrix, rho0.matrix(), opts.tol);
    monitor.summary.step = h;
    monitor.summary.substeps_per_interval = substeps;

    Evolution out{{}, PopulationTrace{grid, {}, std::nullopt}, {}};
    out.trace.pg.reserve(grid.size());
    if (opts.keep_states) {
        out.states.reserve(grid.size());
    }

    ComplexMatrix rho = rho0.matrix();
    auto emit = [&](double t) {
        monitor.record_grid_point(rho, t);
        out.trace.pg.push_back(ground_population(rho));
        if (opts.keep_states) {
            out.states.push_back(DensityMatrix::trusted(rho));
        }
    };
    emit(grid.t0());

    for (int k = 1; k < grid.size(); ++k) {
        const double t_start = grid.at(k - 1);
        for (int s = 0; s < substeps; ++s) {
            const ComplexMatrix k1 = rhs(rho);
            const ComplexMatrix k2 = rhs(rho + (0.5 * h) * k1);
            const ComplexMatrix k3 = rhs(rho + (0.5 * h) * k2);
            const ComplexMatrix k4 = rhs(rho + h * k3);
            rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const double t = t_start + (s + 1) * h;
            monitor.check_hermiticity(rho, t);
            rho = 0.5 * (rho + rho.adjoint()).eval();
            monitor.check_trace(rho, t);
        }
        emit(grid.at(k));
    }
    monitor.finish();
    out.summary = std::move(monitor.summary);
    return out;
}

} // namespace

Evolution evolve_master_intensity(const DensityMatrix& rho0, const Generator& g, IntensityNoise noise,
                                  const TimeGrid& grid, const EvolveOptions& opts)
{
    if (!(noise.gamma >= 0.0)) {
        throw ConfigError("intensity noise gamma must be >= 0");
    }
    const ComplexMatrix& gm = g.matrix;
    const double half_gamma = 0.5 * noise.gamma;
    const Complex minus_i(0.0, -1.0);
    Rhs rhs = [&gm, half_gamma, minus_i](const ComplexMatrix& rho) -> ComplexMatrix {
        const ComplexMatrix c = gm * rho - rho * gm;
        if (half_gamma == 0.0) {
            return minus_i * c;
        }
        const ComplexMatrix d = gm * c - c * gm;
        return minus_i * c - half_gamma * d;
    };
    const double norm = spectral_radius(gm);
    return integrate_rk4(rho0, g, rhs, norm + noise.gamma * norm * norm, grid, opts);
}

Evolution evolve_master_phase(const DensityMatrix& rho0, const Generator& g, PhaseNoise noise,
                              const TimeGrid& grid, const EvolveOptions& opts)
{
    if (!(noise.lambda >= 0.0)) {
        throw ConfigError("phase noise lambda must be >= 0");
    }
    // [P, [P, rho]]_ij = (p_i - p_j)^2 rho_ij with p = 1 on excited-state rows.
    const Eigen::Index d = g.matrix.rows();
    ComplexMatrix mask(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            mask(i, j) = (i % 2) != (j % 2) ? 1.0 : 0.0;
        }
    }
    const ComplexMatrix& gm = g.matrix;
    const double lambda = noise.lambda;
    const Complex minus_i(0.0, -1.0);
    Rhs rhs = [&gm, &mask, lambda, minus_i](const ComplexMatrix& rho) -> ComplexMatrix {
        ComplexMatrix out = minus_i * (gm * rho - rho * gm);
        if (lambda != 0.0) {
            out -= lambda * rho.cwiseProduct(mask);
        }
        return out;
    };
    return integrate_rk4(rho0, g, rhs, spectral_radius(gm) + lambda, grid, opts);
}

ExactPropagator::ExactPropagator(const Generator& g, IntensityNoise noise)
    : generator_(g.matrix), gamma_(noise.gamma)
{
    if (!(noise.gamma >= 0.0)) {
        throw ConfigError("intensity noise gamma must be >= 0");
    }
    if (hermiticity_error(g.matrix) > 1e-12) {
        throw std::invalid_argument("ExactPropagator: generator is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g.matrix);
    if (es.info() != Eigen::Success) {
        throw InvariantError("ExactPropagator: eigendecomposition failed");
    }
    energies_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
}

DensityMatrix ExactPropagator::propagate(const DensityMatrix& rho0, double t) const
{
    if (!(t >= 0.0)) {
        throw ConfigError("propagate: t must be >= 0");
    }
    if (rho0.dim() != generator_.rows()) {
        throw ConfigError("initial state and generator dimensions differ");
    }
    if (t == 0.0) return rho0;
    ComplexMatrix r = to_eigenbasis(rho0.matrix());
    const Eigen::Index d = r.rows();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double gap = energies_(i) - energies_(j);
            r(i, j) *= std::exp(Complex(-0.5 * gamma_ * t * gap * gap, -t * gap));
        }
    }
    ComplexMatrix rho = vectors_ * r * vectors_.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix::trusted(std::move(rho));
}

Evolution ExactPropagator::evolve(const DensityMatrix& rho0, const TimeGrid& grid, const InvariantTolerances& tol,
                                  bool keep_states) const
{
    InvariantMonitor monitor(generator_, rho0.matrix(), tol);
    Evolution out{{}, PopulationTrace{grid, {}, std::nullopt}, {}};
    for (int k = 0; k < grid.size(); ++k) {
        const double t = grid.at(k);
        DensityMatrix rho = propagate(rho0, t - grid.t0());
        monitor.record_grid_point(rho.matrix(), t);
        monitor.check_hermiticity(rho.matrix(), t);
        out.trace.pg.push_back(ground_population(rho));
        if (keep_states) {
            out.states.push_back(std::move(rho));
        }
    }
    monitor.finish();
    out.summary = std::move(monitor.summary);
    return out;
}

DensityMatrix propagate_exact(const DensityMatrix& rho0, const Generator& g, IntensityNoise noise, double t)
{
    return ExactPropagator(g, noise).propagate(rho0, t);
}

} // namespace iontrap
