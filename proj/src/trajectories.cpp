#include "iontrap/trajectories.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "iontrap/errors.hpp"
#include "iontrap/rng.hpp"

namespace iontrap {

ComplexMatrix ito_increment(const ComplexMatrix& rho, const ComplexMatrix& g, double gamma, double dt, double dw)
{
    const ComplexMatrix c = g * rho - rho * g;
    const ComplexMatrix d = g * c - c * g;
    const Complex minus_i(0.0, -1.0);
    return minus_i * (dt + std::sqrt(gamma) * dw) * c - (0.5 * gamma * dt) * d;
}

DensityMatrix step_ito_intensity(const DensityMatrix& rho, const Generator& g, double gamma, double dt, double dw)
{
    ComplexMatrix next = rho.matrix() + ito_increment(rho.matrix(), g.matrix, gamma, dt, dw);
    next = 0.5 * (next + next.adjoint()).eval();
    return DensityMatrix::trusted(std::move(next));
}

namespace {

constexpr int kBlockSize = 32;

// Per-grid-point running statistics, merged in a fixed order.
struct Moments {
    long long count = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    explicit Moments(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0) {}

    void add(const std::vector<double>& x)
    {
        ++count;
        for (std::size_t k = 0; k < x.size(); ++k) {
            const double delta = x[k] - mean[k];
            mean[k] += delta / static_cast<double>(count);
            m2[k] += delta * (x[k] - mean[k]);
        }
    }

    void merge(const Moments& o)
    {
        if (o.count == 0) return;
        if (count == 0) {
            *this = o;
            return;
        }
        const double na = static_cast<double>(count);
        const double nb = static_cast<double>(o.count);
        const double n = na + nb;
        for (std::size_t k = 0; k < mean.size(); ++k) {
            const double delta = o.mean[k] - mean[k];
            mean[k] += delta * nb / n;
            m2[k] += o.m2[k] + delta * delta * na * nb / n;
        }
        count += o.count;
    }
};

struct Diagnostics {
    double truncation = 0.0;
    double trace_drift = 0.0;
    double hermiticity = 0.0;
    double min_eigenvalue = 1.0;

    void merge(const Diagnostics& o)
    {
        truncation = std::max(truncation, o.truncation);
        trace_drift = std::max(trace_drift, o.trace_drift);
        hermiticity = std::max(hermiticity, o.hermiticity);
        min_eigenvalue = std::min(min_eigenvalue, o.min_eigenvalue);
    }
};

using TrajectoryFn = std::function<std::vector<double>(long long index, Diagnostics& diag)>;

struct StepPlan {
    int steps_per_interval;
    double dt;
};

StepPlan plan_steps(const TrajectoryConfig& cfg, const TimeGrid& grid)
{
    if (!(cfg.dt > 0.0)) {
        throw ConfigError("trajectory dt must be > 0");
    }
    if (cfg.n_traj < 1) {
        throw ConfigError("n_traj must be >= 1");
    }
    const int steps = std::max(1, static_cast<int>(std::ceil(grid.spacing() / cfg.dt - 1e-9)));
    return {steps, grid.spacing() / steps};
}

// Spectral decomposition rho0 = sum_i |v_i><v_i| with sqrt-weighted kets.
std::vector<Ket> weighted_components(const DensityMatrix& rho0)
{
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho0.matrix());
    std::vector<Ket> kets;
    for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i) {
        const double p = es.eigenvalues()(i);
        if (p > 1e-15) {
            kets.emplace_back(std::sqrt(p) * es.eigenvectors().col(i));
        }
    }
    return kets;
}

double ket_ground_population(const Ket& psi)
{
    double pg = 0.0;
    for (Eigen::Index i = 0; i < psi.size(); i += 2) {
        pg += std::norm(psi(i));
    }
    return pg;
}

double ket_top_population(const Ket& psi)
{
    double p = 0.0;
    for (Eigen::Index i = psi.size() - 4; i < psi.size(); ++i) {
        p += std::norm(psi(i));
    }
    return p;
}

EnsembleResult run_ensemble(const TrajectoryFn& trajectory, const TrajectoryConfig& cfg, const TimeGrid& grid,
                            const StepPlan& plan)
{
    const long long n_blocks = (cfg.n_traj + kBlockSize - 1) / kBlockSize;
    std::vector<Moments> blocks(n_blocks, Moments(grid.size()));
    std::vector<Diagnostics> diags(n_blocks);

    std::atomic<long long> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (long long b = next++; b < n_blocks && !failed; b = next++) {
            try {
                const long long first = b * kBlockSize;
                const long long last = std::min<long long>(first + kBlockSize, cfg.n_traj);
                for (long long i = first; i < last; ++i) {
                    blocks[b].add(trajectory(i, diags[b]));
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };

    int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp<int>(workers, 1, static_cast<int>(std::max<long long>(1, n_blocks)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    Moments total(grid.size());
    Diagnostics diag;
    for (long long b = 0; b < n_blocks; ++b) {
        total.merge(blocks[b]);
        diag.merge(diags[b]);
    }

    EnsembleResult out{PopulationTrace{grid, total.mean, std::vector<double>(grid.size(), 0.0)}, 0, 0.0, 0, 0.0, 0.0, 0.0, 0.0, {}};
    out.n_traj = cfg.n_traj;
    out.dt = plan.dt;
    out.n_steps = static_cast<long long>(plan.steps_per_interval) * (grid.size() - 1);
    if (total.count > 1) {
        const double n = static_cast<double>(total.count);
        for (int k = 0; k < grid.size(); ++k) {
            (*out.trace.std_error)[k] = std::sqrt(std::max(0.0, total.m2[k] / (n - 1.0)) / n);
        }
    }
    out.truncation_population = diag.truncation;
    out.max_trace_drift = diag.trace_drift;
    out.max_hermiticity_drift = diag.hermiticity;
    out.min_eigenvalue = diag.min_eigenvalue;
    if (diag.truncation > cfg.truncation_warning) {
        std::ostringstream os;
        os << "population in the top two Fock levels reached " << diag.truncation << "; increase n_max";
        out.warnings.push_back(os.str());
    }
    return out;
}

void check_step_bounds(double dt, double norm, double gamma)
{
    if (dt * norm > 0.05 + 1e-12) {
        std::ostringstream os;
        os << "trajectory step violates dt * ||G|| <= 0.05 (dt = " << dt << ", ||G|| = " << norm << ")";
        throw ConfigError(os.str());
    }
    if (gamma * norm * norm * dt > 0.05 + 1e-12) {
        std::ostringstream os;
        os << "trajectory step violates Gamma ||G||^2 dt <= 0.05 (dt = " << dt << ")";
        throw ConfigError(os.str());
    }
}

} // namespace

EnsembleResult run_ensemble_intensity(const DensityMatrix& rho0, const Generator& g, double gamma,
                                      const TrajectoryConfig& cfg, const TimeGrid& grid)
{
    if (!(gamma >= 0.0)) {
        throw ConfigError("intensity noise gamma must be >= 0");
    }
    if (rho0.dim() != g.matrix.rows()) {
        throw ConfigError("initial state and generator dimensions differ");
    }
    const StepPlan plan = plan_steps(cfg, grid);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g.matrix);
    const Eigen::VectorXd energies = es.eigenvalues();
    const ComplexMatrix vectors = es.eigenvectors();
    check_step_bounds(plan.dt, energies.cwiseAbs().maxCoeff(), gamma);

    const double sqrt_dt = std::sqrt(plan.dt);
    const double sqrt_gamma = std::sqrt(gamma);
    const int steps = plan.steps_per_interval;

    TrajectoryFn trajectory;
    if (cfg.scheme == IntensityScheme::ExactUnitary) {
        // Work in the eigenbasis of G, where U(dA) is a diagonal phase.
        std::vector<Ket> coeffs;
        for (const Ket& v : weighted_components(rho0)) coeffs.push_back(vectors.adjoint() * v);
        trajectory = [&, coeffs](long long index, Diagnostics& diag) {
            const NormalStream noise(cfg.seed, static_cast<std::uint64_t>(index));
            std::vector<double> pg(grid.size());
            std::uint64_t step = 0;
            double area = 0.0;
            for (int k = 0; k < grid.size(); ++k) {
                if (k > 0) {
                    for (int s = 0; s < steps; ++s, ++step) {
                        area += plan.dt + sqrt_gamma * sqrt_dt * noise.normal(step);
                    }
                }
                double p = 0.0;
                double top = 0.0;
                for (const Ket& c0 : coeffs) {
                    Ket c = c0;
                    for (Eigen::Index i = 0; i < c.size(); ++i) c(i) *= std::polar(1.0, -energies(i) * area);
                    const Ket psi = vectors * c;
                    p += ket_ground_population(psi);
                    top += ket_top_population(psi);
                }
                pg[k] = p;
                diag.truncation = std::max(diag.truncation, top);
            }
            return pg;
        };
    } else {
        trajectory = [&](long long index, Diagnostics& diag) {
            const NormalStream noise(cfg.seed, static_cast<std::uint64_t>(index));
            std::vector<double> pg(grid.size());
            ComplexMatrix rho = rho0.matrix();
            std::uint64_t step = 0;
            for (int k = 0; k < grid.size(); ++k) {
                if (k > 0) {
                    for (int s = 0; s < steps; ++s, ++step) {
                        ComplexMatrix next =
                            rho + ito_increment(rho, g.matrix, gamma, plan.dt, sqrt_dt * noise.normal(step));
                        diag.hermiticity = std::max(diag.hermiticity, hermiticity_error(next));
                        rho = 0.5 * (next + next.adjoint());
                    }
                }
                diag.trace_drift = std::max(diag.trace_drift, std::abs(rho.trace() - Complex(1.0, 0.0)));
                const double lmin = min_eigenvalue(rho);
                diag.min_eigenvalue = std::min(diag.min_eigenvalue, lmin);
                if (lmin < cfg.positivity_tolerance) {
                    std::ostringstream os;
                    os << "trajectory " << index << " lost positivity (eigenvalue " << lmin << " at t = "
                       << grid.at(k) << "); reduce dt";
                    throw InvariantError(os.str());
                }
                pg[k] = ground_population(rho);
                diag.truncation = std::max(diag.truncation, top_levels_population(rho));
            }
            return pg;
        };
    }
    return run_ensemble(trajectory, cfg, grid, plan);
}

EnsembleResult run_ensemble_phase(const DensityMatrix& rho0, Sideband kind, const ModelParams& params, double lambda,
                                  const TrajectoryConfig& cfg, const TimeGrid& grid)
{
    if (!(lambda >= 0.0)) {
        throw ConfigError("phase noise lambda must be >= 0");
    }
    const Generator g = build_generator(kind, params);
    if (rho0.dim() != g.matrix.rows()) {
        throw ConfigError("initial state and generator dimensions differ");
    }
    const StepPlan plan = plan_steps(cfg, grid);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g.matrix);
    check_step_bounds(plan.dt, es.eigenvalues().cwiseAbs().maxCoeff(), 0.0);

    // H(phi) = D(phi) G D(phi)^+ with D(phi) = exp(i phi sigma_+ sigma_-), hence
    // exp(-i H(phi) dt) = D U D^+ with U = exp(-i G dt) computed once.
    Ket phases(es.eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::polar(1.0, -es.eigenvalues()(i) * plan.dt);
    const ComplexMatrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();

    const std::vector<Ket> kets = weighted_components(rho0);
    const double kick = std::sqrt(phase_diffusion(lambda) * plan.dt);
    const int steps = plan.steps_per_interval;

    TrajectoryFn trajectory = [&](long long index, Diagnostics& diag) {
        const NormalStream noise(cfg.seed, static_cast<std::uint64_t>(index));
        std::vector<double> pg(grid.size());
        std::vector<Ket> psi = kets;
        Ket tmp(u.rows());
        double phi = 0.0;
        std::uint64_t step = 0;
        for (int k = 0; k < grid.size(); ++k) {
            if (k > 0) {
                for (int s = 0; s < steps; ++s, ++step) {
                    const Complex d = std::polar(1.0, phi);
                    for (Ket& v : psi) {
                        for (Eigen::Index i = 1; i < v.size(); i += 2) v(i) *= std::conj(d);
                        tmp.noalias() = u * v;
                        for (Eigen::Index i = 1; i < tmp.size(); i += 2) tmp(i) *= d;
                        v.swap(tmp);
                    }
                    phi += kick * noise.normal(step);
                }
            }
            double p = 0.0;
            double top = 0.0;
            for (const Ket& v : psi) {
                p += ket_ground_population(v);
                top += ket_top_population(v);
            }
            pg[k] = p;
            diag.truncation = std::max(diag.truncation, top);
        }
        return pg;
    };
    return run_ensemble(trajectory, cfg, grid, plan);
}

PulseAreaStats pulse_area_stats(double omega0, double gamma, double duration, long long n_samples,
                                std::uint64_t seed, int steps_per_path)
{
    if (!(duration > 0.0)) throw ConfigError("pulse duration must be > 0");
    if (!(gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
    if (n_samples < 2) throw ConfigError("need at least 2 samples");
    if (steps_per_path < 1) throw ConfigError("steps_per_path must be >= 1");

    const double h = duration / steps_per_path;
    const double noise_scale = std::sqrt(gamma * h);
    double mean = 0.0;
    double m2 = 0.0;
    for (long long i = 0; i < n_samples; ++i) {
        const NormalStream noise(seed, static_cast<std::uint64_t>(i));
        double area = 0.0;
        for (int s = 0; s < steps_per_path; ++s) {
            area += omega0 * (h + noise_scale * noise.normal(static_cast<std::uint64_t>(s)));
        }
        const double delta = area - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (area - mean);
    }
    PulseAreaStats out;
    out.mean = mean;
    out.variance = m2 / static_cast<double>(n_samples - 1);
    out.expected_mean = omega0 * duration;
    out.expected_variance = omega0 * omega0 * gamma * duration;
    out.fractional_error = std::sqrt(gamma / duration);
    out.sample_fractional_error = std::sqrt(out.variance) / mean;
    out.n_samples = n_samples;
    return out;
}

} // namespace iontrap
