// trajectories.hpp: Monte Carlo over single noise realizations
//
// Intensity noise follows the Ito stochastic Liouville equation
//
//   d rho = -i[G, rho] dt - i sqrt(Gamma) [G, rho] dW - (Gamma/2) [G, [G, rho]] dt
//
// and phase noise is sampled directly as a Wiener path of the laser phase
// entering the sideband Hamiltonian. Ensemble means converge to the master
// equations in evolution.hpp.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iontrap/evolution.hpp"
#include "iontrap/operators.hpp"
#include "iontrap/sideband.hpp"

namespace iontrap {

enum class IntensityScheme {
    // Exact solution of the Ito equation on each step:
    // rho -> U rho U^+, U = exp(-i G dA), dA = dt + sqrt(Gamma) dW.
    ExactUnitary,
    // Euler-Maruyama: rho + d rho with the three Ito terms, then Hermitized.
    EulerMaruyama,
};

struct TrajectoryConfig {
    double dt = 0.01;  // requested step; rounded down to divide the grid spacing
    int n_traj = 1000;
    std::uint64_t seed = 1;
    IntensityScheme scheme = IntensityScheme::ExactUnitary;
    int workers = 1;   // 0 = hardware concurrency; results do not depend on it
    double positivity_tolerance = -1e-6;
    double truncation_warning = 1e-8;
};

struct EnsembleResult {
    PopulationTrace trace; // mean P_g with std_error = sample std / sqrt(n_traj)
    int n_traj = 0;
    double dt = 0.0;
    long long n_steps = 0;
    double truncation_population = 0.0;
    double max_trace_drift = 0.0;
    double max_hermiticity_drift = 0.0;
    double min_eigenvalue = 0.0;
    std::vector<std::string> warnings;
};

// The three Ito terms; their trace vanishes identically.
ComplexMatrix ito_increment(const ComplexMatrix& rho, const ComplexMatrix& g, double gamma, double dt, double dw);

DensityMatrix step_ito_intensity(const DensityMatrix& rho, const Generator& g, double gamma, double dt, double dw);

// Trajectory i draws its Wiener increments from NormalStream(seed, i), so
// results are bit-identical for any worker count.
EnsembleResult run_ensemble_intensity(const DensityMatrix& rho0, const Generator& g, double gamma,
                                      const TrajectoryConfig& cfg, const TimeGrid& grid);

// Phase phi(t) = sqrt(2 lambda) W(t), frozen over each step, so the ensemble
// mean obeys the phase master equation with dephasing coefficient lambda.
EnsembleResult run_ensemble_phase(const DensityMatrix& rho0, Sideband kind, const ModelParams& params,
                                  double lambda, const TrajectoryConfig& cfg, const TimeGrid& grid);

// Phase-path diffusion constant used by run_ensemble_phase.
inline double phase_diffusion(double lambda) { return 2.0 * lambda; }

struct PulseAreaStats {
    double mean = 0.0;
    double variance = 0.0;          // unbiased sample variance of A(T)
    double expected_mean = 0.0;     // omega0 T
    double expected_variance = 0.0; // omega0^2 Gamma T
    double fractional_error = 0.0;  // sqrt(Gamma / T)
    double sample_fractional_error = 0.0;
    long long n_samples = 0;
};

// Samples A(T) = integral of Omega(t) dt with Omega dt = omega0 (dt + sqrt(Gamma) dW).
PulseAreaStats pulse_area_stats(double omega0, double gamma, double duration, long long n_samples,
                                std::uint64_t seed, int steps_per_path = 32);

} // namespace iontrap
