// evolution.hpp: noise-averaged density-matrix evolution
//
// Two master equations are supported, both with hbar = 1 and time in the
// units of the generator (scaled time tau = omega0 t when omega0 = 1):
//
//   intensity noise   d rho/dt = -i[G, rho] - (Gamma/2) [G, [G, rho]]
//   phase noise       d rho/dt = -i[G, rho] - lambda [P, [P, rho]],  P = sigma_+ sigma_-
//
// The phase-noise equation acts on the state in the frame co-rotating with
// the laser phase; populations are identical in both frames.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iontrap/operators.hpp"
#include "iontrap/sideband.hpp"

namespace iontrap {

struct IntensityNoise {
    double gamma = 0.0; // pulse-area diffusion strength, units of time
};

struct PhaseNoise {
    double lambda = 0.0; // dephasing rate, units of 1/time
};

// Uniform grid t0, t0 + h, ..., t1 with n_points samples.
class TimeGrid {
  public:
    TimeGrid(double t0, double t1, int n_points);

    double t0() const { return t0_; }
    double t1() const { return t1_; }
    int size() const { return n_points_; }
    double spacing() const { return (t1_ - t0_) / (n_points_ - 1); }
    double at(int k) const { return k == n_points_ - 1 ? t1_ : t0_ + k * spacing(); }
    std::vector<double> times() const;

  private:
    double t0_;
    double t1_;
    int n_points_;
};

struct PopulationTrace {
    TimeGrid grid;
    std::vector<double> pg;
    std::optional<std::vector<double>> std_error;
};

struct InvariantTolerances {
    double trace = 1e-9;
    double hermiticity = 1e-10;
    double positivity = -1e-8;
    double truncation_warning = 1e-8;
};

struct EvolveOptions {
    // Substep h satisfies h * rate_scale <= step_norm, where rate_scale is
    // ||G|| + Gamma ||G||^2 (intensity) or ||G|| + lambda (phase).
    double step_norm = 0.05;
    // Explicit substep; must satisfy h * rate_scale <= 0.1.
    std::optional<double> step;
    InvariantTolerances tol{};
    bool keep_states = true;
};

// Worst values observed over every grid point of one evolution.
struct InvariantSummary {
    double max_trace_error = 0.0;
    double max_hermiticity_error = 0.0; // before re-Hermitization, per substep
    double min_eigenvalue = 1.0;
    // |<G^k>(t) - <G^k>(0)| / max(|<G^k>(0)|, ||G||^k)
    double max_energy_drift = 0.0;
    double max_energy2_drift = 0.0;
    double max_truncation_population = 0.0;
    double step = 0.0;
    int substeps_per_interval = 0;
    std::vector<std::string> warnings;
};

struct Evolution {
    std::vector<DensityMatrix> states; // empty unless EvolveOptions::keep_states
    PopulationTrace trace;
    InvariantSummary summary;
};

// Fixed-step classical RK4 integration. After each substep the state is
// re-Hermitized; the trace is never renormalized, and a drift beyond
// tol.trace throws InvariantError.
Evolution evolve_master_intensity(const DensityMatrix& rho0, const Generator& g, IntensityNoise noise,
                                  const TimeGrid& grid, const EvolveOptions& opts = {});

Evolution evolve_master_phase(const DensityMatrix& rho0, const Generator& g, PhaseNoise noise,
                              const TimeGrid& grid, const EvolveOptions& opts = {});

// Closed-form solution of the intensity-noise master equation in the
// eigenbasis of G: the element between eigenvectors with energies e_i, e_j
// is multiplied by exp(-i t (e_i - e_j) - (Gamma t / 2)(e_i - e_j)^2).
class ExactPropagator {
  public:
    ExactPropagator(const Generator& g, IntensityNoise noise);

    DensityMatrix propagate(const DensityMatrix& rho0, double t) const;
    Evolution evolve(const DensityMatrix& rho0, const TimeGrid& grid, const InvariantTolerances& tol = {},
                     bool keep_states = true) const;

    const Eigen::VectorXd& energies() const { return energies_; }
    const ComplexMatrix& eigenvectors() const { return vectors_; }

    // Representation of rho in the eigenbasis of G.
    ComplexMatrix to_eigenbasis(const ComplexMatrix& rho) const { return vectors_.adjoint() * rho * vectors_; }

  private:
    ComplexMatrix generator_;
    double gamma_;
    Eigen::VectorXd energies_;
    ComplexMatrix vectors_;
};

DensityMatrix propagate_exact(const DensityMatrix& rho0, const Generator& g, IntensityNoise noise, double t);

// Re tr(rho op).
double expectation(const ComplexMatrix& rho, const ComplexMatrix& op);

} // namespace iontrap
