// fitting.hpp: decay-rate extraction from population traces

#pragma once

#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "iontrap/evolution.hpp"

namespace iontrap {

// P_g(t) ≈ 1/2 [1 + A cos(omega t) e^{-gamma t}] + offset
struct DampedCosineFit {
    double gamma = 0.0;
    double omega = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double residual_rms = 0.0;
    double sigma_gamma = 0.0; // 1-sigma from the Gauss-Newton covariance
    double sigma_omega = 0.0;
    int iterations = 0;
    bool degenerate = false; // no oscillation in the trace; only offset is meaningful
};

struct FitOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-10;
    bool use_stderr_weights = false; // weights 1/stderr^2 when the trace carries errors
    double min_periods = 3.0;
};

// Levenberg-Marquardt from an automatic starting point: frequency from the
// dominant periodogram peak, decay from a log-envelope regression over the
// local extrema. Throws FitError on non-convergence or too few periods.
DampedCosineFit fit_damped_cosine(const PopulationTrace& trace, const FitOptions& opts = {});

enum class RateNormalization {
    Raw,          // gamma_n against (n + shift)
    PerRabiCycle, // gamma_n / omega_n against (n + shift)
};

std::string_view to_string(RateNormalization n);

struct LevelRate {
    int n = 0;
    double gamma = 0.0;
    double omega = 0.0;
};

// gamma_n = gamma0 (n + level_shift)^p
struct PowerLawFit {
    double gamma0 = 0.0;
    double p = 0.0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero(); // of (gamma0, p)
    std::optional<RateNormalization> normalization;
    double level_shift = 1.0;
    int n_levels = 0;
    double residual_rms = 0.0; // in log space
};

// Ordinary least squares on the logs. Throws FitError for fewer than three
// levels or a non-positive rate (or frequency, for PerRabiCycle).
PowerLawFit fit_power_law(std::span<const LevelRate> levels, RateNormalization normalization,
                          double level_shift = 1.0);

inline constexpr double kDerivedExponent = 0.5;
inline constexpr double kExperimentalExponent = 0.7;

struct ExponentComparison {
    bool refused = false;
    std::string reason;
    double p = 0.0;
    double sigma = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    bool consistent_with_derived = false;      // 0.5
    bool consistent_with_experimental = false; // 0.7
    std::string verdict;
};

// A reference is consistent when |p - ref| <= max(z * sigma_p, resolution).
// The resolution floor stands in for discretisation error, which the
// regression covariance does not see on noiseless sweeps.
ExponentComparison exponent_comparison(const PowerLawFit& fit, double z = 1.959963984540054,
                                       double resolution = 0.02);

} // namespace iontrap
