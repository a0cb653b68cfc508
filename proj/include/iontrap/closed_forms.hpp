// closed_forms.hpp: analytic ground-state populations for |g,n> initial states

#pragma once

#include <string>
#include <vector>

#include "iontrap/sideband.hpp"

namespace iontrap {

enum class FormulaVariant {
    PaperVerbatim,  // the published expressions, typeset as printed
    SelfConsistent, // two-level reduction of the implemented generators
};

std::string_view to_string(FormulaVariant v);

// Damped-cosine parameters P_g(t) = 1/2 [1 + exp(-rate t) cos(frequency t)].
struct DampedCosine {
    double frequency = 0.0;
    double rate = 0.0;
    bool coupled = true; // false when |g,n> is a dark state of the sideband
};

DampedCosine intensity_oscillation(Sideband kind, FormulaVariant variant, int n, double eta, double omega0,
                                   double gamma);

// Intensity-noise P_g(t). For Red, Blue and SecondRed both variants coincide;
// for the carrier SelfConsistent uses frequency 2 omega0 (1 + n eta^2) and
// rate 2 Gamma omega0^2 (1 + n eta^2)^2 while PaperVerbatim keeps the
// published omega0 (1 + n eta^2) and Gamma omega0^2 (1 + 2 n eta^2) / 2.
double pg_intensity(Sideband kind, FormulaVariant variant, int n, double eta, double omega0, double gamma, double t);

// Red-sideband phase-noise population
//   1/2 [1 + e^{-lambda t/2} (cos(w t) + lambda/(2w) sin(w t))],  w^2 = 4 eta^2 omega0^2 n - lambda^2/4,
// continued to cosh/sinh when w^2 < 0 and to (1 + lambda t / 2) at w = 0.
double pg_phase_red(int n, double eta, double omega0, double lambda, double t);

// Effective oscillation frequency w above; negative values encode the
// overdamped decay constant as -sqrt(-w^2).
double phase_red_frequency(int n, double eta, double omega0, double lambda);

struct Erratum {
    std::string id;
    std::string equation;    // which published relation
    std::string printed;     // form as typeset
    std::string alternative; // the competing reading
    std::string implemented; // what this library does
    std::string note;
};

struct DiscrepancyReport {
    std::vector<Erratum> entries;
    // max |P_g(PaperVerbatim) - P_g(SelfConsistent)| for the carrier, n = 0,
    // eta = 0.2, Gamma = 0.041 over tau in [0, 20].
    double carrier_variant_max_deviation = 0.0;
};

DiscrepancyReport discrepancy_report();

} // namespace iontrap
