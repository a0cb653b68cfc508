// sideband.hpp: Lamb-Dicke sideband interaction generators and their dressed states

#pragma once

#include <optional>
#include <string_view>
#include <utility>

#include "iontrap/operators.hpp"

namespace iontrap {

enum class Sideband { Carrier, Red, Blue, SecondRed };

inline constexpr Sideband kAllSidebands[] = {Sideband::Carrier, Sideband::Red, Sideband::Blue,
                                             Sideband::SecondRed};

std::string_view to_string(Sideband kind);
// Accepts "carrier", "red", "blue", "second-red" (also "second_red", "red2").
std::optional<Sideband> parse_sideband(std::string_view name);

struct ModelParams {
    double omega0 = 1.0; // Rabi frequency; 1 in scaled time tau = omega0 * t
    double eta = 0.2;    // Lamb-Dicke parameter
    HilbertConfig hilbert{};

    // Throws ConfigError unless omega0 > 0 and 0 <= eta < 1. eta = 0 is the
    // decoupled limit (sideband generators vanish).
    void validate() const;
};

struct Generator {
    Sideband kind;
    ModelParams params;
    ComplexMatrix matrix; // Hermitian, hbar = 1
};

//   Carrier    omega0 * sigma_x ⊗ (1 + eta^2 a^+ a)
//   Red        eta omega0 (sigma_+ ⊗ a + sigma_- ⊗ a^+)
//   Blue       eta omega0 (sigma_+ ⊗ a^+ + sigma_- ⊗ a)
//   SecondRed  eta omega0 (sigma_+ ⊗ a^2 + sigma_- ⊗ a^+2)
Generator build_generator(Sideband kind, const ModelParams& params);

// Instantaneous Hamiltonian with a fluctuating Rabi frequency and laser
// phase: omega0 -> omega_t and sigma_+ -> e^{i phi_t} sigma_+ (h.c. for sigma_-).
ComplexMatrix noisy_hamiltonian(Sideband kind, const ModelParams& params, double omega_t, double phi_t);

struct EigenPair {
    int n = 0;
    int sign = +1;
    double value = 0.0;
    Ket state;
};

// Dressed pair (|g,n'> ± |e,n>)/sqrt(2) of the generator, where n' is n, n+1,
// n-1 or n+2 for Carrier, Red, Blue and SecondRed. Values:
//   Carrier    ±omega0 (1 + n eta^2)
//   Red        ±eta omega0 sqrt(n+1)
//   Blue       ±eta omega0 sqrt(n)
//   SecondRed  ±eta omega0 sqrt((n+1)(n+2))
// Throws std::out_of_range when either bare state lies outside the truncation
// (or n < 1 for Blue, where |g,n-1> does not exist).
std::pair<EigenPair, EigenPair> analytic_eigenpairs(Sideband kind, const ModelParams& params, int n);

// Range of n for which analytic_eigenpairs is defined.
std::pair<int, int> eigenpair_index_range(Sideband kind, const HilbertConfig& cfg);

// Excitation number conserved by the generator: a^+a for the carrier,
// a^+a + sigma_+sigma_- (Red), a^+a - sigma_+sigma_- (Blue), a^+a + 2 sigma_+sigma_- (SecondRed).
ComplexMatrix conserved_excitation(Sideband kind, const HilbertConfig& cfg);

} // namespace iontrap
