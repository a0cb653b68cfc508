#include "iontrap/sideband.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "iontrap/errors.hpp"

namespace iontrap {

std::string_view to_string(Sideband kind)
{
    switch (kind) {
    case Sideband::Carrier: return "carrier";
    case Sideband::Red: return "red";
    case Sideband::Blue: return "blue";
    case Sideband::SecondRed: return "second-red";
    }
    return "unknown";
}

std::optional<Sideband> parse_sideband(std::string_view name)
{
    if (name == "carrier") return Sideband::Carrier;
    if (name == "red") return Sideband::Red;
    if (name == "blue") return Sideband::Blue;
    if (name == "second-red" || name == "second_red" || name == "red2") return Sideband::SecondRed;
    return std::nullopt;
}

void ModelParams::validate() const
{
    if (!(omega0 > 0.0) || !std::isfinite(omega0)) {
        throw ConfigError("omega0 must be positive and finite");
    }
    if (!(eta >= 0.0 && eta < 1.0)) {
        throw ConfigError("eta must lie in [0, 1) (Lamb-Dicke regime)");
    }
}

namespace {

// Fock-space factor multiplying sigma_+ (before the omega prefactor).
ComplexMatrix raising_partner(Sideband kind, const ModelParams& p)
{
    const HilbertConfig& cfg = p.hilbert;
    const ComplexMatrix a = annihilation(cfg);
    switch (kind) {
    case Sideband::Carrier: {
        const ComplexMatrix id = ComplexMatrix::Identity(cfg.fock_dim(), cfg.fock_dim());
        return id + p.eta * p.eta * number_operator(cfg);
    }
    case Sideband::Red: return p.eta * a;
    case Sideband::Blue: return p.eta * a.adjoint();
    case Sideband::SecondRed: return p.eta * (a * a);
    }
    throw std::logic_error("raising_partner: unknown sideband");
}

} // namespace

ComplexMatrix noisy_hamiltonian(Sideband kind, const ModelParams& params, double omega_t, double phi_t)
{
    const QubitOperators q = qubit_operators();
    const ComplexMatrix up = tensor(q.sigma_plus, raising_partner(kind, params));
    const Complex phase = std::polar(1.0, phi_t);
    ComplexMatrix h = omega_t * (phase * up + std::conj(phase) * up.adjoint());
    // Exactly Hermitian by construction; symmetrize away rounding in the sum.
    return 0.5 * (h + h.adjoint());
}

Generator build_generator(Sideband kind, const ModelParams& params)
{
    params.validate();
    return Generator{kind, params, noisy_hamiltonian(kind, params, params.omega0, 0.0)};
}

std::pair<int, int> eigenpair_index_range(Sideband kind, const HilbertConfig& cfg)
{
    const int top = cfg.n_max();
    switch (kind) {
    case Sideband::Carrier: return {0, top};
    case Sideband::Red: return {0, top - 1};
    case Sideband::Blue: return {1, top};
    case Sideband::SecondRed: return {0, top - 2};
    }
    throw std::logic_error("eigenpair_index_range: unknown sideband");
}

std::pair<EigenPair, EigenPair> analytic_eigenpairs(Sideband kind, const ModelParams& params, int n)
{
    const auto [lo, hi] = eigenpair_index_range(kind, params.hilbert);
    if (n < lo || n > hi) {
        throw std::out_of_range("analytic_eigenpairs: n = " + std::to_string(n) + " outside [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "] for " +
                                std::string(to_string(kind)));
    }
    const double w = params.omega0;
    const double eta = params.eta;
    const double dn = static_cast<double>(n);
    int ground_n = n;
    double value = 0.0;
    switch (kind) {
    case Sideband::Carrier:
        ground_n = n;
        value = w * (1.0 + dn * eta * eta);
        break;
    case Sideband::Red:
        ground_n = n + 1;
        value = eta * w * std::sqrt(dn + 1.0);
        break;
    case Sideband::Blue:
        ground_n = n - 1;
        value = eta * w * std::sqrt(dn);
        break;
    case Sideband::SecondRed:
        ground_n = n + 2;
        value = eta * w * std::sqrt((dn + 1.0) * (dn + 2.0));
        break;
    }
    const Ket g = basis_ket(params.hilbert, Level::Ground, ground_n);
    const Ket e = basis_ket(params.hilbert, Level::Excited, n);
    const double s = 1.0 / std::sqrt(2.0);
    EigenPair plus{n, +1, value, s * (g + e)};
    EigenPair minus{n, -1, -value, s * (g - e)};
    return {std::move(plus), std::move(minus)};
}

ComplexMatrix conserved_excitation(Sideband kind, const HilbertConfig& cfg)
{
    const QubitOperators q = qubit_operators();
    const ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
    const ComplexMatrix idf = ComplexMatrix::Identity(cfg.fock_dim(), cfg.fock_dim());
    const ComplexMatrix phonons = tensor(id2, number_operator(cfg));
    const ComplexMatrix excited = tensor(q.excited_projector, idf);
    switch (kind) {
    case Sideband::Carrier: return phonons;
    case Sideband::Red: return phonons + excited;
    case Sideband::Blue: return phonons - excited;
    case Sideband::SecondRed: return phonons + 2.0 * excited;
    }
    throw std::logic_error("conserved_excitation: unknown sideband");
}

} // namespace iontrap
