#include <doctest.h>

#include <random>

#include "iontrap/errors.hpp"
#include "iontrap/evolution.hpp"
#include "oracles.hpp"

using namespace iontrap;

namespace {

ModelParams params(int n_max = 6) { return ModelParams{1.0, 0.2, HilbertConfig(n_max)}; }

} // namespace

TEST_CASE("time grid")
{
    const TimeGrid g(0.0, 1.0, 11);
    CHECK(g.spacing() == doctest::Approx(0.1));
    CHECK(g.at(10) == 1.0);
    CHECK(g.times().size() == 11);
    CHECK_THROWS_AS(TimeGrid(1.0, 1.0, 5), ConfigError);
    CHECK_THROWS_AS(TimeGrid(-1.0, 1.0, 5), ConfigError);
    CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 1), ConfigError);
}

TEST_CASE("noiseless red sideband oscillates undamped")
{
    const ModelParams p = params();
    const Generator g = build_generator(Sideband::Red, p);
    const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 1);
    const TimeGrid grid(0.0, 30.0, 301);
    EvolveOptions opts;
    opts.step_norm = 0.01;
    const Evolution ev = evolve_master_intensity(rho0, g, {0.0}, grid, opts);
    CHECK(ev.states.front().matrix() == rho0.matrix());
    for (int k = 0; k < grid.size(); ++k) {
        CHECK(std::abs(ev.trace.pg[k] - 0.5 * (1.0 + std::cos(0.4 * grid.at(k)))) < 1e-9);
    }
}

TEST_CASE("blue sideband population against the Liouvillian oracle")
{
    const ModelParams p = params(4);
    const Generator g = build_generator(Sideband::Blue, p);
    const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 0);
    const double t = 3.14159265358979323846 / 0.4;
    constexpr double frozen = 0.012716037357375698;

    const oracle::Mat liou = oracle::liouvillian(g.matrix, {{0.5 * 0.041, g.matrix}});
    CHECK(std::abs(oracle::ground_population(oracle::evolve(liou, rho0.matrix(), t)) - frozen) < 1e-12);

    CHECK(std::abs(ground_population(propagate_exact(rho0, g, {0.041}, t)) - frozen) < 1e-12);
    const Evolution ev = evolve_master_intensity(rho0, g, {0.041}, TimeGrid(0.0, t, 11));
    CHECK(std::abs(ev.trace.pg.back() - frozen) < 1e-8);
}

TEST_CASE("exact propagation: eigenbasis decay law")
{
    const ModelParams p = params();
    const Generator g = build_generator(Sideband::Red, p);
    const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 1);
    const DensityMatrix rho = propagate_exact(rho0, g, {0.5}, 1.0);
    const auto [plus, minus] = analytic_eigenpairs(Sideband::Red, p, 0);
    const Complex elem = plus.state.dot(rho.matrix() * minus.state);
    CHECK(std::abs(elem) == doctest::Approx(0.4803947195761616).epsilon(1e-12));

    // Eigenprojectors are stationary.
    const DensityMatrix proj = DensityMatrix::pure(plus.state);
    CHECK((propagate_exact(proj, g, {0.7}, 13.0).matrix() - proj.matrix()).norm() < 1e-12);
}

TEST_CASE("exact propagation: semigroup and oracle agreement on random states")
{
    std::mt19937_64 rng(11);
    const ModelParams p = params(3);
    for (Sideband s : kAllSidebands) {
        const Generator g = build_generator(s, p);
        const ExactPropagator prop(g, {0.3});
        const oracle::Mat liou = oracle::liouvillian(g.matrix, {{0.15, g.matrix}});
        for (int trial = 0; trial < 3; ++trial) {
            const DensityMatrix rho0 = DensityMatrix::validated(oracle::random_density(rng, p.hilbert.dim()));
            const double ta = 0.3 + trial;
            const double tb = 1.7;
            const ComplexMatrix two = prop.propagate(prop.propagate(rho0, ta), tb).matrix();
            const ComplexMatrix one = prop.propagate(rho0, ta + tb).matrix();
            CHECK((two - one).norm() < 1e-10);
            CHECK((one - oracle::evolve(liou, rho0.matrix(), ta + tb)).norm() < 1e-10);
        }
    }
}

TEST_CASE("ODE and exact propagation agree with moments conserved")
{
    const ModelParams p = params(5);
    for (Sideband s : kAllSidebands) {
        const Generator g = build_generator(s, p);
        const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 2);
        const TimeGrid grid(0.0, 20.0, 201);
        EvolveOptions opts;
        opts.step_norm = 0.01;
        const Evolution ode = evolve_master_intensity(rho0, g, {0.041}, grid, opts);
        const Evolution ex = ExactPropagator(g, {0.041}).evolve(rho0, grid);
        for (int k = 0; k < grid.size(); ++k) CHECK(std::abs(ode.trace.pg[k] - ex.trace.pg[k]) < 1e-6);
        CHECK(ode.summary.max_energy_drift < 1e-8);
        CHECK(ode.summary.max_energy2_drift < 1e-8);
        CHECK(ode.summary.max_trace_error < 1e-9);
        CHECK(ode.summary.min_eigenvalue > -1e-8);
    }
}

TEST_CASE("step size bound")
{
    const ModelParams p = params(3);
    const Generator g = build_generator(Sideband::Carrier, p);
    const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 0);
    EvolveOptions opts;
    opts.step = 1.0;
    CHECK_THROWS_AS(evolve_master_intensity(rho0, g, {0.0}, TimeGrid(0.0, 2.0, 3), opts), ConfigError);
}

TEST_CASE("phase master equation")
{
    const ModelParams p = params(5);
    const Generator g = build_generator(Sideband::Red, p);
    const TimeGrid grid(0.0, 40.0, 81);

    SUBCASE("vacuum is dark")
    {
        const Evolution ev =
            evolve_master_phase(DensityMatrix::basis_state(p.hilbert, Level::Ground, 0), g, {0.1}, grid);
        for (double v : ev.trace.pg) CHECK(std::abs(v - 1.0) < 1e-12);
    }
    SUBCASE("lambda = 0 is unitary")
    {
        const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 2);
        const Evolution a = evolve_master_phase(rho0, g, {0.0}, grid);
        const Evolution b = evolve_master_intensity(rho0, g, {0.0}, grid);
        for (int k = 0; k < grid.size(); ++k) CHECK(std::abs(a.trace.pg[k] - b.trace.pg[k]) < 1e-9);
    }
    SUBCASE("matches the Liouvillian oracle")
    {
        const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 1);
        const Evolution ev = evolve_master_phase(rho0, g, {0.1}, grid);
        const QubitOperators q = qubit_operators();
        const ComplexMatrix proj =
            tensor(q.excited_projector, ComplexMatrix::Identity(p.hilbert.fock_dim(), p.hilbert.fock_dim()));
        const oracle::Mat liou = oracle::liouvillian(g.matrix, {{0.1, proj}});
        for (int k : {10, 40, 80}) {
            const double ref = oracle::ground_population(oracle::evolve(liou, rho0.matrix(), grid.at(k)));
            CHECK(std::abs(ev.trace.pg[k] - ref) < 1e-7);
        }
    }
}

TEST_CASE("invariant monitor rejects a blown-up integration")
{
    const ModelParams p = params(3);
    const Generator g = build_generator(Sideband::Carrier, p);
    const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 0);
    EvolveOptions opts;
    opts.step_norm = 0.1;
    opts.tol.trace = 1e-30;
    CHECK_THROWS_AS(evolve_master_intensity(rho0, g, {2.0}, TimeGrid(0.0, 50.0, 3), opts), InvariantError);
}
