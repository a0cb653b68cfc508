// Acceptance suite: prints one [PASS]/[FAIL] line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <json.hpp>

#include "iontrap/cli/commands.hpp"
#include "iontrap/closed_forms.hpp"
#include "iontrap/evolution.hpp"
#include "iontrap/fitting.hpp"
#include "iontrap/trajectories.hpp"

using namespace iontrap;

namespace {

constexpr double kEta = 0.2;
constexpr double kGamma = 0.041;

int failures = 0;

void report(int id, bool pass, const std::string& what, double seconds)
{
    std::printf("[%s] C%d %s (%.1fs)\n", pass ? "PASS" : "FAIL", id, what.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0, double d = 0.0)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

class Stopwatch {
  public:
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

  private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Worst invariant values over every deterministic run of C1-C5.
struct InvariantLedger {
    double trace = 0.0;
    double hermiticity = 0.0;
    double min_eig = 1.0;
    double moment = 0.0;
    int runs = 0;

    void add(const InvariantSummary& s, bool intensity)
    {
        trace = std::max(trace, s.max_trace_error);
        hermiticity = std::max(hermiticity, s.max_hermiticity_error);
        min_eig = std::min(min_eig, s.min_eigenvalue);
        if (intensity) moment = std::max({moment, s.max_energy_drift, s.max_energy2_drift});
        ++runs;
    }
};

InvariantLedger ledger;

double max_dev(const std::vector<double>& a, const std::vector<double>& b)
{
    double w = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) w = std::max(w, std::abs(a[k] - b[k]));
    return w;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

// Points with zero stderr (t = 0) must agree exactly.
int count_within(const PopulationTrace& ens, const std::vector<double>& ref, double k_sigma)
{
    int inside = 0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double s = (*ens.std_error)[i];
        const double d = std::abs(ens.pg[i] - ref[i]);
        inside += (s > 0.0 ? d <= k_sigma * s : d <= 1e-12) ? 1 : 0;
    }
    return inside;
}

void criterion1()
{
    Stopwatch sw;
    const ModelParams p{1.0, kEta, HilbertConfig(6)};
    const TimeGrid grid(0.0, 50.0, 501);
    EvolveOptions opts;
    opts.step_norm = 0.01;
    opts.keep_states = false;
    double worst = 0.0;
    for (Sideband s : kAllSidebands) {
        const Generator g = build_generator(s, p);
        const ExactPropagator prop(g, {kGamma});
        for (int n = 0; n <= 3; ++n) {
            const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, n);
            const Evolution ode = evolve_master_intensity(rho0, g, {kGamma}, grid, opts);
            const Evolution ex = prop.evolve(rho0, grid, {}, false);
            ledger.add(ode.summary, true);
            worst = std::max(worst, max_dev(ode.trace.pg, ex.trace.pg));
        }
    }
    report(1, worst <= 1e-6,
           fmt("exact vs RK4 master equation, 4 sidebands x n=0..3, tau in [0,50]: max |dPg| = %.3e (tol 1e-6)",
               worst),
           sw.seconds());
}

void criterion2()
{
    Stopwatch sw;
    const ModelParams p{1.0, kEta, HilbertConfig(6)};
    double worst_exact = 0.0;
    double worst_variant = 0.0;
    for (Sideband s : kAllSidebands) {
        const ExactPropagator prop(build_generator(s, p), {kGamma});
        for (int n = 0; n <= 3; ++n) {
            const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, n);
            for (int k = 0; k <= 500; ++k) {
                const double t = 0.1 * k;
                const double sc = pg_intensity(s, FormulaVariant::SelfConsistent, n, kEta, 1.0, kGamma, t);
                worst_exact = std::max(worst_exact, std::abs(sc - ground_population(prop.propagate(rho0, t))));
                if (s != Sideband::Carrier) {
                    const double pv = pg_intensity(s, FormulaVariant::PaperVerbatim, n, kEta, 1.0, kGamma, t);
                    worst_variant = std::max(worst_variant, std::abs(pv - sc));
                }
            }
        }
    }
    const double carrier = discrepancy_report().carrier_variant_max_deviation;
    const bool pass = worst_exact <= 1e-8 && worst_variant <= 1e-12 && carrier > 0.0;
    report(2, pass,
           fmt("self-consistent closed form vs exact: %.3e (tol 1e-8); verbatim vs self-consistent on red/blue/"
               "second-red: %.3e; carrier verbatim mismatch reported: %.4f (known erratum)",
               worst_exact, worst_variant, carrier),
           sw.seconds());
}

void criterion3()
{
    Stopwatch sw;
    const ModelParams p{1.0, kEta, HilbertConfig(8)};
    const Generator g = build_generator(Sideband::Blue, p);
    const Evolution ev = evolve_master_intensity(DensityMatrix::basis_state(p.hilbert, Level::Ground, 0), g,
                                                 {kGamma}, TimeGrid(0.0, 100.0, 1001));
    ledger.add(ev.summary, true);
    const DampedCosineFit f = fit_damped_cosine(ev.trace);
    const double expect_rate = 2.0 * kGamma * kEta * kEta;
    const double ew = std::abs(f.omega / 0.4 - 1.0);
    const double eg = std::abs(f.gamma / expect_rate - 1.0);
    report(3, ew <= 0.01 && eg <= 0.01,
           fmt("default profile fit: omega = %.6f (0.4, rel %.1e), gamma = %.6e (0.00328, rel %.1e), tol 1%%", f.omega,
               ew, f.gamma, eg),
           sw.seconds());
}

void criterion4()
{
    Stopwatch sw;
    const ModelParams p{1.0, kEta, HilbertConfig(8)};
    const Generator g = build_generator(Sideband::Blue, p);
    const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 0);
    const TimeGrid grid(0.0, 100.0, 1001);
    const Evolution me = evolve_master_intensity(rho0, g, {kGamma}, grid);
    ledger.add(me.summary, true);

    TrajectoryConfig cfg;
    cfg.dt = 0.01;
    cfg.n_traj = 10000;
    cfg.seed = 20240601;
    const EnsembleResult a = run_ensemble_intensity(rho0, g, kGamma, cfg, grid);
    cfg.n_traj = 20000;
    cfg.seed = 20240602;
    const EnsembleResult b = run_ensemble_intensity(rho0, g, kGamma, cfg, grid);

    const double frac = static_cast<double>(count_within(a.trace, me.trace.pg, 3.0)) / grid.size();
    // Skip t = 0, where the stderr vanishes identically.
    std::vector<double> sa(a.trace.std_error->begin() + 1, a.trace.std_error->end());
    std::vector<double> sb(b.trace.std_error->begin() + 1, b.trace.std_error->end());
    const double med = median(sa);
    const double ratio = median(sb) / med;
    const double target = 1.0 / std::sqrt(2.0);
    const bool pass = frac >= 0.99 && med <= 0.01 && std::abs(ratio / target - 1.0) <= 0.2;
    report(4, pass,
           fmt("ensemble n=1e4: %.2f%% of points within 3 stderr (>= 99%%), median stderr %.2e (<= 0.01), "
               "2x trajectories stderr ratio %.3f (0.707 +- 20%%)",
               100.0 * frac, med, ratio),
           sw.seconds());
}

void criterion5()
{
    Stopwatch sw;
    const ModelParams p{1.0, kEta, HilbertConfig(5)};
    const Generator g = build_generator(Sideband::Red, p);
    const TimeGrid fine(0.0, 50.0, 501);
    const TimeGrid coarse(0.0, 50.0, 51);
    TrajectoryConfig cfg;
    cfg.dt = 0.05;
    cfg.n_traj = 10000;
    EvolveOptions opts;
    opts.step_norm = 0.01;
    opts.keep_states = false;

    double worst = 0.0;
    int inside = 0;
    int total = 0;
    std::uint64_t seed = 777;
    for (double lambda : {0.05, 0.1}) {
        for (int n = 1; n <= 3; ++n) {
            const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, n);
            const Evolution me = evolve_master_phase(rho0, g, {lambda}, fine, opts);
            ledger.add(me.summary, false);
            std::vector<double> cf;
            for (double t : fine.times()) cf.push_back(pg_phase_red(n, kEta, 1.0, lambda, t));
            worst = std::max(worst, max_dev(me.trace.pg, cf));

            cfg.seed = seed++;
            const EnsembleResult ens = run_ensemble_phase(rho0, Sideband::Red, p, lambda, cfg, coarse);
            std::vector<double> ref;
            for (double t : coarse.times()) ref.push_back(pg_phase_red(n, kEta, 1.0, lambda, t));
            inside += count_within(ens.trace, ref, 3.0);
            total += coarse.size();
        }
    }

    // Vacuum is dark on the red sideband in all three routes.
    double dark = 0.0;
    {
        const DensityMatrix rho0 = DensityMatrix::basis_state(p.hilbert, Level::Ground, 0);
        const Evolution me = evolve_master_phase(rho0, g, {0.1}, coarse);
        ledger.add(me.summary, false);
        cfg.n_traj = 200;
        const EnsembleResult ens = run_ensemble_phase(rho0, Sideband::Red, p, 0.1, cfg, coarse);
        for (int k = 0; k < coarse.size(); ++k) {
            dark = std::max({dark, std::abs(me.trace.pg[k] - 1.0), std::abs(ens.trace.pg[k] - 1.0),
                             std::abs(pg_phase_red(0, kEta, 1.0, 0.1, coarse.at(k)) - 1.0)});
        }
    }
    const double frac = static_cast<double>(inside) / total;
    const bool pass = worst <= 1e-6 && frac >= 0.99 && dark <= 1e-12;
    report(5, pass,
           fmt("phase noise, red n=1..3, lambda in {0.05,0.1}: master vs closed form %.3e (tol 1e-6); ensemble "
               "%.2f%% of points within 3 stderr; n=0 max |Pg-1| = %.1e",
               worst, 100.0 * frac, dark),
           sw.seconds());
}

void criterion6()
{
    Stopwatch sw;
    const ModelParams p{1.0, kEta, HilbertConfig(8)};
    double worst = 0.0;
    for (Sideband s : kAllSidebands) {
        const Generator g = build_generator(s, p);
        const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(g.matrix);
        const Eigen::VectorXd numeric = es.eigenvalues();
        const auto [lo, hi] = eigenpair_index_range(s, p.hilbert);
        for (int n = lo; n <= std::min(hi, p.hilbert.n_max() - 2); ++n) {
            const auto [plus, minus] = analytic_eigenpairs(s, p, n);
            for (const EigenPair& e : {plus, minus}) {
                double nearest = 1e300;
                for (Eigen::Index i = 0; i < numeric.size(); ++i)
                    nearest = std::min(nearest, std::abs(numeric(i) - e.value));
                const double residual = (g.matrix * e.state - e.value * e.state).norm();
                worst = std::max({worst, nearest, residual});
            }
        }
    }
    const double second_red0 = analytic_eigenpairs(Sideband::SecondRed, p, 0).first.value;
    bool flagged = false;
    for (const Erratum& e : discrepancy_report().entries) flagged = flagged || e.id == "second-red-eigenvalue";
    const bool pass = worst <= 1e-10 && std::abs(second_red0 - kEta * std::sqrt(2.0)) <= 1e-15 && flagged;
    report(6, pass,
           fmt("analytic vs numerical spectrum, n <= n_max-2: max deviation %.2e (tol 1e-10); second red n=0 "
               "eigenvalue %.5f = eta sqrt((n+1)(n+2)); erratum flagged: ",
               worst, second_red0) +
               (flagged ? "yes" : "no"),
           sw.seconds());
}

void criterion7()
{
    Stopwatch sw;
    std::mt19937_64 rng(4242);
    std::normal_distribution<double> nd;
    const ModelParams p{1.0, kEta, HilbertConfig(6)};
    double ito_trace = 0.0;
    for (Sideband s : kAllSidebands) {
        const Generator g = build_generator(s, p);
        for (int trial = 0; trial < 25; ++trial) {
            const int d = p.hilbert.dim();
            ComplexMatrix x(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) x(i, j) = {nd(rng), nd(rng)};
            ComplexMatrix rho = x * x.adjoint();
            rho /= rho.trace();
            const ComplexMatrix inc = ito_increment(rho, g.matrix, kGamma, 0.01, 0.1 * nd(rng));
            ito_trace = std::max(ito_trace, std::abs(inc.trace()));
        }
    }
    const bool pass = ledger.runs > 0 && ledger.trace <= 1e-9 && ledger.hermiticity <= 1e-10 &&
                      ledger.min_eig >= -1e-8 && ledger.moment <= 1e-8 && ito_trace <= 1e-15;
    report(7, pass,
           fmt("invariants over the deterministic runs: trace %.1e (1e-9), hermiticity %.1e (1e-10), min eigenvalue "
               "%.1e (-1e-8), <G>/<G^2> drift %.1e (1e-8)",
               ledger.trace, ledger.hermiticity, ledger.min_eig, ledger.moment) +
               fmt("; %.0f runs; Ito increment |trace| %.1e", ledger.runs, ito_trace),
           sw.seconds());
}

std::string read_file(const std::filesystem::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "iontrap-cli");
    std::ostringstream out, err;
    return cli::run_cli(args, out, err);
}

void criterion8(const std::filesystem::path& dir)
{
    Stopwatch sw;
    const std::string out = (dir / "sweep.json").string();
    const int code = cli({"sweep-fit", "--sideband", "blue", "--n-from", "0", "--n-to", "5", "--out", out});
    bool pass = code == 0;
    double raw = NAN, per = NAN;
    std::string verdicts;
    if (pass) {
        const auto j = nlohmann::json::parse(read_file(out));
        raw = j["power_law"]["raw"]["p"].get<double>();
        per = j["power_law"]["per-rabi-cycle"]["p"].get<double>();
        const auto& cr = j["power_law"]["raw"]["comparison"];
        const auto& cp = j["power_law"]["per-rabi-cycle"]["comparison"];
        pass = std::abs(raw - 1.0) <= 0.02 && std::abs(per - 0.5) <= 0.02 && cr["derived_exponent"] == 0.5 &&
               cr["experimental_exponent"] == 0.7 && !cr["verdict"].get<std::string>().empty() &&
               !cp["verdict"].get<std::string>().empty();
        verdicts = "; raw: " + cr["verdict"].get<std::string>() + "; per-rabi-cycle: " + cp["verdict"].get<std::string>();
    }
    report(8, pass, fmt("sweep-fit blue n=0..5: raw p = %.4f (1.00 +- 0.02), per-rabi-cycle p = %.4f (0.50 +- 0.02)", raw, per) + verdicts,
           sw.seconds());
}

void criterion9()
{
    Stopwatch sw;
    const PulseAreaStats one = pulse_area_stats(1.0, 1e-10, 1e-6, 100000, 91);
    const PulseAreaStats ten = pulse_area_stats(1.0, 1e-8, 1e-6, 100000, 92);
    const PulseAreaStats scaled = pulse_area_stats(1.0, kGamma, 100.0, 100000, 93);
    double worst = 0.0;
    for (const PulseAreaStats* s : {&one, &ten, &scaled})
        worst = std::max(worst, std::abs(s->variance / s->expected_variance - 1.0));
    const bool pass = worst <= 0.05 && std::abs(one.fractional_error - 0.01) <= 1e-12 &&
                      std::abs(ten.fractional_error - 0.1) <= 1e-12;
    report(9, pass,
           fmt("pulse area, 1e5 samples: worst variance error %.2f%% (5%%); fractional error %.4f at Gamma=1e-10 s, "
               "%.4f at Gamma=1e-8 s (T = 1e-6 s)",
               100.0 * worst, one.fractional_error, ten.fractional_error),
           sw.seconds());
}

void criterion10(const std::filesystem::path& dir)
{
    Stopwatch sw;
    auto path = [&](const std::string& name) { return (dir / name).string(); };
    bool pass = true;
    const std::vector<std::string> traj = {"trajectories", "--tmax", "50", "--points", "101", "--ntraj", "2000"};
    for (const auto& [name, workers] : std::vector<std::pair<std::string, std::string>>{
             {"t1a.csv", "1"}, {"t1b.csv", "1"}, {"t2.csv", "2"}, {"t4.csv", "4"}}) {
        auto a = traj;
        a.insert(a.end(), {"--workers", workers, "--out", path(name)});
        pass = pass && cli(a) == 0;
    }
    const std::vector<std::string> phase = {"trajectories", "--sideband", "red", "--n", "1", "--lambda", "0.1",
                                            "--tmax", "20", "--points", "21", "--dt", "0.05", "--ntraj", "500"};
    for (const auto& [name, workers] :
         std::vector<std::pair<std::string, std::string>>{{"p1.csv", "1"}, {"p3.csv", "3"}}) {
        auto a = phase;
        a.insert(a.end(), {"--workers", workers, "--out", path(name)});
        pass = pass && cli(a) == 0;
    }
    pass = pass && cli({"simulate", "--out", path("s1.csv")}) == 0 && cli({"simulate", "--out", path("s2.csv")}) == 0;
    pass = pass && cli({"simulate", "--config", path("s1.meta.json"), "--out", path("s3.csv")}) == 0;

    const std::string t = read_file(path("t1a.csv"));
    const std::string s = read_file(path("s1.csv"));
    const bool same = t == read_file(path("t1b.csv")) && t == read_file(path("t2.csv")) &&
                      t == read_file(path("t4.csv")) && read_file(path("p1.csv")) == read_file(path("p3.csv")) &&
                      s == read_file(path("s2.csv")) && s == read_file(path("s3.csv"));
    pass = pass && same && !t.empty() && !s.empty();
    report(10, pass,
           std::string("CSV byte-identical across repeated runs, 1/2/4 workers and sidecar re-runs: ") +
               (same ? "yes" : "no"),
           sw.seconds());
}

} // namespace

int main()
{
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / ("iontrap_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);

    auto guarded = [](int id, auto&& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            report(id, false, std::string("threw: ") + e.what(), 0.0);
        }
    };
    guarded(1, criterion1);
    guarded(2, criterion2);
    guarded(3, criterion3);
    guarded(4, criterion4);
    guarded(5, criterion5);
    guarded(6, criterion6);
    guarded(7, criterion7);
    guarded(8, [&] { criterion8(dir); });
    guarded(9, criterion9);
    guarded(10, [&] { criterion10(dir); });

    std::filesystem::remove_all(dir);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
