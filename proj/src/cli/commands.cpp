#include "iontrap/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "iontrap/closed_forms.hpp"
#include "iontrap/errors.hpp"
#include "iontrap/fitting.hpp"
#include "iontrap/trajectories.hpp"

namespace iontrap::cli {

using nlohmann::ordered_json;

std::string format_number(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    // Guard against a non-"C" numeric locale.
    std::replace(s.begin(), s.end(), ',', '.');
    return s;
}

std::string trace_csv(const PopulationTrace& trace)
{
    std::string s = trace.std_error ? "tau,pg,stderr\n" : "tau,pg\n";
    for (int k = 0; k < trace.grid.size(); ++k) {
        s += format_number(trace.grid.at(k));
        s += ',';
        s += format_number(trace.pg[k]);
        if (trace.std_error) {
            s += ',';
            s += format_number((*trace.std_error)[k]);
        }
        s += '\n';
    }
    return s;
}

ordered_json trace_json(const PopulationTrace& trace)
{
    ordered_json j;
    j["tau"] = trace.grid.times();
    j["pg"] = trace.pg;
    if (trace.std_error) j["stderr"] = *trace.std_error;
    return j;
}

std::string sidecar_path(const std::string& out)
{
    std::filesystem::path p(out);
    p.replace_extension(".meta.json");
    return p.string();
}

namespace {

void write_file(const std::string& path, const std::string& content)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write output file '" + path + "'");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw ConfigError("failed writing '" + path + "'");
}

std::string resolve_out(const RunConfig& cfg, const std::string& command, bool report)
{
    if (!cfg.out.empty()) return cfg.out;
    return command + (report || cfg.format == "json" ? ".json" : ".csv");
}

ordered_json header(const RunConfig& cfg, const std::string& command, const std::string& out)
{
    RunConfig resolved = cfg;
    resolved.out = out;
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["version"] = kVersion;
    j["command"] = command;
    j["config"] = to_json(resolved);
    return j;
}

ordered_json scaled_json(const ScaledProblem& p)
{
    ordered_json j;
    j["omega0"] = p.params.omega0;
    j["gamma"] = p.gamma;
    j["lambda"] = p.lambda;
    j["t0"] = p.grid.t0();
    j["tmax"] = p.grid.t1();
    j["dt"] = p.dt;
    j["time_unit_seconds"] = p.time_unit;
    return j;
}

ordered_json summary_json(const InvariantSummary& s, const InvariantTolerances& tol, bool moments_apply)
{
    constexpr double moment_tol = 1e-8;
    ordered_json j;
    j["max_trace_error"] = s.max_trace_error;
    j["max_hermiticity_error"] = s.max_hermiticity_error;
    j["min_eigenvalue"] = s.min_eigenvalue;
    j["max_energy_drift"] = s.max_energy_drift;
    j["max_energy2_drift"] = s.max_energy2_drift;
    j["max_truncation_population"] = s.max_truncation_population;
    j["step"] = s.step;
    j["substeps_per_interval"] = s.substeps_per_interval;
    j["tolerances"] = {{"trace", tol.trace},
                       {"hermiticity", tol.hermiticity},
                       {"positivity", tol.positivity},
                       {"moments", moment_tol}};
    j["moments_conserved"] = moments_apply
                                 ? ordered_json(s.max_energy_drift <= moment_tol && s.max_energy2_drift <= moment_tol)
                                 : ordered_json(nullptr);
    j["passed"] = s.max_trace_error <= tol.trace && s.max_hermiticity_error <= tol.hermiticity &&
                  s.min_eigenvalue >= tol.positivity;
    j["warnings"] = s.warnings;
    return j;
}

ordered_json ensemble_json(const EnsembleResult& r)
{
    ordered_json j;
    j["n_traj"] = r.n_traj;
    j["dt"] = r.dt;
    j["n_steps"] = r.n_steps;
    j["truncation_population"] = r.truncation_population;
    j["max_trace_drift"] = r.max_trace_drift;
    j["max_hermiticity_drift"] = r.max_hermiticity_drift;
    j["min_eigenvalue"] = r.min_eigenvalue;
    j["warnings"] = r.warnings;
    return j;
}

void warn_all(std::ostream& log, const std::vector<std::string>& warnings)
{
    for (const std::string& w : warnings) log << "warning: " << w << '\n';
}

Evolution deterministic(const RunConfig& cfg, const ScaledProblem& p, int n, bool keep_states = false)
{
    const Generator g = build_generator(cfg.sideband, p.params);
    const DensityMatrix rho0 = DensityMatrix::basis_state(p.params.hilbert, Level::Ground, n);
    if (cfg.noise == NoiseKind::Phase) {
        EvolveOptions opts;
        opts.step_norm = cfg.step_norm;
        opts.keep_states = keep_states;
        return evolve_master_phase(rho0, g, {p.lambda}, p.grid, opts);
    }
    if (cfg.method == "exact") {
        return ExactPropagator(g, {p.gamma}).evolve(rho0, p.grid, {}, keep_states);
    }
    EvolveOptions opts;
    opts.step_norm = cfg.step_norm;
    opts.keep_states = keep_states;
    return evolve_master_intensity(rho0, g, {p.gamma}, p.grid, opts);
}

EnsembleResult ensemble(const RunConfig& cfg, const ScaledProblem& p, int n)
{
    const DensityMatrix rho0 = DensityMatrix::basis_state(p.params.hilbert, Level::Ground, n);
    const TrajectoryConfig tc = trajectory_config(cfg, p);
    if (cfg.noise == NoiseKind::Phase) return run_ensemble_phase(rho0, cfg.sideband, p.params, p.lambda, tc, p.grid);
    return run_ensemble_intensity(rho0, build_generator(cfg.sideband, p.params), p.gamma, tc, p.grid);
}

std::string trace_payload(const RunConfig& cfg, const PopulationTrace& trace)
{
    return cfg.format == "json" ? trace_json(trace).dump(2) + "\n" : trace_csv(trace);
}

double max_deviation(const std::vector<double>& a, const std::vector<double>& b)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
    return worst;
}

struct SigmaAgreement {
    double fraction = 0.0;
    double worst_z = 0.0;
    double median_stderr = 0.0;
};

SigmaAgreement sigma_agreement(const PopulationTrace& ens, const std::vector<double>& ref)
{
    SigmaAgreement a;
    int inside = 0;
    std::vector<double> se = *ens.std_error;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        const double d = std::abs(ens.pg[k] - ref[k]);
        const double s = se[k];
        const bool ok = s > 0.0 ? d <= 3.0 * s : d <= 1e-12;
        inside += ok ? 1 : 0;
        if (s > 0.0) a.worst_z = std::max(a.worst_z, d / s);
    }
    a.fraction = static_cast<double>(inside) / static_cast<double>(ref.size());
    std::nth_element(se.begin(), se.begin() + static_cast<std::ptrdiff_t>(se.size() / 2), se.end());
    a.median_stderr = se[se.size() / 2];
    return a;
}

ordered_json check(const std::string& name, double value, double tolerance, bool& all_pass)
{
    const bool pass = value <= tolerance;
    all_pass = all_pass && pass;
    return {{"name", name}, {"max_abs_deviation", value}, {"tolerance", tolerance}, {"pass", pass}};
}

ordered_json errata_json(const DiscrepancyReport& r)
{
    ordered_json list = ordered_json::array();
    for (const Erratum& e : r.entries) {
        list.push_back({{"id", e.id},
                        {"relation", e.equation},
                        {"printed", e.printed},
                        {"alternative", e.alternative},
                        {"implemented", e.implemented},
                        {"note", e.note}});
    }
    ordered_json j;
    j["entries"] = list;
    j["carrier_variant_max_deviation"] = r.carrier_variant_max_deviation;
    j["carrier_variant_note"] = "known erratum: max |P_g(paper-verbatim) - P_g(self-consistent)|, carrier, n = 0, "
                                "eta = 0.2, Gamma = 0.041, tau in [0, 20]";
    return j;
}

double default_level_shift(const RunConfig& cfg)
{
    if (cfg.level_shift) return *cfg.level_shift;
    return cfg.sideband == Sideband::Red || cfg.noise == NoiseKind::Phase ? 0.0 : 1.0;
}

ordered_json power_law_json(const PowerLawFit& f)
{
    const ExponentComparison c = exponent_comparison(f);
    ordered_json j;
    j["normalization"] = std::string(to_string(*f.normalization));
    j["level_shift"] = f.level_shift;
    j["n_levels"] = f.n_levels;
    j["gamma0"] = f.gamma0;
    j["p"] = f.p;
    j["sigma_p"] = std::sqrt(std::max(0.0, f.covariance(1, 1)));
    j["covariance"] = {{f.covariance(0, 0), f.covariance(0, 1)}, {f.covariance(1, 0), f.covariance(1, 1)}};
    j["residual_rms"] = f.residual_rms;
    j["comparison"] = {{"derived_exponent", kDerivedExponent},
                       {"experimental_exponent", kExperimentalExponent},
                       {"ci95", {c.ci_low, c.ci_high}},
                       {"consistent_with_derived", c.consistent_with_derived},
                       {"consistent_with_experimental", c.consistent_with_experimental},
                       {"verdict", c.verdict}};
    return j;
}

std::string level_csv_path(const std::string& out, int n)
{
    std::filesystem::path p(out);
    const std::string stem = p.stem().string();
    p.replace_filename(stem + "_n" + std::to_string(n) + ".csv");
    return p.string();
}

} // namespace

int cmd_simulate(const RunConfig& cfg, std::ostream& log)
{
    const ScaledProblem p = scaled_problem(cfg);
    const std::string out = resolve_out(cfg, "simulate", false);
    const Evolution ev = deterministic(cfg, p, cfg.n);
    warn_all(log, ev.summary.warnings);

    ordered_json meta = header(cfg, "simulate", out);
    meta["scaled"] = scaled_json(p);
    meta["solver"] = cfg.noise == NoiseKind::Phase ? "phase-master-rk4"
                     : cfg.method == "exact"      ? "intensity-exact"
                                                  : "intensity-master-rk4";
    meta["invariants"] = summary_json(ev.summary, {}, cfg.noise == NoiseKind::Intensity);
    if (out == "-") {
        std::cout << trace_payload(cfg, ev.trace);
        return kOk;
    }
    write_file(out, trace_payload(cfg, ev.trace));
    write_file(sidecar_path(out), meta.dump(2) + "\n");
    log << "wrote " << out << " and " << sidecar_path(out) << '\n';
    return kOk;
}

int cmd_trajectories(const RunConfig& cfg, std::ostream& log)
{
    const ScaledProblem p = scaled_problem(cfg);
    const std::string out = resolve_out(cfg, "trajectories", false);
    const EnsembleResult r = ensemble(cfg, p, cfg.n);
    warn_all(log, r.warnings);

    ordered_json meta = header(cfg, "trajectories", out);
    meta["scaled"] = scaled_json(p);
    meta["ensemble"] = ensemble_json(r);
    if (out == "-") {
        std::cout << trace_payload(cfg, r.trace);
        return kOk;
    }
    write_file(out, trace_payload(cfg, r.trace));
    write_file(sidecar_path(out), meta.dump(2) + "\n");
    log << "wrote " << out << " and " << sidecar_path(out) << '\n';
    return kOk;
}

int cmd_compare(const RunConfig& cfg, std::ostream& log)
{
    const ScaledProblem p = scaled_problem(cfg);
    const std::string out = resolve_out(cfg, "compare", true);
    const std::vector<double> times = p.grid.times();
    const int n = cfg.n;
    const double eta = p.params.eta;
    const double w = p.params.omega0;
    bool all_pass = true;
    ordered_json checks = ordered_json::array();
    ordered_json report = header(cfg, "compare", out);
    report["scaled"] = scaled_json(p);

    RunConfig ode_cfg = cfg;
    ode_cfg.method = "ode";
    const Evolution ode = deterministic(ode_cfg, p, n);
    warn_all(log, ode.summary.warnings);
    report["invariants"] = summary_json(ode.summary, {}, cfg.noise == NoiseKind::Intensity);
    std::vector<double> reference = ode.trace.pg;

    if (cfg.noise == NoiseKind::Intensity) {
        RunConfig ex_cfg = cfg;
        ex_cfg.method = "exact";
        const Evolution exact = deterministic(ex_cfg, p, n);
        reference = exact.trace.pg;
        checks.push_back(check("ode_vs_exact", max_deviation(ode.trace.pg, exact.trace.pg), 1e-6, all_pass));

        std::vector<double> sc, pv;
        for (double t : times) {
            sc.push_back(pg_intensity(cfg.sideband, FormulaVariant::SelfConsistent, n, eta, w, p.gamma, t));
            pv.push_back(pg_intensity(cfg.sideband, FormulaVariant::PaperVerbatim, n, eta, w, p.gamma, t));
        }
        // |g,n> couples to |e,n+1> on the blue sideband, which must be retained.
        const bool closed = cfg.sideband != Sideband::Blue || n + 1 <= p.params.hilbert.n_max();
        if (closed) {
            checks.push_back(check("exact_vs_closed_form", max_deviation(exact.trace.pg, sc), 1e-8, all_pass));
        }
        const double variant = max_deviation(sc, pv);
        if (cfg.sideband == Sideband::Carrier) {
            report["carrier_variants"] = {{"max_abs_deviation", variant},
                                          {"status", "known erratum"},
                                          {"note", "paper-verbatim carrier form differs from the generator"}};
        } else {
            checks.push_back(check("paper_verbatim_vs_self_consistent", variant, 1e-12, all_pass));
        }
    } else if (cfg.sideband == Sideband::Red) {
        std::vector<double> cf;
        for (double t : times) cf.push_back(pg_phase_red(n, eta, w, p.lambda, t));
        checks.push_back(check("ode_vs_closed_form", max_deviation(ode.trace.pg, cf), 1e-6, all_pass));
    }

    const EnsembleResult ens = ensemble(cfg, p, n);
    warn_all(log, ens.warnings);
    const SigmaAgreement agree = sigma_agreement(ens.trace, reference);
    const bool ens_pass = agree.fraction >= 0.99;
    all_pass = all_pass && ens_pass;
    checks.push_back({{"name", "ensemble_within_3_stderr"},
                      {"fraction_within", agree.fraction},
                      {"required_fraction", 0.99},
                      {"max_z", agree.worst_z},
                      {"median_stderr", agree.median_stderr},
                      {"pass", ens_pass}});
    report["ensemble"] = ensemble_json(ens);
    report["checks"] = checks;
    report["errata"] = errata_json(discrepancy_report());
    report["pass"] = all_pass;

    write_file(out, report.dump(2) + "\n");
    log << "wrote " << out << (all_pass ? " (all checks passed)" : " (some checks FAILED)") << '\n';
    return all_pass ? kOk : kInvariantFailure;
}

int cmd_sweep_fit(const RunConfig& cfg, std::ostream& log)
{
    const ScaledProblem p = scaled_problem(cfg);
    if (cfg.n_to > cfg.nmax - 2) throw ConfigError("key 'n_to': must be <= nmax - 2");
    const std::string out = resolve_out(cfg, "sweep-fit", true);
    ordered_json report = header(cfg, "sweep-fit", out);
    report["scaled"] = scaled_json(p);

    std::vector<LevelRate> rates;
    ordered_json levels = ordered_json::array();
    for (int n = cfg.n_from; n <= cfg.n_to; ++n) {
        ordered_json entry;
        entry["n"] = n;
        const Evolution ev = deterministic(cfg, p, n);
        warn_all(log, ev.summary.warnings);
        const std::string csv = level_csv_path(out, n);
        write_file(csv, trace_csv(ev.trace));
        entry["csv"] = csv;
        try {
            const DampedCosineFit f = fit_damped_cosine(ev.trace);
            entry["gamma"] = f.gamma;
            entry["omega"] = f.omega;
            entry["amplitude"] = f.amplitude;
            entry["offset"] = f.offset;
            entry["sigma_gamma"] = f.sigma_gamma;
            entry["sigma_omega"] = f.sigma_omega;
            entry["residual_rms"] = f.residual_rms;
            entry["iterations"] = f.iterations;
            if (f.degenerate) {
                entry["status"] = "degenerate: no oscillation, excluded";
            } else {
                entry["status"] = "ok";
                rates.push_back({n, f.gamma, f.omega});
            }
        } catch (const FitError& e) {
            entry["status"] = std::string("fit failed: ") + e.what();
            log << "warning: n = " << n << ": " << e.what() << '\n';
        }
        levels.push_back(entry);
    }
    report["levels"] = levels;

    int code = kOk;
    const double shift = default_level_shift(cfg);
    ordered_json fits;
    for (RateNormalization norm : {RateNormalization::Raw, RateNormalization::PerRabiCycle}) {
        try {
            fits[std::string(to_string(norm))] = power_law_json(fit_power_law(rates, norm, shift));
        } catch (const FitError& e) {
            fits[std::string(to_string(norm))] = {{"error", e.what()}};
            code = kFitFailure;
        }
    }
    report["power_law"] = fits;
    report["model"] = "gamma_n = gamma0 (n + level_shift)^p; raw uses gamma_n, per-rabi-cycle uses gamma_n / omega_n";
    write_file(out, report.dump(2) + "\n");
    log << "wrote " << out << '\n';
    return code;
}

int cmd_pulse_area(const RunConfig& cfg, std::ostream& log)
{
    validate(cfg);
    const std::string out = resolve_out(cfg, "pulse-area", true);
    const double duration = cfg.tmax - cfg.t0;
    const PulseAreaStats s = pulse_area_stats(cfg.omega0, cfg.gamma, duration, cfg.samples, cfg.seed);
    ordered_json report = header(cfg, "pulse-area", out);
    report["duration"] = duration;
    report["mean"] = s.mean;
    report["variance"] = s.variance;
    report["expected_mean"] = s.expected_mean;
    report["expected_variance"] = s.expected_variance;
    report["variance_relative_error"] = std::abs(s.variance / s.expected_variance - 1.0);
    report["fractional_error"] = s.fractional_error;
    report["sample_fractional_error"] = s.sample_fractional_error;
    report["n_samples"] = s.n_samples;
    if (out == "-") {
        std::cout << report.dump(2) << '\n';
        return kOk;
    }
    write_file(out, report.dump(2) + "\n");
    log << "wrote " << out << '\n';
    return kOk;
}

int cmd_report_errata(const RunConfig& cfg, std::ostream& out, std::ostream& log)
{
    ordered_json j;
    j["schema_version"] = kSchemaVersion;
    j["version"] = kVersion;
    j["errata"] = errata_json(discrepancy_report());
    const std::string text = j.dump(2) + "\n";
    if (cfg.out.empty() || cfg.out == "-") {
        out << text;
    } else {
        write_file(cfg.out, text);
        log << "wrote " << cfg.out << '\n';
    }
    return kOk;
}

namespace {

struct Flags {
    std::string config;
    std::string sideband, noise, out, format, method, scheme;
    int n = 0, n_from = 0, n_to = 0, points = 0, ntraj = 0, nmax = 0, workers = 0;
    double eta = 0, omega0 = 0, gamma = 0, lambda = 0, t0 = 0, tmax = 0, dt = 0, step_norm = 0, level_shift = 0;
    std::uint64_t seed = 0;
    long long samples = 0;
    bool physical = false;
    std::vector<std::pair<std::string, CLI::Option*>> options;

    void attach(CLI::App& app)
    {
        app.add_option("--config", config, "JSON config file or a previous run's .meta.json sidecar");
        auto add = [&](const std::string& key, const std::string& flag, auto& target, const std::string& help) {
            options.emplace_back(key, app.add_option(flag, target, help));
        };
        add("sideband", "--sideband", sideband, "carrier | red | blue | second-red");
        add("n", "--n", n, "initial phonon number of |g,n>");
        add("n_from", "--n-from", n_from, "first level of a sweep");
        add("n_to", "--n-to", n_to, "last level of a sweep");
        add("eta", "--eta", eta, "Lamb-Dicke parameter");
        add("omega0", "--omega0", omega0, "Rabi frequency");
        add("noise", "--noise", noise, "intensity | phase");
        add("gamma", "--gamma", gamma, "intensity-noise strength");
        add("lambda", "--lambda", lambda, "phase-noise rate (selects phase noise)");
        add("t0", "--t0", t0, "start time");
        add("tmax", "--tmax", tmax, "end time");
        add("points", "--points", points, "grid points");
        add("dt", "--dt", dt, "trajectory step");
        add("ntraj", "--ntraj", ntraj, "trajectories");
        add("seed", "--seed", seed, "master seed");
        add("nmax", "--nmax", nmax, "Fock truncation");
        add("out", "--out", out, "output path ('-' for stdout)");
        add("format", "--format", format, "csv | json");
        add("method", "--method", method, "ode | exact");
        add("scheme", "--scheme", scheme, "exact-unitary | euler-maruyama");
        add("workers", "--workers", workers, "worker threads (0 = all cores)");
        add("step_norm", "--step-norm", step_norm, "RK4 step times rate scale");
        add("level_shift", "--level-shift", level_shift, "power-law level offset");
        add("samples", "--samples", samples, "pulse-area samples");
        options.emplace_back("physical", app.add_flag("--physical", physical, "physical units (omega0 in 1/s)"));
    }

    ordered_json overrides() const
    {
        ordered_json j = ordered_json::object();
        for (const auto& [key, opt] : options) {
            if (opt->count() == 0) continue;
            if (key == "sideband") j[key] = sideband;
            else if (key == "noise") j[key] = noise;
            else if (key == "out") j[key] = out;
            else if (key == "format") j[key] = format;
            else if (key == "method") j[key] = method;
            else if (key == "scheme") j[key] = scheme;
            else if (key == "n") j[key] = n;
            else if (key == "n_from") j[key] = n_from;
            else if (key == "n_to") j[key] = n_to;
            else if (key == "points") j[key] = points;
            else if (key == "ntraj") j[key] = ntraj;
            else if (key == "nmax") j[key] = nmax;
            else if (key == "workers") j[key] = workers;
            else if (key == "eta") j[key] = eta;
            else if (key == "omega0") j[key] = omega0;
            else if (key == "gamma") j[key] = gamma;
            else if (key == "lambda") j[key] = lambda;
            else if (key == "t0") j[key] = t0;
            else if (key == "tmax") j[key] = tmax;
            else if (key == "dt") j[key] = dt;
            else if (key == "step_norm") j[key] = step_norm;
            else if (key == "level_shift") j[key] = level_shift;
            else if (key == "seed") j[key] = seed;
            else if (key == "samples") j[key] = samples;
            else if (key == "physical") j[key] = physical;
        }
        return j;
    }
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Ion-trap sideband decoherence under laser intensity and phase noise"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    const char* names[] = {"simulate", "compare", "sweep-fit", "trajectories", "pulse-area", "report-errata"};
    const char* help[] = {
        "integrate the noise-averaged master equation and write P_g(tau)",
        "cross-check ODE, exact propagation, closed forms and the trajectory ensemble",
        "fit decay rates over a range of initial levels and the power law in n",
        "average stochastic trajectories and write P_g(tau) with standard errors",
        "sample the pulse-area distribution",
        "list the known inconsistencies in the published formulas",
    };
    std::vector<std::unique_ptr<Flags>> flags;
    std::vector<CLI::App*> subs;
    for (int i = 0; i < 6; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        flags.push_back(std::make_unique<Flags>());
        flags.back()->attach(*sub);
        subs.push_back(sub);
    }

    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return e.get_exit_code() == 0 ? kOk : kConfigError;
    }

    try {
        for (int i = 0; i < 6; ++i) {
            if (!subs[i]->parsed()) continue;
            const Flags& f = *flags[i];
            RunConfig cfg = f.config.empty() ? RunConfig{} : load_config(f.config);
            cfg = merge_config(cfg, f.overrides(), "command line");
            validate(cfg);
            const std::string name = names[i];
            if (name == "simulate") return cmd_simulate(cfg, err);
            if (name == "compare") return cmd_compare(cfg, err);
            if (name == "sweep-fit") return cmd_sweep_fit(cfg, err);
            if (name == "trajectories") return cmd_trajectories(cfg, err);
            if (name == "pulse-area") return cmd_pulse_area(cfg, err);
            return cmd_report_errata(cfg, out, err);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvariantError& e) {
        err << "invariant failure: " << e.what() << '\n';
        return kInvariantFailure;
    } catch (const FitError& e) {
        err << "fit failure: " << e.what() << '\n';
        return kFitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}

} // namespace iontrap::cli
