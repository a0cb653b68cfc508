// commands.hpp: subcommands of iontrap-cli

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "iontrap/cli/config.hpp"
#include "iontrap/evolution.hpp"

namespace iontrap::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kConfigError = 2,
    kInvariantFailure = 3,
    kFitFailure = 4,
};

// "%.17g" with '.' as the decimal separator regardless of locale.
std::string format_number(double x);

// tau,pg[,stderr] with '\n' line endings.
std::string trace_csv(const PopulationTrace& trace);
nlohmann::ordered_json trace_json(const PopulationTrace& trace);

// Sidecar written next to `out`: the extension is replaced by ".meta.json".
std::string sidecar_path(const std::string& out);

int cmd_simulate(const RunConfig& cfg, std::ostream& log);
int cmd_trajectories(const RunConfig& cfg, std::ostream& log);
int cmd_compare(const RunConfig& cfg, std::ostream& log);
int cmd_sweep_fit(const RunConfig& cfg, std::ostream& log);
int cmd_pulse_area(const RunConfig& cfg, std::ostream& log);
int cmd_report_errata(const RunConfig& cfg, std::ostream& out, std::ostream& log);

// Full command line including argv[0]. Returns an ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace iontrap::cli
