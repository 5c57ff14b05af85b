#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pullbound/config.hpp"
#include "pullbound/drift.hpp"

namespace pullbound {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumeric = 2;
inline constexpr int kExitDominance = 3;

struct CliOverrides {
  std::optional<std::string> out;      // replaces output.path
  std::optional<std::uint64_t> seed;   // replaces every seed key the command reads
  std::optional<int> workers;          // replaces the worker count
  bool force = false;                  // proceed past a dominance refusal
};

// Subcommand bodies, callable in-process. Each validates its config, writes
// one artifact (CSV or JSON) with the resolved settings stamped in header
// rows, and returns an exit code. Artifacts never embed the worker count or
// the output path, so reruns at different worker counts are byte-identical.
int cmd_fig_decay(const Config& cfg, const CliOverrides& ov = {});
int cmd_fig_counterexample(const Config& cfg, const CliOverrides& ov = {});
int cmd_coupling_demo(const Config& cfg, const CliOverrides& ov = {});
int cmd_bound(const Config& cfg, const CliOverrides& ov = {});
int cmd_trap_demo(const Config& cfg, const CliOverrides& ov = {});

// Full command line without the program name; returns the process exit code.
int run_cli(const std::vector<std::string>& args);

// Drift parsed from a config section: family = ou | piecewise | expression |
// radial, with lambda / lambda_left + lambda_right / source / dimension keys.
DriftSpec drift_from_config(const Config& cfg, const std::string& section);

}  // namespace pullbound
