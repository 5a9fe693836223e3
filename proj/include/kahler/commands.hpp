#pragma once

#include "kahler/config.hpp"
#include "kahler/io.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace kahler::cli {

enum ExitCode { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

/// Output of one command. With RunConfig::out set, `report` is written to
/// <out>/<report_name> and every entry of `files` next to it; otherwise `stdout_text`
/// is printed.
struct CommandResult {
  int exit_code = kSuccess;
  std::string report_name;
  io::json report;
  std::vector<std::pair<std::string, std::string>> files;
  std::string stdout_text;
};

CommandResult cmd_evaluate(const RunConfig& cfg);
CommandResult cmd_invariance(const RunConfig& cfg);
CommandResult cmd_solve(const RunConfig& cfg);
CommandResult cmd_iterate(const RunConfig& cfg);
CommandResult cmd_variation_check(const RunConfig& cfg);
CommandResult cmd_sweep(const RunConfig& cfg);
/// Pinned convention constants and the CP^m oracle results.
CommandResult cmd_conventions(const RunConfig& cfg);

/// Writes or prints a result as described on CommandResult.
void emit(const RunConfig& cfg, const CommandResult& result, std::ostream& out);

/// Argument parsing and dispatch; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Shared setup, exposed for tests.
GeometryPtr load_geometry(const RunConfig& cfg);
MetricProfile load_profile_source(const GeometryPtr& geom, const std::string& source);
HolomorphyPotential load_potential(const RunConfig& cfg, const ProfileGeometry& geom);

struct NamedDirection {
  std::string label;
  std::function<double(double)> u;
};

/// u in {x^2, x^3 - x/2, x^4 + x}.
const std::vector<NamedDirection>& variation_directions();
/// f in {exp, scaled:0.5:pow:2, pow:3}.
const std::vector<std::string>& variation_f_matrix();
/// h in {const:1, id, exp}.
const std::vector<std::string>& variation_h_matrix();

/// Name of the most derived library error class, e.g. "NoCriticalMetric".
std::string error_kind(const std::exception& e);

}  // namespace kahler::cli
