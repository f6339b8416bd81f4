#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace steinis {

/// One row of the per-iteration trace. Absent values are written as empty CSV fields.
struct TraceRow {
  long iteration = 0;
  std::optional<double> epsilon;
  std::optional<double> bandwidth;
  std::optional<double> ess;
  std::optional<double> ksd_squared;
  std::optional<double> log_z_running;
};

using NamedValues = std::vector<std::pair<std::string, double>>;

/// Outcome of any estimation method; serialized to <name>.json and <name>.csv.
struct RunResult {
  std::string method;
  std::optional<double> log_z;
  std::optional<double> ess;
  long sample_size = 0;
  long iterations_run = 0;
  bool stopped_early = false;
  NamedValues estimates;    // expectation estimates keyed by test-function name
  NamedValues diagnostics;  // method-specific scalars
  std::vector<TraceRow> trace;
};

}  // namespace steinis
