#pragma once

#include "steinis/experiment.hpp"
#include "steinis/result.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace steinis {

inline constexpr int kFormatVersion = 1;

/// Header of the per-iteration trace CSV.
inline constexpr const char* kTraceHeader = "iteration,epsilon,bandwidth,ess,ksd_squared,log_z_running";
/// Header of the sweep aggregate CSV.
inline constexpr const char* kSweepHeader = "axis_value,trials,mean_estimate,mse,std_error,oracle";

/// Numbers are written with %.17g so reruns compare byte for byte.
std::string format_number(double v);

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
/// Serialized summary of one run, stamped with kFormatVersion.
std::string result_json(const RunResult& result, const std::string& name, std::uint64_t seed, double wall_seconds);
std::string sweep_json(const std::string& name, const std::string& axis, const std::string& quantity,
                       const std::vector<SweepRow>& rows);

/// Writes `content` to `path`, throwing std::runtime_error when the file cannot be written.
void write_file(const std::string& path, const std::string& content);

}  // namespace steinis
