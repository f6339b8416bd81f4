#include "steinis/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace steinis {

namespace {

using nlohmann::ordered_json;

std::string field(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

ordered_json number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

ordered_json named(const NamedValues& values) {
  ordered_json obj = ordered_json::object();
  for (const auto& [k, v] : values) obj[k] = std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
  return obj;
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace) {
  out << kTraceHeader << '\n';
  for (const TraceRow& r : trace) {
    out << r.iteration << ',' << field(r.epsilon) << ',' << field(r.bandwidth) << ',' << field(r.ess) << ','
        << field(r.ksd_squared) << ',' << field(r.log_z_running) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kSweepHeader << '\n';
  for (const SweepRow& r : rows) {
    out << format_number(r.axis_value) << ',' << r.trials << ',' << format_number(r.mean_estimate) << ','
        << field(r.mse) << ',' << format_number(r.std_error) << ',' << field(r.oracle) << '\n';
  }
}

std::string result_json(const RunResult& result, const std::string& name, std::uint64_t seed, double wall_seconds) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["name"] = name;
  j["method"] = result.method;
  j["seed"] = seed;
  j["log_z"] = number_or_null(result.log_z);
  j["ess"] = number_or_null(result.ess);
  j["sample_size"] = result.sample_size;
  j["iterations_run"] = result.iterations_run;
  j["stopped_early"] = result.stopped_early;
  j["estimates"] = named(result.estimates);
  j["diagnostics"] = named(result.diagnostics);
  j["trace_rows"] = result.trace.size();
  j["wall_seconds"] = wall_seconds;
  return j.dump(2) + "\n";
}

std::string sweep_json(const std::string& name, const std::string& axis, const std::string& quantity,
                       const std::vector<SweepRow>& rows) {
  ordered_json j;
  j["format_version"] = kFormatVersion;
  j["name"] = name;
  j["axis"] = axis;
  j["quantity"] = quantity;
  ordered_json arr = ordered_json::array();
  for (const SweepRow& r : rows) {
    arr.push_back({{"axis_value", r.axis_value},
                   {"trials", r.trials},
                   {"mean_estimate", r.mean_estimate},
                   {"mse", number_or_null(r.mse)},
                   {"std_error", r.std_error},
                   {"oracle", number_or_null(r.oracle)}});
  }
  j["rows"] = arr;
  return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace steinis
