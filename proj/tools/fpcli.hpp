#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace fpcli {

enum Exit : int {
  ok = 0,
  io_error = 1,
  config_error = 2,
  cap_exceeded = 3,
  conformal_refusal = 4,
  not_converged = 5,
  out_of_range = 6,
  conflicting_flags = 7,
};

struct CliError : std::runtime_error {
  CliError(int code, const std::string& what) : std::runtime_error(what), code(code) {}
  int code;
};

struct RunConfig {
  std::string command;
  std::string preset;
  std::map<std::string, std::string> params;
  std::string ifs_path;
  unsigned depth_first = 0;
  unsigned depth_last = 0;
  std::string potential = "zero";
  std::string weights;
  std::string format = "json";
  std::string out;  // empty: artifact on stdout
  std::string svg;
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  std::uint64_t cap = 10'000'000;
  unsigned threads = 0;
  unsigned refine = 2;

  bool operator==(const RunConfig&) const = default;
};

// Throws CliError carrying the exit code.
RunConfig parse_config(const std::vector<std::string>& args);
// Flags that parse back to the same config.
std::vector<std::string> explain(const RunConfig& config);

struct SweepPoint {
  std::string value;
  double x = 0.0;
  double estimate = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool converged = false;
  double seconds = 0.0;
};

struct SweepResult {
  std::string parameter;
  std::vector<SweepPoint> points;
};

std::string sweep_csv(const SweepResult& sweep);
std::string svg_chart(const SweepResult& sweep);
void emit_svg(const SweepResult& sweep, const std::string& path);

// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::string& path, const std::string& contents);

// Prints the summary line on `out`; returns the exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fpcli
