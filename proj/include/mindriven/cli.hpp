// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mindriven/error.hpp"
#include "mindriven/types.hpp"

namespace mindriven::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kSuccess = 0,
  kValidation = 2,
  kNumerical = 3,
  kPrecondition = 4,
};

int exit_code_for(ErrorKind kind);

/// Effective configuration of one run. Keys in JSON form use the long flag
/// names (kernel, x0, N, tol-event, ...).
struct RunConfig {
  std::string command;
  std::string kernel = "const:1";
  std::string x0 = "e1";
  std::string y0;
  std::vector<Count> N;
  std::vector<Count> n;
  Size i = 2;
  std::size_t replicas = 1;
  std::optional<double> horizon;
  std::string stop = "singleton";
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  double tol_event = 1e-10;
  double tol_mass = 1e-8;
  double tol_overflow = 1e-6;
  Size truncation = 256;
  std::optional<Size> max_min_size;
  double dense_dt = 0.0;
  bool sparse = false;
  bool lyapunov = false;
  std::size_t grid = 512;
  std::string mode;
  Size cutoff = 64;
  std::size_t series_cutoff = 10000;
  unsigned threads = 0;
  std::string partner_sampling = "auto";
};

/// Every key accepted in a config file or on the command line.
const std::vector<std::string>& known_keys();

/// Builds a config from JSON; unknown keys and malformed values are rejected
/// with ErrorKind::Parse. Strings are accepted for numeric fields.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& c);

/// Executes the command, writing artifacts to c.output_dir and a short
/// human-readable summary to log. Returns the exit code.
int run(const RunConfig& c, std::ostream& log);

/// Full command-line entry: parsing, config merging, diagnostics, exit codes.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mindriven::cli
