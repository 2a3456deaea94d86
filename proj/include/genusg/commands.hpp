#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "genusg/differentials.hpp"

namespace genusg {

/// Parsed run configuration: surface parameters, truncation policy and seed.
struct RunConfig {
  SchottkyParams params;
  TruncationPolicy policy;
  std::uint64_t seed = 0;

  /// Canonical JSON of the effective configuration.
  nlohmann::json to_json() const;
  /// FNV-1a 64 of the canonical JSON, as 16 hex digits.
  std::string hash() const;
};

/// Reads { "genus", "handles" | "params_file", "policy", "seed" }; throws InvalidInput.
RunConfig parse_config(const nlohmann::json& j);

/// The shipped g = 2 reference configuration.
nlohmann::json reference_config();

/// "1.5", "-2i", "0.1+0.2i", "i"; throws InvalidInput.
Complex parse_complex(const std::string& text);
/// Comma-separated list of complex numbers.
std::vector<Complex> parse_points(const std::string& text);

nlohmann::json to_json(Complex z);

struct CommandResult {
  int exit_code;  // 0 pass, 1 residual failure, 2 malformed input, 3 numerical guard
  nlohmann::json report;
};

/// Runs one command. The request is { "config": {...} | null, "seed": n?, "threads": n?,
/// "options": {...} }; a null config selects the reference configuration.
CommandResult run_command(const std::string& command, const nlohmann::json& request);

/// Names accepted by run_command.
const std::vector<std::string>& command_names();

}  // namespace genusg
