#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "gqc/potentials.hpp"

namespace gqc {

inline constexpr const char* kVersion = "gqc 0.1.0";

// Overrides applied on top of the config file (CLI flags win).
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> samples;
  std::optional<std::string> out;
  bool dump_witnesses = false;
  std::optional<double> fd_step;
  std::optional<std::string> fd_order;
  std::optional<bool> richardson;
};

// Builds a potential from its config spec:
//   {"builtin": "neg_log_abs_det"}
//   {"iso_family": {"g": "power_sum", "params": {"alpha": 2.0}}}
//   {"sl2_affine": {"k":1, "b":0, "c":0, "e":0, "f":0}}
// plus optional modifiers "negate": true, "involution": true,
// "conjugate": [[...]] applied in that order.
Potential potential_from_json(const nlohmann::json& spec, int n);

// Executes one command from a validated config and writes the report.
// Returns the process exit code: 0 pass/vacuous, 1 fail, 2 config error.
int run_config(const nlohmann::json& config, const RunOverrides& overrides, std::ostream& log);

}  // namespace gqc
