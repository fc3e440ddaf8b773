#pragma once

// Versioned JSON document driving `bellsim simulate`. Schema:
// schemas/run_config.schema.json. Unknown keys are rejected at every level.

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>

#include "bellsim/coincidence_sim.hpp"
#include "bellsim/event_io.hpp"

namespace bellsim {

inline constexpr const char* kRunConfigSchema = "bellsim.run/1";

struct RunConfig {
  SourceConfig source;
  DetectorModel detector;
  Quad quad;
  double window = 0.0;  // seconds
  std::uint64_t seed = 0;
  std::optional<std::string> counts_json;
  std::optional<std::string> events_dir;
};

/// Throws ConfigError describing the first violation found.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::string& path);

nlohmann::json run_config_to_json(const RunConfig& cfg);

}  // namespace bellsim
