#pragma once

// EventLog interchange: a CSV of detections (header `arm,timestamp_s`, rows in
// time order, arm 1 first on ties) plus a JSON metadata sidecar. Timestamps
// are written in shortest round-trip form, so save/load is bit-exact.

#include <filesystem>
#include <iosfwd>
#include <json.hpp>

#include "bellsim/coincidence_sim.hpp"

namespace bellsim {

nlohmann::json setting_to_json(const Setting& s);
Setting setting_from_json(const nlohmann::json& j);

nlohmann::json source_to_json(const SourceConfig& source);
SourceConfig source_from_json(const nlohmann::json& j);

nlohmann::json detector_to_json(const DetectorModel& det);
DetectorModel detector_from_json(const nlohmann::json& j);

nlohmann::json counts_to_json(const CoincidenceCounts& c);

void write_event_csv(std::ostream& out, const EventLog& log);

/// Reads the streams into `log.arm1` / `log.arm2`, leaving metadata as is.
/// Throws InvalidArgument on a malformed header, row, or arm label.
void read_event_csv(std::istream& in, EventLog& log);

nlohmann::json event_log_metadata(const EventLog& log);
void apply_event_log_metadata(const nlohmann::json& meta, EventLog& log);

/// Writes `<base>.csv` and `<base>.json`.
void save_event_log(const std::filesystem::path& base, const EventLog& log);
EventLog load_event_log(const std::filesystem::path& base);

/// Formats a double in the shortest form that parses back to the same value.
std::string format_double(double x);

}  // namespace bellsim
