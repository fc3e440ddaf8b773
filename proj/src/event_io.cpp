#include "bellsim/event_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace bellsim {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

json setting_to_json(const Setting& s) {
  if (s.is_absent()) return json{{"absent", true}};
  return json{{"absent", false}, {"theta_rad", s.theta()}};
}

Setting setting_from_json(const json& j) {
  if (j.at("absent").get<bool>()) return Setting::absent();
  return Setting::angle(j.at("theta_rad").get<double>());
}

json source_to_json(const SourceConfig& source) {
  json model;
  if (const auto* st = std::get_if<State>(&source.model)) {
    model = {{"type", "quantum"}, {"f", st->f()}};
  } else {
    model = {{"type", "malus"}};
  }
  return json{{"pair_rate", source.pair_rate}, {"duration", source.duration}, {"model", model}};
}

SourceConfig source_from_json(const json& j) {
  SourceConfig s;
  s.pair_rate = j.at("pair_rate").get<double>();
  s.duration = j.at("duration").get<double>();
  const auto& m = j.at("model");
  const auto type = m.at("type").get<std::string>();
  if (type == "quantum") {
    s.model = State(m.at("f").get<double>());
  } else if (type == "malus") {
    s.model = MalusModel{};
  } else {
    throw InvalidArgument("unknown pair model type '" + type + "'");
  }
  return s;
}

json detector_to_json(const DetectorModel& d) {
  return json{{"eta1", d.eta1},   {"eta2", d.eta2},
              {"dark1", d.dark1}, {"dark2", d.dark2},
              {"jitter_sigma", d.jitter_sigma}, {"dead_time", d.dead_time}};
}

DetectorModel detector_from_json(const json& j) {
  DetectorModel d;
  d.eta1 = j.at("eta1").get<double>();
  d.eta2 = j.at("eta2").get<double>();
  d.dark1 = j.at("dark1").get<double>();
  d.dark2 = j.at("dark2").get<double>();
  d.jitter_sigma = j.at("jitter_sigma").get<double>();
  d.dead_time = j.value("dead_time", 0.0);
  return d;
}

json counts_to_json(const CoincidenceCounts& c) {
  return json{{"n_coinc", c.n_coinc},   {"singles1", c.singles1},         {"singles2", c.singles2},
              {"window_s", c.window},   {"duration_s", c.duration},       {"setting1", setting_to_json(c.s1)},
              {"setting2", setting_to_json(c.s2)}};
}

void write_event_csv(std::ostream& out, const EventLog& log) {
  out << "arm,timestamp_s\n";
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < log.arm1.size() || j < log.arm2.size()) {
    const bool take1 = j >= log.arm2.size() || (i < log.arm1.size() && log.arm1[i] <= log.arm2[j]);
    if (take1) {
      out << "1," << format_double(log.arm1[i++]) << '\n';
    } else {
      out << "2," << format_double(log.arm2[j++]) << '\n';
    }
  }
}

void read_event_csv(std::istream& in, EventLog& log) {
  std::string line;
  if (!std::getline(in, line) || line != "arm,timestamp_s") {
    throw InvalidArgument("event CSV: expected header 'arm,timestamp_s'");
  }
  log.arm1.clear();
  log.arm2.clear();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument("event CSV: missing comma on line " + std::to_string(lineno));
    const std::string arm = line.substr(0, comma);
    double t = 0.0;
    const char* first = line.data() + comma + 1;
    const char* last = line.data() + line.size();
    const auto res = std::from_chars(first, last, t);
    if (res.ec != std::errc() || res.ptr != last) {
      throw InvalidArgument("event CSV: bad timestamp on line " + std::to_string(lineno));
    }
    if (arm == "1") {
      log.arm1.push_back(t);
    } else if (arm == "2") {
      log.arm2.push_back(t);
    } else {
      throw InvalidArgument("event CSV: arm must be 1 or 2 on line " + std::to_string(lineno));
    }
  }
}

json event_log_metadata(const EventLog& log) {
  return json{{"seed", log.seed},
              {"setting1", setting_to_json(log.s1)},
              {"setting2", setting_to_json(log.s2)},
              {"source", source_to_json(log.source)},
              {"detector", detector_to_json(log.detector)}};
}

void apply_event_log_metadata(const json& meta, EventLog& log) {
  log.seed = meta.at("seed").get<std::uint64_t>();
  log.s1 = setting_from_json(meta.at("setting1"));
  log.s2 = setting_from_json(meta.at("setting2"));
  log.source = source_from_json(meta.at("source"));
  log.detector = detector_from_json(meta.at("detector"));
}

void save_event_log(const std::filesystem::path& base, const EventLog& log) {
  auto csv_path = base;
  csv_path += ".csv";
  auto meta_path = base;
  meta_path += ".json";
  std::ofstream csv(csv_path);
  if (!csv) throw InvalidArgument("cannot write " + csv_path.string());
  write_event_csv(csv, log);
  std::ofstream meta(meta_path);
  if (!meta) throw InvalidArgument("cannot write " + meta_path.string());
  meta << event_log_metadata(log).dump(2) << '\n';
}

EventLog load_event_log(const std::filesystem::path& base) {
  auto csv_path = base;
  csv_path += ".csv";
  auto meta_path = base;
  meta_path += ".json";
  EventLog log;
  std::ifstream meta(meta_path);
  if (!meta) throw InvalidArgument("cannot read " + meta_path.string());
  apply_event_log_metadata(json::parse(meta), log);
  std::ifstream csv(csv_path);
  if (!csv) throw InvalidArgument("cannot read " + csv_path.string());
  read_event_csv(csv, log);
  return log;
}

}  // namespace bellsim
