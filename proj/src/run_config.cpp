#include "bellsim/run_config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>

namespace bellsim {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!keys.count(item.key())) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

double number(const json& obj, const std::string& where, const char* key, std::optional<double> fallback = {}) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(where + ": missing required key '" + key + "'");
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::optional<std::string> optional_string(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

const json& required_object(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  return obj.at(key);
}

}  // namespace

RunConfig parse_run_config(const json& doc) {
  reject_unknown(doc, "config", {"schema", "source", "detector", "quad_deg", "window_s", "seed", "output"});
  if (!doc.contains("schema") || !doc.at("schema").is_string()) throw ConfigError("config: missing 'schema' string");
  if (doc.at("schema").get<std::string>() != kRunConfigSchema) {
    throw ConfigError(std::string("config: unsupported schema '") + doc.at("schema").get<std::string>() +
                      "', expected '" + kRunConfigSchema + "'");
  }

  RunConfig cfg;
  try {
    const auto& src = required_object(doc, "config", "source");
    reject_unknown(src, "source", {"pair_rate", "duration_s", "model"});
    cfg.source.pair_rate = number(src, "source", "pair_rate");
    cfg.source.duration = number(src, "source", "duration_s");
    const auto& model = required_object(src, "source", "model");
    if (!model.is_object() || !model.contains("type") || !model.at("type").is_string()) {
      throw ConfigError("source.model: expected an object with a 'type' string");
    }
    const auto type = model.at("type").get<std::string>();
    if (type == "quantum") {
      reject_unknown(model, "source.model", {"type", "f"});
      cfg.source.model = State(number(model, "source.model", "f"));
    } else if (type == "malus") {
      reject_unknown(model, "source.model", {"type"});
      cfg.source.model = MalusModel{};
    } else {
      throw ConfigError("source.model.type: expected 'quantum' or 'malus', got '" + type + "'");
    }
    cfg.source.validate();

    if (doc.contains("detector")) {
      const auto& det = doc.at("detector");
      reject_unknown(det, "detector", {"eta1", "eta2", "dark1", "dark2", "jitter_sigma_s", "dead_time_s"});
      cfg.detector.eta1 = number(det, "detector", "eta1", 1.0);
      cfg.detector.eta2 = number(det, "detector", "eta2", 1.0);
      cfg.detector.dark1 = number(det, "detector", "dark1", 0.0);
      cfg.detector.dark2 = number(det, "detector", "dark2", 0.0);
      cfg.detector.jitter_sigma = number(det, "detector", "jitter_sigma_s", 0.0);
      cfg.detector.dead_time = number(det, "detector", "dead_time_s", 0.0);
    }
    cfg.detector.validate();

    const auto& q = required_object(doc, "config", "quad_deg");
    reject_unknown(q, "quad_deg", {"theta1", "theta1_prime", "theta2", "theta2_prime"});
    cfg.quad = Quad::degrees(number(q, "quad_deg", "theta1"), number(q, "quad_deg", "theta1_prime"),
                             number(q, "quad_deg", "theta2"), number(q, "quad_deg", "theta2_prime"));

    cfg.window = number(doc, "config", "window_s");
    if (!(cfg.window > 0.0)) throw ConfigError("window_s: must be > 0");

    if (doc.contains("seed")) {
      const auto& s = doc.at("seed");
      if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0)) {
        throw ConfigError("seed: expected a nonnegative integer");
      }
      cfg.seed = s.get<std::uint64_t>();
    }
    if (doc.contains("output")) {
      const auto& out = doc.at("output");
      reject_unknown(out, "output", {"counts_json", "events_dir"});
      cfg.counts_json = optional_string(out, "output", "counts_json");
      cfg.events_dir = optional_string(out, "output", "events_dir");
    }
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(doc);
}

json run_config_to_json(const RunConfig& cfg) {
  json source = source_to_json(cfg.source);
  json doc{{"schema", kRunConfigSchema},
           {"source", {{"pair_rate", cfg.source.pair_rate}, {"duration_s", cfg.source.duration}, {"model", source.at("model")}}},
           {"detector",
            {{"eta1", cfg.detector.eta1},
             {"eta2", cfg.detector.eta2},
             {"dark1", cfg.detector.dark1},
             {"dark2", cfg.detector.dark2},
             {"jitter_sigma_s", cfg.detector.jitter_sigma},
             {"dead_time_s", cfg.detector.dead_time}}},
           {"quad_deg",
            {{"theta1", rad_to_deg(cfg.quad.theta1)},
             {"theta1_prime", rad_to_deg(cfg.quad.theta1_prime)},
             {"theta2", rad_to_deg(cfg.quad.theta2)},
             {"theta2_prime", rad_to_deg(cfg.quad.theta2_prime)}}},
           {"window_s", cfg.window},
           {"seed", cfg.seed}};
  json output = json::object();
  if (cfg.counts_json) output["counts_json"] = *cfg.counts_json;
  if (cfg.events_dir) output["events_dir"] = *cfg.events_dir;
  if (!output.empty()) doc["output"] = output;
  return doc;
}

}  // namespace bellsim
