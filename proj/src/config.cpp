#include "isac/config.hpp"

#include <fstream>
#include <sstream>

namespace isac {

namespace {

using nlohmann::json;

const json& require_field(const json& j, const std::string& key,
                          const std::string& context) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError(context + key, "missing");
  }
  return *it;
}

double number_field(const json& j, const std::string& key,
                    const std::string& context) {
  const json& v = require_field(j, key, context);
  if (!v.is_number()) throw ConfigError(context + key, "expected a number");
  return v.get<double>();
}

double number_field_or(const json& j, const std::string& key,
                       const std::string& context, double fallback) {
  if (!j.contains(key)) return fallback;
  return number_field(j, key, context);
}

long integer_field(const json& j, const std::string& key,
                   const std::string& context) {
  const json& v = require_field(j, key, context);
  if (!v.is_number_integer()) throw ConfigError(context + key, "expected an integer");
  return v.get<long>();
}

long integer_field_or(const json& j, const std::string& key,
                      const std::string& context, long fallback) {
  if (!j.contains(key)) return fallback;
  return integer_field(j, key, context);
}

bool bool_field_or(const json& j, const std::string& key,
                   const std::string& context, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ConfigError(context + key, "expected a boolean");
  return v.get<bool>();
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("", "document must be a JSON object");
  const long version = integer_field(j, "schema_version", "");
  if (version != 1) {
    throw ConfigError("schema_version", "unsupported version (expected 1)");
  }

  Scenario sc;
  const json& frame = require_field(j, "frame", "");
  if (!frame.is_object()) throw ConfigError("frame", "expected an object");
  const double fc = number_field(frame, "fc_hz", "frame.");
  const double df = number_field(frame, "df_hz", "frame.");
  const long n = integer_field(frame, "subcarriers", "frame.");
  const long m = integer_field(frame, "symbols", "frame.");
  const double t_cp = number_field(frame, "t_cp_s", "frame.");
  try {
    if (frame.contains("t_sym_s")) {
      sc.frame = FrameConfig::create_explicit(
          fc, df, static_cast<int>(n), static_cast<int>(m), t_cp,
          number_field(frame, "t_sym_s", "frame."));
    } else {
      sc.frame = FrameConfig::create(fc, df, static_cast<int>(n),
                                     static_cast<int>(m), t_cp);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError("frame", e.what());
  }

  const json& kind = require_field(j, "constellation", "");
  if (!kind.is_string()) throw ConfigError("constellation", "expected a string");
  try {
    sc.constellation = constellation_from_string(kind.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("constellation", e.what());
  }

  const json& targets = require_field(j, "targets", "");
  if (!targets.is_array()) throw ConfigError("targets", "expected an array");
  int index = 0;
  for (const json& t : targets) {
    const std::string ctx = "targets." + std::to_string(index) + ".";
    TargetSpec spec;
    spec.range_m = number_field(t, "range_m", ctx);
    spec.velocity_mps = number_field_or(t, "velocity_mps", ctx, 0.0);
    spec.snr_db = number_field(t, "snr_db", ctx);
    spec.on_grid = bool_field_or(t, "on_grid", ctx, true);
    sc.targets.push_back(spec);
    ++index;
  }

  sc.pfa = number_field(j, "pfa", "");
  sc.oversample = static_cast<int>(integer_field_or(j, "oversample", "", 1));

  sc.cfar.pfa = sc.pfa;
  if (j.contains("cfar")) {
    const json& cfar = j.at("cfar");
    if (!cfar.is_object()) throw ConfigError("cfar", "expected an object");
    sc.cfar.pfa = number_field_or(cfar, "pfa", "cfar.", sc.pfa);
    sc.cfar.train =
        static_cast<int>(integer_field_or(cfar, "train_cells", "cfar.", 16));
    sc.cfar.guard =
        static_cast<int>(integer_field_or(cfar, "guard_cells", "cfar.", 4));
  }

  const json& seed = require_field(j, "seed", "");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw ConfigError("seed", "expected an integer");
  }
  sc.seed = seed.get<std::uint64_t>();

  sc.trials = integer_field_or(j, "trials", "", 1000);
  if (j.contains("calibration_trials")) {
    sc.calibration_trials = integer_field(j, "calibration_trials", "");
  }
  sc.allow_undersized_calibration =
      bool_field_or(j, "allow_undersized_calibration", "", false);
  sc.target_of_interest = static_cast<int>(integer_field_or(
      j, "target_of_interest", "", sc.targets.size() > 1 ? 1 : 0));
  sc.match_radius = static_cast<int>(integer_field_or(j, "match_radius", "", 1));
  sc.max_iterations =
      static_cast<int>(integer_field_or(j, "max_iterations", "", 10));
  sc.exclusion_radius =
      static_cast<int>(integer_field_or(j, "exclusion_radius", "", 1));
  sc.threads = static_cast<int>(integer_field_or(j, "threads", "", 0));

  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("", e.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("JSON parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

nlohmann::json scenario_to_json(const Scenario& sc) {
  json targets = json::array();
  for (const TargetSpec& t : sc.targets) {
    targets.push_back(json{{"range_m", t.range_m},
                           {"velocity_mps", t.velocity_mps},
                           {"snr_db", t.snr_db},
                           {"on_grid", t.on_grid}});
  }
  json j = {
      {"schema_version", 1},
      {"frame",
       {{"fc_hz", sc.frame.fc_hz},
        {"df_hz", sc.frame.df_hz},
        {"subcarriers", sc.frame.n},
        {"symbols", sc.frame.m},
        {"t_cp_s", sc.frame.t_cp_s},
        {"t_sym_s", sc.frame.t_sym_s}}},
      {"constellation", to_string(sc.constellation)},
      {"targets", targets},
      {"pfa", sc.pfa},
      {"oversample", sc.oversample},
      {"cfar",
       {{"pfa", sc.cfar.pfa},
        {"train_cells", sc.cfar.train},
        {"guard_cells", sc.cfar.guard}}},
      {"seed", sc.seed},
      {"trials", sc.trials},
      {"allow_undersized_calibration", sc.allow_undersized_calibration},
      {"target_of_interest", sc.target_of_interest},
      {"match_radius", sc.match_radius},
      {"max_iterations", sc.max_iterations},
      {"exclusion_radius", sc.exclusion_radius},
      {"threads", sc.threads},
  };
  if (sc.calibration_trials) j["calibration_trials"] = *sc.calibration_trials;
  return j;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(assignment, "override must look like key.path=value");
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // plain string
  }

  json* node = &j;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw ConfigError(path, "empty override path");

  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const std::string& key = parts[i];
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(key);
      } catch (...) {
        throw ConfigError(path, "expected an array index at '" + key + "'");
      }
      if (idx >= node->size()) throw ConfigError(path, "array index out of range");
      node = &(*node)[idx];
    } else {
      node = &(*node)[key];
    }
  }
  const std::string& last = parts.back();
  if (node->is_array()) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(last);
    } catch (...) {
      throw ConfigError(path, "expected an array index at '" + last + "'");
    }
    if (idx >= node->size()) throw ConfigError(path, "array index out of range");
    (*node)[idx] = value;
  } else {
    (*node)[last] = value;
  }
}

}  // namespace isac
