#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "isac/harness.hpp"

namespace isac {

// Configuration problem tied to a specific field; the CLI maps this to
// exit code 2.
struct ConfigError : std::runtime_error {
  ConfigError(std::string field_path, const std::string& message)
      : std::runtime_error("config field '" + field_path + "': " + message),
        field(std::move(field_path)) {}

  std::string field;
};

// Schema v1: see configs/ for examples. All physical quantities use SI base
// units with unit-suffixed field names; SNRs are in dB.
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::string& path);

// Resolved round-trip used for run manifests.
nlohmann::json scenario_to_json(const Scenario& scenario);

// Applies "dotted.path=value" overrides (value parsed as JSON, falling back
// to a string) onto a config document.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace isac
