// isacsim: OFDM ISAC detection experiments from JSON scenario configs.
// Every command is deterministic given (config, seed) and writes a CSV plus
// a .manifest.json sidecar carrying the resolved configuration and its hash.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "isac/config.hpp"
#include "isac/harness.hpp"
#include "isac/textio.hpp"

namespace {

constexpr const char* kToolVersion = "isacsim 1.0.0";
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
  std::string config_path;
  std::string output_path;
  std::vector<std::string> overrides;
  std::optional<long> threads;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "scenario config (JSON)")
      ->required();
  cmd->add_option("-o,--output", args.output_path, "output CSV path")
      ->required();
  cmd->add_option("--set", args.overrides,
                  "config override, key.path=value (repeatable)");
  cmd->add_option("--threads", args.threads, "worker thread count (0 = auto)");
}

nlohmann::json load_config_document(const CommonArgs& args) {
  std::ifstream in(args.config_path);
  if (!in) {
    throw isac::ConfigError("", "cannot open config file: " + args.config_path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw isac::ConfigError("", std::string("JSON parse error: ") + e.what());
  }
  for (const std::string& assignment : args.overrides) {
    isac::apply_override(doc, assignment);
  }
  if (args.threads) doc["threads"] = *args.threads;
  return doc;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// The manifest hash covers everything that determines the output bytes.
std::string write_outputs(const std::string& command,
                          const isac::Scenario& scenario,
                          const nlohmann::json& extras,
                          isac::CsvBuilder& csv,
                          const std::string& output_path) {
  nlohmann::json core = {{"command", command},
                         {"config", isac::scenario_to_json(scenario)},
                         {"parameters", extras},
                         {"tool_version", kToolVersion}};
  const std::string hash = isac::sha256_hex(core.dump());

  csv.comment("manifest: " + hash);
  isac::write_file_atomic(output_path, csv.str());

  nlohmann::json manifest = core;
  manifest["manifest_hash"] = hash;
  manifest["output"] = output_path;
  manifest["wall_clock_utc"] = utc_timestamp();
  isac::write_file_atomic(output_path + ".manifest.json", manifest.dump(2) + "\n");
  return hash;
}

long effective_calibration_trials(const isac::Scenario& sc) {
  return sc.calibration_trials.value_or(
      static_cast<long>(std::ceil(100.0 / sc.pfa)));
}

int run_calibrate(const CommonArgs& args, bool all_constellations) {
  const nlohmann::json doc = load_config_document(args);
  const isac::Scenario base = isac::scenario_from_json(doc);

  std::vector<isac::ConstellationKind> kinds;
  if (all_constellations) {
    kinds.assign(isac::kAllConstellations.begin(),
                 isac::kAllConstellations.end());
  } else {
    kinds = {base.constellation};
  }

  isac::CsvBuilder csv({"constellation", "gamma", "pfa", "trials", "seed"});
  for (const isac::ConstellationKind kind : kinds) {
    isac::Scenario sc = base;
    sc.constellation = kind;
    const double gamma = isac::calibrate_threshold(sc);
    csv.row({isac::to_string(kind), isac::format_double(gamma),
             isac::format_double(sc.pfa),
             isac::format_int(effective_calibration_trials(sc)),
             std::to_string(sc.seed)});
  }

  write_outputs("calibrate", base,
                nlohmann::json{{"all_constellations", all_constellations}}, csv,
                args.output_path);
  return 0;
}

std::map<isac::ConstellationKind, double> read_thresholds(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open thresholds file: " + path);
  std::map<isac::ConstellationKind, double> gammas;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {  // header row
      saw_header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string kind_name, gamma_str;
    if (!std::getline(ss, kind_name, ',') || !std::getline(ss, gamma_str, ',')) {
      throw std::runtime_error("thresholds file: malformed row: " + line);
    }
    gammas[isac::constellation_from_string(kind_name)] = std::stod(gamma_str);
  }
  if (gammas.empty()) throw std::runtime_error("thresholds file: no rows");
  return gammas;
}

int run_slice(const CommonArgs& args, std::optional<std::uint64_t> seed,
              std::optional<double> gamma_override,
              const std::string& thresholds_path) {
  const nlohmann::json doc = load_config_document(args);
  const isac::Scenario sc = isac::scenario_from_json(doc);
  const std::uint64_t slice_seed = seed.value_or(sc.seed);

  std::function<double(isac::ConstellationKind)> gamma_for;
  if (gamma_override) {
    gamma_for = [g = *gamma_override](isac::ConstellationKind) { return g; };
  } else if (!thresholds_path.empty()) {
    auto gammas = read_thresholds(thresholds_path);
    gamma_for = [gammas](isac::ConstellationKind kind) {
      const auto it = gammas.find(kind);
      if (it == gammas.end()) {
        throw std::runtime_error("thresholds file lacks constellation " +
                                 isac::to_string(kind));
      }
      return it->second;
    };
  } else {
    throw isac::ConfigError("gamma",
                            "slice needs --gamma or --thresholds (calibrate first)");
  }

  const auto slices = isac::range_slice(sc, slice_seed, gamma_for);

  isac::CsvBuilder csv({"range_m", "constellation", "iteration", "value_db"});
  for (const isac::RangeSlice& slice : slices) {
    for (std::size_t i = 0; i < slice.range_m.size(); ++i) {
      csv.row({isac::format_double(slice.range_m[i]),
               isac::to_string(slice.constellation),
               isac::format_int(slice.iteration),
               isac::format_double(slice.value_db[i])});
    }
  }

  nlohmann::json extras{{"seed", slice_seed}};
  if (gamma_override) extras["gamma_override"] = *gamma_override;
  if (!thresholds_path.empty()) extras["thresholds_file"] = thresholds_path;
  write_outputs("slice", sc, extras, csv, args.output_path);
  return 0;
}

std::vector<double> parse_range_spec(const std::string& spec) {
  double start = 0, stop = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::stringstream ss(spec);
  if (!(ss >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
      ss.rdbuf()->in_avail() != 0) {
    throw isac::ConfigError("range", "expected start:stop:step, got " + spec);
  }
  if (step <= 0.0 || stop < start) {
    throw isac::ConfigError("range", "need step > 0 and stop >= start");
  }
  std::vector<double> points;
  for (double v = start; v <= stop + 1e-9 * step; v += step) {
    points.push_back(v);
  }
  return points;
}

int run_pd_sweep(const CommonArgs& args, const std::string& axis_name,
                 const std::string& range_spec) {
  const nlohmann::json doc = load_config_document(args);
  const isac::Scenario sc = isac::scenario_from_json(doc);

  isac::SweepAxis axis;
  if (axis_name == "snr1") {
    axis = isac::SweepAxis::Snr1;
  } else if (axis_name == "snr2") {
    axis = isac::SweepAxis::Snr2;
  } else if (axis_name == "constellation") {
    axis = isac::SweepAxis::Constellation;
  } else {
    throw isac::ConfigError("axis",
                            "expected snr1, snr2, or constellation: " + axis_name);
  }

  std::vector<double> points;
  if (axis != isac::SweepAxis::Constellation) {
    if (range_spec.empty()) {
      throw isac::ConfigError("range", "SNR axes need --range start:stop:step");
    }
    points = parse_range_spec(range_spec);
  }

  const auto rows = isac::sweep(sc, axis, points);

  isac::CsvBuilder csv(
      {"axis_value", "detector", "constellation", "pd", "stderr", "trials"});
  for (const isac::SweepPoint& row : rows) {
    csv.row({isac::format_double(row.axis_value),
             isac::to_string(row.detector),
             isac::to_string(row.constellation),
             isac::format_double(row.estimate.pd),
             isac::format_double(row.estimate.stderr_normal),
             isac::format_int(row.estimate.trials)});
  }

  write_outputs("pd-sweep", sc,
                nlohmann::json{{"axis", axis_name}, {"range", range_spec}}, csv,
                args.output_path);
  return 0;
}

int run_psl(const CommonArgs& args) {
  const nlohmann::json doc = load_config_document(args);
  const isac::Scenario sc = isac::scenario_from_json(doc);

  const auto stats = isac::psl_stats(sc);
  isac::CsvBuilder csv({"constellation", "psl_db_mean", "psl_db_p95", "trials"});
  for (const isac::PslStats& s : stats) {
    csv.row({isac::to_string(s.constellation),
             isac::format_double(s.psl_db_mean),
             isac::format_double(s.psl_db_p95), isac::format_int(s.trials)});
  }

  write_outputs("psl", sc, nlohmann::json::object(), csv, args.output_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OFDM ISAC detection experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonArgs cal_args;
  bool all_constellations = false;
  CLI::App* cal = app.add_subcommand(
      "calibrate", "noise-only calibration of the per-scan threshold");
  add_common(cal, cal_args);
  cal->add_flag("--all-constellations", all_constellations,
                "calibrate every constellation, one CSV row each");

  CommonArgs slice_args;
  std::optional<std::uint64_t> slice_seed;
  std::optional<double> slice_gamma;
  std::string slice_thresholds;
  CLI::App* slice = app.add_subcommand(
      "slice", "two-iteration range profiles for all constellations");
  add_common(slice, slice_args);
  slice->add_option("--seed", slice_seed, "seed override for the realization");
  slice->add_option("--gamma", slice_gamma, "threshold override (all kinds)");
  slice->add_option("--thresholds", slice_thresholds,
                    "thresholds CSV from the calibrate command");

  CommonArgs sweep_args;
  std::string axis_name = "snr2";
  std::string range_spec;
  CLI::App* sweep = app.add_subcommand(
      "pd-sweep", "detection probability for all three detectors");
  add_common(sweep, sweep_args);
  sweep->add_option("--axis", axis_name, "snr1, snr2, or constellation");
  sweep->add_option("--range", range_spec, "axis values, start:stop:step (dB)");

  CommonArgs psl_args;
  CLI::App* psl = app.add_subcommand(
      "psl", "peak sidelobe statistics per constellation");
  add_common(psl, psl_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (cal->parsed()) return run_calibrate(cal_args, all_constellations);
    if (slice->parsed()) {
      return run_slice(slice_args, slice_seed, slice_gamma, slice_thresholds);
    }
    if (sweep->parsed()) return run_pd_sweep(sweep_args, axis_name, range_spec);
    if (psl->parsed()) return run_psl(psl_args);
  } catch (const isac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
