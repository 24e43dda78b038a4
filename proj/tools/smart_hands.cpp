// Command-line front end: scenario generation, end-to-end replay, matrix
// evaluation, throughput composition, fleet-impact arithmetic, and report
// summaries. Results go to stdout as JSON; diagnostics go to stderr.
// Exit codes: 0 success, 2 malformed input, 3 runtime pipeline failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smart_hands/alerting.hpp"
#include "smart_hands/config.hpp"
#include "smart_hands/errors.hpp"
#include "smart_hands/evaluation.hpp"
#include "smart_hands/perception.hpp"
#include "smart_hands/replay.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitRuntime = 3;

using nlohmann::json;
using namespace smart_hands;

std::ifstream open_input(const std::string& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what, "cannot open '" + path + "'");
  return in;
}

std::ofstream open_output(const std::string& path, const char* what) {
  std::ofstream out(path);
  if (!out) throw ConfigError(what, "cannot create '" + path + "'");
  return out;
}

/// Config file (flag wins over SMART_HANDS_CONFIG), then --set overrides.
ConfigMap resolve_config_map(const std::string& config_flag,
                             const std::vector<std::string>& overrides) {
  ConfigMap map;
  std::string path = config_flag;
  if (path.empty()) {
    if (const char* env = std::getenv("SMART_HANDS_CONFIG")) path = env;
  }
  if (!path.empty()) map = load_config_file(path);
  apply_overrides(map, overrides);
  return map;
}

int cmd_generate(const std::string& script_path, const std::string& out_path,
                 std::int64_t seed) {
  auto script_file = open_input(script_path, "script");
  replay::ScenarioScript script = replay::ScenarioScript::parse(script_file);
  replay::Manifest manifest =
      seed >= 0 ? replay::generate(script, static_cast<std::uint64_t>(seed))
                : replay::generate(script);
  auto out = open_output(out_path, "out");
  manifest.save_jsonl(out);
  std::cout << json{{"ticks", manifest.ticks.size()}, {"out", out_path}}.dump()
            << '\n';
  return kExitOk;
}

int cmd_run(const std::string& manifest_path, const std::string& config_flag,
            const std::vector<std::string>& overrides,
            const std::string& backend, double error_rate,
            std::uint64_t noise_seed, const std::string& events_path,
            const std::string& report_path) {
  auto manifest_file = open_input(manifest_path, "manifest");
  replay::Manifest manifest = replay::Manifest::load_jsonl(manifest_file);

  const ConfigMap map = resolve_config_map(config_flag, overrides);
  const PipelineConfig cfg = config_from_map(map);
  const auto rois = perception::seat_rois_from_map(map);

  const replay::NoiseSpec noise =
      replay::NoiseSpec::uniform(error_rate, noise_seed);
  auto backends = replay::make_backends(backend, manifest, cfg, noise);

  std::ofstream events_file;
  replay::RunOptions options;
  if (!events_path.empty()) {
    events_file = open_output(events_path, "events");
    options.events_out = &events_file;
  }

  const replay::RunReport report =
      replay::run(manifest, cfg, rois, *backends, options);
  const json report_json = report.to_json();
  if (!report_path.empty()) {
    open_output(report_path, "report") << report_json.dump(2) << '\n';
  }
  std::cout << report_json.dump() << '\n';
  return kExitOk;
}

int cmd_eval_matrix(const std::string& csv_path) {
  auto csv = open_input(csv_path, "csv");
  const eval::ConfusionMatrix m = eval::ConfusionMatrix::from_csv(csv);
  json per_class = json::object();
  const auto metrics = m.per_class_metrics();
  for (std::size_t i = 0; i < m.labels().size(); ++i) {
    per_class[m.labels()[i]] =
        json{{"precision", metrics[i].precision ? json(*metrics[i].precision)
                                                : json(nullptr)},
             {"recall", metrics[i].recall ? json(*metrics[i].recall)
                                          : json(nullptr)}};
  }
  std::cout << json{{"accuracy", m.accuracy()},
                    {"total", m.total()},
                    {"per_class", per_class}}
                   .dump()
            << '\n';
  return kExitOk;
}

int cmd_throughput(const std::string& rates_csv, const std::string& mode) {
  eval::StageProfile profile;
  std::stringstream ss(rates_csv);
  std::string cell;
  int index = 0;
  while (std::getline(ss, cell, ',')) {
    try {
      profile.stages.push_back(
          {"stage" + std::to_string(index++), std::stod(cell)});
    } catch (const std::exception&) {
      throw ConfigError("rates", "bad rate '" + cell + "'");
    }
  }
  if (profile.stages.empty()) throw ConfigError("rates", "no rates given");

  eval::ComposeMode compose_mode;
  if (mode == "sequential") {
    compose_mode = eval::ComposeMode::Sequential;
  } else if (mode == "pipelined") {
    compose_mode = eval::ComposeMode::Pipelined;
  } else {
    throw ConfigError("mode", "expected sequential or pipelined");
  }
  json rates = json::array();
  for (const auto& s : profile.stages) rates.push_back(s.rate_fps);
  std::cout << json{{"mode", mode},
                    {"rates", rates},
                    {"fps", eval::compose_throughput(profile, compose_mode)}}
                   .dump()
            << '\n';
  return kExitOk;
}

int cmd_impact(std::int64_t equipped, std::int64_t fleet, double fraction,
               std::int64_t accidents) {
  eval::FleetImpact impact;
  try {
    impact = eval::fleet_impact(equipped, fleet, fraction, accidents);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("impact", e.what());
  }
  std::cout << json{{"penetration", impact.penetration},
                    {"prevented", impact.prevented_accidents}}
                   .dump()
            << '\n';
  return kExitOk;
}

int cmd_report(const std::string& report_path) {
  auto file = open_input(report_path, "report");
  json report;
  try {
    report = json::parse(file);
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("bad report JSON: ") + e.what());
  }
  try {
    json summary{{"sets_emitted", report.at("sets_emitted")},
                 {"truth_ticks", report.at("truth_ticks")},
                 {"alerts", report.at("alerts").size()},
                 {"accuracy",
                  json{{"left_object",
                        report.at("hands").at("left").at("object_accuracy")},
                       {"left_location",
                        report.at("hands").at("left").at("location_accuracy")},
                       {"right_object",
                        report.at("hands").at("right").at("object_accuracy")},
                       {"right_location",
                        report.at("hands").at("right").at(
                            "location_accuracy")}}}};
    if (report.contains("ticks_per_second")) {
      summary["ticks_per_second"] = report.at("ticks_per_second");
    }
    std::cout << summary.dump() << '\n';
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("report missing fields: ") + e.what());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-camera driver hand-activity pipeline"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand("generate", "synthesize a manifest");
  std::string script_path, out_path;
  std::int64_t seed = -1;
  generate->add_option("--script", script_path, "scenario script")->required();
  generate->add_option("--out", out_path, "manifest output path")->required();
  generate->add_option("--seed", seed, "override the script seed");

  // run
  auto* run = app.add_subcommand("run", "replay a manifest end to end");
  std::string manifest_path, config_flag, backend = "scripted";
  std::string events_path, report_path;
  std::vector<std::string> overrides;
  double error_rate = 0.0;
  std::uint64_t noise_seed = 1;
  run->add_option("--manifest", manifest_path, "manifest JSONL")->required();
  run->add_option("--config", config_flag,
                  "config file (default: $SMART_HANDS_CONFIG)");
  run->add_option("--set", overrides, "config override key=value");
  run->add_option("--backend", backend, "scripted|noisy");
  run->add_option("--error-rate", error_rate,
                  "label-noise rate for the noisy backend");
  run->add_option("--noise-seed", noise_seed, "noise RNG seed");
  run->add_option("--events", events_path, "alert events JSONL output");
  run->add_option("--report", report_path, "run report JSON output");

  // eval-matrix
  auto* eval_matrix =
      app.add_subcommand("eval-matrix", "score a confusion matrix CSV");
  std::string csv_path;
  eval_matrix->add_option("--csv", csv_path, "matrix CSV")->required();

  // throughput
  auto* throughput =
      app.add_subcommand("throughput", "compose per-stage rates");
  std::string rates_csv, mode = "sequential";
  throughput->add_option("--rates", rates_csv, "comma-separated fps list")
      ->required();
  throughput->add_option("--mode", mode, "sequential|pipelined");

  // impact
  auto* impact = app.add_subcommand("impact", "fleet impact arithmetic");
  std::int64_t equipped = 0, fleet = 0, accidents = 0;
  double fraction = 0.0;
  impact->add_option("--equipped", equipped, "equipped vehicles")->required();
  impact->add_option("--fleet", fleet, "total fleet size")->required();
  impact->add_option("--accidents", accidents, "annual accident count")
      ->required();
  impact->add_option("--fraction", fraction, "effective reduction fraction")
      ->required();

  // report
  auto* report = app.add_subcommand("report", "summarize a run report");
  std::string report_in;
  report->add_option("--report", report_in, "run report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return kExitBadInput;
  }

  try {
    if (generate->parsed()) return cmd_generate(script_path, out_path, seed);
    if (run->parsed()) {
      return cmd_run(manifest_path, config_flag, overrides, backend,
                     error_rate, noise_seed, events_path, report_path);
    }
    if (eval_matrix->parsed()) return cmd_eval_matrix(csv_path);
    if (throughput->parsed()) return cmd_throughput(rates_csv, mode);
    if (impact->parsed()) {
      return cmd_impact(equipped, fleet, fraction, accidents);
    }
    if (report->parsed()) return cmd_report(report_in);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ManifestError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const EmptyMatrix& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const InsufficientData& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const NoGroundTruth& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadInput;
  } catch (const Error& e) {
    std::cerr << "pipeline error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "pipeline error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
