// Command-line front end over the C API. Subcommands: generate, run, sweep,
// report, print-config. Exit codes: 0 success, 1 validation failure, 2 I/O
// failure.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cptc/cptc.h"

namespace {

int status_to_exit(cptc_status status) {
  switch (status) {
    case CPTC_OK:
      return 0;
    case CPTC_E_IO:
      return 2;
    default:
      return 1;
  }
}

int report_failure(cptc_status status) {
  std::cerr << "error: " << cptc_last_error() << "\n";
  return status_to_exit(status);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Applies --seed on top of the config file: the dataset seed for generate,
// the seed list for run/sweep.
std::optional<std::string> override_seed(const std::string& config_text,
                                         std::optional<std::uint64_t> seed,
                                         bool generate) {
  if (!seed) return config_text;
  nlohmann::json root =
      nlohmann::json::parse(config_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded() || !root.is_object()) {
    return std::nullopt;  // let the library report the parse error
  }
  if (generate) {
    if (!root.contains("dataset") || !root["dataset"].is_object()) {
      root["dataset"] = nlohmann::json::object();
    }
    root["dataset"]["seed"] = *seed;
  } else {
    root["seeds"] = {*seed};
  }
  return root.dump();
}

struct StringGuard {
  char* value = nullptr;
  ~StringGuard() { cptc_string_free(value); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming conformal prediction with state-switching dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string param;
  std::string values;
  std::string dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  CLI::App* generate = app.add_subcommand("generate", "Write a synthetic CSV");
  generate->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  generate->add_option("--out", out_path, "Output CSV path")->required();
  generate->add_option("--seed", seed, "Override the generator seed");
  generate->add_flag("--quiet", quiet, "Suppress progress output");

  CLI::App* run = app.add_subcommand("run", "Run the configured experiment");
  run->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  run->add_option("--out", out_path, "Output directory")->required();
  run->add_option("--seed", seed, "Run a single seed instead of the list");
  run->add_flag("--quiet", quiet, "Suppress the summary on stdout");

  CLI::App* sweep = app.add_subcommand("sweep", "Re-run over parameter values");
  sweep->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  sweep->add_option("--param", param, "Parameter to sweep")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--out", out_path, "Output directory")->required();
  sweep->add_option("--seed", seed, "Run a single seed instead of the list");
  sweep->add_flag("--quiet", quiet, "Suppress the summary on stdout");

  CLI::App* report = app.add_subcommand(
      "report", "Recompute summaries from per-step CSVs");
  report->add_option("--dir", dir, "Directory with steps_*.csv files")
      ->required();
  report->add_flag("--quiet", quiet, "Suppress the summary on stdout");

  app.add_subcommand("print-config", "Print the default config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (app.got_subcommand("print-config")) {
    StringGuard text;
    cptc_status status = cptc_default_config(&text.value);
    if (status != CPTC_OK) return report_failure(status);
    std::cout << text.value;
    return 0;
  }

  if (app.got_subcommand("report")) {
    StringGuard summary;
    cptc_status status = cptc_report(dir.c_str(), &summary.value);
    if (status != CPTC_OK) return report_failure(status);
    if (!quiet) std::cout << summary.value;
    return 0;
  }

  auto config_text = read_file(config_path);
  if (!config_text) {
    std::cerr << "error: " << config_path << ": cannot open for reading\n";
    return 2;
  }
  auto effective =
      override_seed(*config_text, seed, app.got_subcommand("generate"));
  if (!effective) effective = config_text;

  if (app.got_subcommand("generate")) {
    cptc_status status = cptc_generate(effective->c_str(), out_path.c_str());
    if (status != CPTC_OK) return report_failure(status);
    if (!quiet) std::cout << "wrote " << out_path << "\n";
    return 0;
  }

  if (app.got_subcommand("run")) {
    StringGuard summary;
    cptc_status status =
        cptc_run(effective->c_str(), out_path.c_str(), &summary.value);
    if (status != CPTC_OK) return report_failure(status);
    if (!quiet) std::cout << summary.value;
    return 0;
  }

  StringGuard summary;
  cptc_status status = cptc_sweep(effective->c_str(), param.c_str(),
                                  values.c_str(), out_path.c_str(),
                                  &summary.value);
  if (status != CPTC_OK) return report_failure(status);
  if (!quiet) std::cout << summary.value;
  return 0;
}
