#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <string>

#include "CLI11.hpp"
#include "dissflow/dissflow.h"

namespace {

int list_presets() {
  for (size_t i = 0; i < dsf_preset_count(); ++i)
    std::cout << dsf_preset_name(i) << "\t" << dsf_preset_description(i) << "\n";
  return 0;
}

int print_preset(const std::string& name) {
  char* text = nullptr;
  if (dsf_preset_config(name.c_str(), &text) != DSF_OK) {
    std::cerr << "error: " << dsf_last_error() << "\n";
    return 1;
  }
  std::cout << text;
  dsf_string_free(text);
  return 0;
}

int print_tolerances() {
  for (size_t i = 0; i < dsf_tolerance_count(); ++i) {
    const char* name = nullptr;
    double value = 0.0;
    dsf_tolerance(i, &name, &value);
    std::printf("%s\t%.17g\n", name, value);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle simulator and verifier for dissipative velocity fields in Wasserstein space"};
  app.set_version_flag("--version", std::string(dsf_version()));

  std::string config_path;
  std::string preset;
  std::string show_preset;
  std::string out_dir;
  uint64_t seed = 0;
  bool quiet = false;
  bool list = false;
  bool tolerances = false;
  bool check_only = false;

  auto* config_opt = app.add_option("-c,--config", config_path, "Experiment config (JSON)")
                         ->check(CLI::ExistingFile);
  auto* preset_opt = app.add_option("-p,--preset", preset, "Run a built-in preset");
  config_opt->excludes(preset_opt);
  app.add_option("--show-preset", show_preset, "Print a preset config and exit");
  auto* seed_opt = app.add_option("-s,--seed", seed, "Override the config seed");
  app.add_option("-o,--out", out_dir, "Override the output directory");
  app.add_flag("-q,--quiet", quiet, "Suppress the summary on stdout");
  app.add_flag("--list-presets", list, "List built-in presets and exit");
  app.add_flag("--tolerances", tolerances, "Print the pinned tolerance table and exit");
  app.add_flag("--validate", check_only, "Validate the config and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (list) return list_presets();
  if (tolerances) return print_tolerances();
  if (!show_preset.empty()) return print_preset(show_preset);

  std::string config_text;
  if (!preset.empty()) {
    char* text = nullptr;
    if (dsf_preset_config(preset.c_str(), &text) != DSF_OK) {
      std::cerr << "error: " << dsf_last_error() << "\n";
      return 1;
    }
    config_text = text;
    dsf_string_free(text);
  } else if (config_path.empty()) {
    std::cerr << "error: one of --config or --preset is required\n" << app.help();
    return 1;
  }

  if (check_only) {
    int rc = DSF_OK;
    if (config_text.empty()) {
      std::ifstream in(config_path);
      config_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    rc = dsf_validate_config(config_text.c_str());
    if (rc != DSF_OK) {
      std::cerr << "error: " << dsf_last_error() << "\n";
      return 1;
    }
    if (!quiet) std::cout << "config ok\n";
    return 0;
  }

  dsf_run_options options{0, 0, nullptr};
  if (*seed_opt) {
    options.has_seed = 1;
    options.seed = seed;
  }
  if (!out_dir.empty()) options.output_dir = out_dir.c_str();

  dsf_run* run = nullptr;
  const int status = config_text.empty()
                         ? dsf_run_config_file(config_path.c_str(), &options, &run)
                         : dsf_run_config(config_text.c_str(), &options, &run);
  if (status != DSF_OK) {
    std::cerr << "error: " << dsf_last_error() << "\n";
    return 4;
  }

  const int code = dsf_run_exit_code(run);
  if (!quiet && *dsf_run_summary(run)) std::cout << dsf_run_summary(run) << "\n";
  if (code != 0) std::cerr << "exit " << code << ": " << dsf_run_message(run) << "\n";
  if (!quiet && code == 0) std::cerr << "outputs in " << dsf_run_output_dir(run) << "\n";
  dsf_run_free(run);
  return code;
}
