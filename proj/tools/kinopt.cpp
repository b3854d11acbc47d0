// kinopt: batch front-end for the opinion-control toolkit.
//
//   kinopt run <config> [--out DIR] [--seed N] [--workers K]
//   kinopt preset <name> [--out DIR] [--seed N] [--workers K]
//   kinopt validate <config>

#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kinopt/error.hpp"
#include "kinopt/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw kinopt::InvalidArgument("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Machine-readable failure record on stderr and, when a directory is known,
// in error.json.
int report(const std::string& kind, const std::string& message, const std::filesystem::path& dir,
           const kinopt::ConfigError* config_error = nullptr) {
  nlohmann::json j{{"status", "error"}, {"kind", kind}, {"message", message}};
  if (config_error) {
    j["field"] = config_error->field();
    j["line"] = config_error->line();
  }
  std::cerr << j.dump() << "\n";
  if (!dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / "error.json", std::ios::binary);
    if (out) out << j.dump(2) << "\n";
  }
  return config_error ? 2 : 1;
}

void print_summary(const kinopt::DocumentOutcome& outcome) {
  for (const auto& run : outcome.runs) {
    std::cout << run.directory.string() << ":";
    for (const auto& f : run.files) std::cout << " " << f;
    std::cout << "\n";
  }
  for (const auto& f : outcome.files) std::cout << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-predictive control of opinion dynamics: particle, kinetic and Fokker-Planck runs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::string out_dir;
  std::uint64_t seed = 0;
  int workers = 1;

  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory (overrides output.path)");
    cmd->add_option("--seed", seed, "Root seed (overrides run.seed)");
    cmd->add_option("--workers", workers, "Worker threads; results are reproducible for a fixed count")
        ->check(CLI::PositiveNumber);
  };

  auto* run = app.add_subcommand("run", "Run a scenario or multi-run document");
  run->add_option("config", config_path, "Scenario file (JSON)")->required();
  add_run_flags(run);

  auto* preset = app.add_subcommand("preset", "Run a shipped preset (fig1..fig5, table1, ...)");
  preset->add_option("name", preset_name, "Preset name")->required();
  add_run_flags(preset);
  bool list = false;
  auto* presets = app.add_subcommand("presets", "List the shipped presets");
  presets->add_flag("--list", list);

  auto* validate = app.add_subcommand("validate", "Validate a scenario without running it");
  validate->add_option("config", config_path, "Scenario file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  std::filesystem::path error_dir = out_dir;
  try {
    if (presets->parsed()) {
      for (const auto& n : kinopt::preset_names()) std::cout << n << "\n";
      return 0;
    }
    if (validate->parsed()) {
      const auto configs = kinopt::validate_document(read_file(config_path));
      std::cout << "ok: " << configs.size() << " scenario(s) valid\n";
      return 0;
    }

    kinopt::RunOverrides overrides;
    overrides.workers = workers;
    if (!out_dir.empty()) overrides.out = out_dir;
    if (run->count("--seed") || preset->count("--seed")) overrides.seed = seed;

    std::string text;
    if (run->parsed()) {
      text = read_file(config_path);
    } else {
      text = kinopt::load_preset(preset_name);
      if (!overrides.out) overrides.out = std::filesystem::path("out") / preset_name;
      error_dir = *overrides.out;
    }
    print_summary(kinopt::run_document(text, overrides));
    return 0;
  } catch (const kinopt::ConfigError& e) {
    return report(e.kind(), e.what(), error_dir, &e);
  } catch (const kinopt::Error& e) {
    return report(e.kind(), e.what(), error_dir);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), error_dir);
  }
}
