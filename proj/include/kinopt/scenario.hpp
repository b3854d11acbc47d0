#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kinopt/analytics.hpp"
#include "kinopt/model.hpp"
#include "kinopt/trace.hpp"

namespace kinopt {

inline constexpr const char* kVersion = "0.1.0";

struct CompromiseConfig {
  /// constant | sznajd | bounded_confidence
  std::string kind = "constant";
  double gamma = 1.0;
  double delta = 2.0;
  bool operator==(const CompromiseConfig&) const = default;
};

struct WeightConfig {
  /// uniform | quadratic_floor (Q = max(floor, 1 - w^2))
  std::string kind = "uniform";
  double floor = 0.1;
  bool operator==(const WeightConfig&) const = default;
};

struct NoiseConfig {
  /// scaled (variance eps varsigma) | none | uniform (explicit half-width)
  std::string kind = "scaled";
  double half_width = 0.0;
  bool operator==(const NoiseConfig&) const = default;
};

struct ModelConfig {
  CompromiseConfig P;
  /// none | quadratic
  std::string D = "none";
  WeightConfig Q;
  NoiseConfig noise;
  /// base | noise_coupled | mean_control | agent_weighted (dsmc mode)
  std::string rule = "base";
  bool operator==(const ModelConfig&) const = default;
};

struct ControlConfig {
  double w_d = 0.0;
  std::optional<double> nu;
  std::optional<double> kappa;
  std::optional<ControlClamp> clamp;
  bool operator==(const ControlConfig&) const = default;
};

struct ScalingConfig {
  double epsilon = 0.01;
  double varsigma = 0.0;
  bool operator==(const ScalingConfig&) const = default;
};

struct InitialConfig {
  /// uniform (seeded) | grid (deterministic midpoints)
  std::string kind = "uniform";
  double lo = -1.0;
  double hi = 1.0;
  bool operator==(const InitialConfig&) const = default;
};

struct RunConfig {
  /// micro | dsmc | steady | moments
  std::string mode = "dsmc";
  /// Agents (micro) or Monte Carlo samples (dsmc).
  std::size_t samples = 0;
  double t_final = 0.0;
  /// Zero records every step.
  double record_dt = 0.0;
  /// Micro time step.
  double dt = 0.01;
  std::uint64_t seed = 0;
  std::size_t repetitions = 1;
  /// eta dt_mc for dsmc mode.
  double collision_probability = 1.0;
  InitialConfig initial;
  bool operator==(const RunConfig&) const = default;
};

struct OutputConfig {
  std::string path = "out";
  /// csv | json
  std::string format = "csv";
  std::size_t bins = 50;
  bool operator==(const OutputConfig&) const = default;
};

struct ScenarioConfig {
  ModelConfig model;
  ControlConfig control;
  ScalingConfig scaling;
  RunConfig run;
  OutputConfig output;
  bool operator==(const ScenarioConfig&) const = default;
};

/// Parses and validates a JSON scenario. Throws ConfigError with the dotted
/// field path and the line of the offending key.
ScenarioConfig parse_config(const std::string& text);

/// Full echo with every default spelled out; parse_config(to_json(c)) == c.
std::string to_json(const ScenarioConfig& config);

/// Built-in objects of the configured model.
CompromiseFunction make_compromise(const ScenarioConfig& config);
DiffusionFunction make_diffusion(const ScenarioConfig& config);
ControlWeight make_weight(const ScenarioConfig& config);

struct RunOverrides {
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

struct ScenarioOutcome {
  ScenarioConfig config;  // after overrides
  std::filesystem::path directory;
  /// Mean over repetitions; m_stderr filled when repetitions >= 2.
  MomentTrace trace;
  std::optional<Histogram> histogram;
  /// Final opinions of every repetition, concatenated (simulation modes only).
  std::vector<double> final_opinions;
  std::vector<std::string> files;
  double wall_seconds = 0.0;
};

/// Runs one scenario and writes its artifacts into the output directory.
ScenarioOutcome run_scenario(ScenarioConfig config, const RunOverrides& overrides = {});

/// A document is a single scenario, {"runs": [{"name", "config"}...]} or a
/// {"sweep": {...}} over kappa x w_d producing a mean-error table.
struct DocumentOutcome {
  std::vector<ScenarioOutcome> runs;
  std::vector<std::string> files;
};

/// Validates every scenario contained in a document without running it.
std::vector<ScenarioConfig> validate_document(const std::string& text);

DocumentOutcome run_document(const std::string& text, const RunOverrides& overrides = {});

/// Directory holding the shipped presets (KINOPT_PRESET_DIR, then the build-time
/// source path, then ./presets).
std::filesystem::path preset_directory();
std::vector<std::string> preset_names();
std::string load_preset(const std::string& name);

}  // namespace kinopt
