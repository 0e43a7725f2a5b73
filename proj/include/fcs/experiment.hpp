#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "fcs/counting_statistics.hpp"
#include "fcs/quantum_model.hpp"
#include "fcs/scattering_models.hpp"

namespace fcs {

inline constexpr int kSchemaVersion = 1;

/// One reproducible experiment, parsed from a single JSON document. The CLI
/// only selects the config path, the output directory and the thread count.
struct ExperimentConfig {
  std::string experiment;

  // Exactly one model source.
  std::optional<QuantumModel> inline_model;
  std::optional<TwoCircleSpec> two_circle;
  struct RandomSource {
    std::uint64_t seed = 1;
    int dim = 4;
    ModelKind kind = ModelKind::MixedCommuting;
  };
  std::optional<RandomSource> random;

  std::optional<double> beta;  // thermal two-circle occupations when set
  std::optional<ChiVariant> variant;
  int grid_size = 64;
  int k_max = 4;
  std::vector<double> cutoffs;        // sweep
  std::vector<double> lambda_probes;  // sweep (defaults when empty)

  // oracle-check
  std::uint64_t seed = 1;
  int count = 100;
  int max_dim = 8;

  std::string output_stem;  // defaults to the experiment name
  int threads = 0;

  static ExperimentConfig parse(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& config_path);
};

struct ExperimentResult {
  std::vector<std::filesystem::path> artifacts;
  std::string summary_line;  // one human-readable line for the console
};

/// Runs the experiment and writes its artifacts atomically under out_dir.
/// Identical configs produce byte-identical artifacts.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::filesystem::path& out_dir);

/// Shortest decimal form that round-trips the double exactly.
std::string format_double(double value);

}  // namespace fcs
