#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fcs/errors.hpp"
#include "fcs/experiment.hpp"
#include "fcs/parallel.hpp"

namespace {

/// One machine-readable record on stderr per failure.
void emit_error_record(const std::string& kind, const std::string& message) {
  nlohmann::json record{{"error", kind}, {"message", message}};
  std::cerr << record.dump() << "\n";
}

int run_config(const std::string& config_path, const std::string& out_dir, int threads,
               bool execute) {
  try {
    fcs::ExperimentConfig config = fcs::ExperimentConfig::load(config_path);
    if (threads > 0) config.threads = threads;
    if (!execute) {
      std::cout << "ok: " << config.experiment << "\n";
      return 0;
    }
    const fcs::ExperimentResult result = fcs::run_experiment(config, out_dir);
    std::cout << result.summary_line << "\n";
    for (const auto& path : result.artifacts) {
      std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
  } catch (const fcs::Error& e) {
    emit_error_record(fcs::error_kind_name(e.kind()), e.what());
    return fcs::is_numerical_failure(e.kind()) ? 3 : 2;
  } catch (const std::exception& e) {
    emit_error_record("InternalError", e.what());
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"full counting statistics of fermionic charge transport"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "output directory (default: current)");
  run->add_option("--threads", threads, "worker thread cap (0 = default)");

  CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  if (threads > 0) fcs::set_num_threads(threads);
  return run_config(config_path, out_dir, threads, run->parsed());
}
