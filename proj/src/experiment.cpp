#include "fcs/experiment.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fcs/errors.hpp"
#include "fcs/fock_oracle.hpp"
#include "fcs/model_io.hpp"
#include "fcs/parallel.hpp"
#include "fcs/thermodynamic_limit.hpp"

namespace fcs {

namespace {

using nlohmann::json;

// --- formatting ------------------------------------------------------------

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
    append_row(header);
  }

  void append_row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_) {
      throw Error(ErrorKind::InvalidArgument, "CSV row width mismatch");
    }
    for (size_t i = 0; i < fields.size(); ++i) {
      if (i) body_ += ',';
      body_ += csv_quote(fields[i]);
    }
    body_ += "\r\n";
  }

  const std::string& str() const { return body_; }

 private:
  size_t columns_;
  std::string body_;
};

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error(ErrorKind::InvalidArgument, "cannot open " + tmp.string() + " for writing");
    }
    out << content;
    if (!out.good()) {
      throw Error(ErrorKind::InvalidArgument, "short write to " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

// --- config parsing ---------------------------------------------------------

const std::vector<std::string> kExperiments = {
    "chi",        "cumulants", "distribution", "two-circle",
    "noise-split", "sweep",    "diagnostics",  "oracle-check"};

void require_known_experiment(const std::string& name) {
  for (const auto& e : kExperiments) {
    if (e == name) return;
  }
  throw Error(ErrorKind::InvalidArgument, "experiment: unknown kind '" + name + "'");
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) return "nan";
  return std::string(buffer, ptr);
}

ExperimentConfig ExperimentConfig::parse(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "config must be a JSON object");
  ExperimentConfig cfg;

  if (!j.contains("experiment") || !j.at("experiment").is_string()) {
    throw Error(ErrorKind::InvalidArgument, "experiment: missing or not a string");
  }
  cfg.experiment = j.at("experiment").get<std::string>();
  require_known_experiment(cfg.experiment);

  int sources = 0;
  if (j.contains("model")) {
    cfg.inline_model = model_from_json(j.at("model"));
    ++sources;
  }
  if (j.contains("two_circle")) {
    cfg.two_circle = two_circle_spec_from_json(j.at("two_circle"));
    ++sources;
  }
  if (j.contains("random")) {
    const auto& r = j.at("random");
    RandomSource src;
    if (!r.contains("seed") || !r.at("seed").is_number_unsigned()) {
      throw Error(ErrorKind::InvalidArgument, "random.seed: missing or not an unsigned integer");
    }
    src.seed = r.at("seed").get<std::uint64_t>();
    if (!r.contains("dim") || !r.at("dim").is_number_integer()) {
      throw Error(ErrorKind::InvalidArgument, "random.dim: missing or not an integer");
    }
    src.dim = r.at("dim").get<int>();
    src.kind = model_kind_from_string(
        r.value("kind", std::string("mixed-commuting")));
    cfg.random = src;
    ++sources;
  }

  const bool needs_model = cfg.experiment != "oracle-check";
  if (needs_model && sources != 1) {
    throw Error(ErrorKind::InvalidArgument,
                "model source: exactly one of 'model', 'two_circle', 'random' required");
  }
  if (!needs_model && sources != 0) {
    throw Error(ErrorKind::InvalidArgument, "oracle-check generates its own models; "
                                            "remove the model source");
  }

  if ((cfg.experiment == "two-circle" || cfg.experiment == "sweep") && !cfg.two_circle) {
    throw Error(ErrorKind::InvalidArgument,
                "two_circle: experiment '" + cfg.experiment + "' needs a two_circle source");
  }

  if (j.contains("beta")) {
    if (!j.at("beta").is_number()) {
      throw Error(ErrorKind::InvalidArgument, "beta: not a number");
    }
    cfg.beta = j.at("beta").get<double>();
    if (!cfg.two_circle) {
      throw Error(ErrorKind::InvalidArgument, "beta: only meaningful with a two_circle source");
    }
  }

  if (j.contains("variant")) {
    if (!j.at("variant").is_string()) {
      throw Error(ErrorKind::InvalidArgument, "variant: not a string");
    }
    cfg.variant = chi_variant_from_string(j.at("variant").get<std::string>());
    if (cfg.experiment == "noise-split" || cfg.experiment == "diagnostics" ||
        cfg.experiment == "sweep" || cfg.experiment == "oracle-check") {
      throw Error(ErrorKind::InvalidArgument,
                  "variant: not applicable to experiment '" + cfg.experiment + "'");
    }
  }

  if (j.contains("grid_size")) {
    if (!j.at("grid_size").is_number_integer()) {
      throw Error(ErrorKind::InvalidArgument, "grid_size: not an integer");
    }
    cfg.grid_size = j.at("grid_size").get<int>();
    if (cfg.grid_size < 2) throw Error(ErrorKind::InvalidArgument, "grid_size: must be >= 2");
  }

  if (j.contains("k_max")) {
    if (!j.at("k_max").is_number_integer()) {
      throw Error(ErrorKind::InvalidArgument, "k_max: not an integer");
    }
    cfg.k_max = j.at("k_max").get<int>();
    if (cfg.k_max < 1 || cfg.k_max > kMaxCumulantOrder) {
      throw Error(ErrorKind::InvalidArgument, "k_max: must lie in [1, 6]");
    }
  }

  if (j.contains("cutoffs")) {
    if (!j.at("cutoffs").is_array() || j.at("cutoffs").empty()) {
      throw Error(ErrorKind::InvalidArgument, "cutoffs: must be a non-empty array");
    }
    for (const auto& c : j.at("cutoffs")) {
      if (!c.is_number()) throw Error(ErrorKind::InvalidArgument, "cutoffs: entries must be numbers");
      cfg.cutoffs.push_back(c.get<double>());
    }
  } else if (cfg.experiment == "sweep") {
    throw Error(ErrorKind::InvalidArgument, "cutoffs: required for the sweep experiment");
  }

  if (j.contains("lambda_probes")) {
    for (const auto& c : j.at("lambda_probes")) {
      if (!c.is_number()) {
        throw Error(ErrorKind::InvalidArgument, "lambda_probes: entries must be numbers");
      }
      cfg.lambda_probes.push_back(c.get<double>());
    }
  }

  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      throw Error(ErrorKind::InvalidArgument, "seed: not an unsigned integer");
    }
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("count")) {
    cfg.count = j.at("count").get<int>();
    if (cfg.count < 1) throw Error(ErrorKind::InvalidArgument, "count: must be >= 1");
  }
  if (j.contains("max_dim")) {
    cfg.max_dim = j.at("max_dim").get<int>();
    if (cfg.max_dim < 2 || cfg.max_dim > fock::kMaxOracleDim) {
      throw Error(ErrorKind::InvalidArgument, "max_dim: must lie in [2, 12]");
    }
  }

  cfg.output_stem = j.value("output", cfg.experiment);
  if (cfg.output_stem.empty() ||
      cfg.output_stem.find_first_of("/\\") != std::string::npos) {
    throw Error(ErrorKind::InvalidArgument, "output: must be a bare file stem");
  }

  if (j.contains("threads")) {
    cfg.threads = j.at("threads").get<int>();
    if (cfg.threads < 0) throw Error(ErrorKind::InvalidArgument, "threads: must be >= 0");
  }

  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    throw Error(ErrorKind::InvalidArgument, "cannot read config " + config_path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  return parse(j);
}

namespace {

QuantumModel materialize_model(const ExperimentConfig& cfg) {
  if (cfg.inline_model) return *cfg.inline_model;
  if (cfg.two_circle) {
    return cfg.beta ? thermal_two_circle(*cfg.two_circle, *cfg.beta)
                    : build_two_circle(*cfg.two_circle);
  }
  if (cfg.random) return random_model(cfg.random->seed, cfg.random->dim, cfg.random->kind);
  throw Error(ErrorKind::InvalidArgument, "model source: none present");
}

ChiVariant effective_variant(const ExperimentConfig& cfg) {
  if (cfg.variant) return *cfg.variant;
  return cfg.experiment == "two-circle" ? ChiVariant::Regularized : ChiVariant::LesLev;
}

std::string chi_csv(const ChiSamples& samples) {
  CsvWriter csv({"lambda", "re_chi", "im_chi", "re_log_chi", "im_log_chi"});
  for (int k = 0; k < samples.grid_size(); ++k) {
    const size_t i = static_cast<size_t>(k);
    csv.append_row({format_double(samples.lambdas[i]), format_double(samples.values[i].real()),
                    format_double(samples.values[i].imag()),
                    format_double(samples.log_values[i].real()),
                    format_double(samples.log_values[i].imag())});
  }
  return csv.str();
}

std::string distribution_csv(const CountingDistribution& dist) {
  CsvWriter csv({"n", "p_n", "quasi_flag"});
  for (int n = dist.n_min; n <= dist.n_max(); ++n) {
    csv.append_row({std::to_string(n), format_double(dist.at(n)),
                    dist.quasiprobability ? "1" : "0"});
  }
  return csv.str();
}

json base_summary(const ExperimentConfig& cfg) {
  json j{{"fcs-schema", kSchemaVersion}, {"experiment", cfg.experiment}};
  if (cfg.random) {
    j["random"] = {{"seed", cfg.random->seed},
                   {"dim", cfg.random->dim},
                   {"kind", model_kind_name(cfg.random->kind)}};
  }
  if (cfg.two_circle) j["two_circle"] = two_circle_spec_to_json(*cfg.two_circle);
  if (cfg.beta) j["beta"] = *cfg.beta;
  return j;
}

struct Artifacts {
  std::vector<std::filesystem::path> paths;
  std::string summary_line;

  void add(const std::filesystem::path& dir, const std::string& name,
           const std::string& content) {
    std::filesystem::path p = dir / name;
    write_atomic(p, content);
    paths.push_back(std::move(p));
  }
};

void run_chi(const ExperimentConfig& cfg, const std::filesystem::path& dir, Artifacts& out) {
  const QuantumModel model = materialize_model(cfg);
  const ChiVariant variant = effective_variant(cfg);
  const ChiSamples samples = sample_chi(model, variant, cfg.grid_size);

  json summary = base_summary(cfg);
  summary["variant"] = chi_variant_name(variant);
  summary["grid_size"] = cfg.grid_size;
  summary["dim"] = model.dim;

  out.add(dir, cfg.output_stem + ".csv", chi_csv(samples));
  out.add(dir, cfg.output_stem + ".json", dump_json(summary));
  out.summary_line = "chi(" + std::string(chi_variant_name(variant)) + ") on " +
                     std::to_string(cfg.grid_size) + " grid points, dim " +
                     std::to_string(model.dim);
}

void run_cumulants(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                   Artifacts& out) {
  const QuantumModel model = materialize_model(cfg);
  const ChiVariant variant = effective_variant(cfg);
  const CumulantVector kappa = cumulants(model, variant, cfg.k_max);

  json summary = base_summary(cfg);
  summary["variant"] = chi_variant_name(variant);
  summary["k_max"] = cfg.k_max;
  summary["method"] = cumulant_method_name(kappa.method);
  summary["cumulants"] = kappa.values;

  out.add(dir, cfg.output_stem + ".json", dump_json(summary));
  std::ostringstream line;
  line << "cumulants k=1.." << cfg.k_max << ":";
  for (double v : kappa.values) line << ' ' << format_double(v);
  out.summary_line = line.str();
}

void run_distribution(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                      Artifacts& out) {
  const QuantumModel model = materialize_model(cfg);
  const ChiVariant variant = effective_variant(cfg);
  // The spin protocol transfers half-integer charges on non-commuting
  // states; its lattice index counts half charges.
  const bool half_units = variant == ChiVariant::SpinCoupling;
  const CountingDistribution dist =
      half_units ? spin_coupling_quasiprobability(model, cfg.grid_size)
                 : distribution_from_chi(sample_chi(model, variant, cfg.grid_size));

  json summary = base_summary(cfg);
  summary["variant"] = chi_variant_name(variant);
  summary["charge_unit"] = half_units ? 0.5 : 1.0;
  summary["n_min"] = dist.n_min;
  summary["n_max"] = dist.n_max();
  summary["total"] = dist.total();
  summary["max_imag_residual"] = dist.max_imag_residual;
  summary["quasiprobability"] = dist.quasiprobability;

  out.add(dir, cfg.output_stem + ".csv", distribution_csv(dist));
  out.add(dir, cfg.output_stem + ".json", dump_json(summary));
  out.summary_line = "distribution over n in [" + std::to_string(dist.n_min) + ", " +
                     std::to_string(dist.n_max()) + "]" +
                     (dist.quasiprobability ? " (quasiprobability)" : "");
}

void run_two_circle(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                    Artifacts& out) {
  const TwoCircleSpec& spec = *cfg.two_circle;
  const QuantumModel model = materialize_model(cfg);
  const ChiVariant variant = effective_variant(cfg);
  const ChiSamples samples = sample_chi(model, variant, cfg.grid_size);
  const MeanCharge mean = mean_charge(model);
  const int window = two_circle_window_count(spec);

  json summary = base_summary(cfg);
  summary["variant"] = chi_variant_name(variant);
  summary["dim"] = model.dim;
  summary["window_count"] = window;
  summary["conductance"] = spec.conductance();
  summary["bias"] = spec.bias();
  summary["mean_charge"] = {{"naive", mean.naive}, {"regularized", mean.regularized}};

  if (!cfg.beta) {
    // Zero temperature: chi must coincide with the binomial closed form.
    double max_dev = 0.0;
    for (int k = 0; k < samples.grid_size(); ++k) {
      const Complex expected =
          binomial_chi(spec.s.transmission(), window, samples.lambdas[static_cast<size_t>(k)]);
      max_dev = std::max(max_dev, std::abs(expected - samples.values[static_cast<size_t>(k)]));
    }
    summary["binomial_max_deviation"] = max_dev;
  }

  out.add(dir, cfg.output_stem + ".csv", chi_csv(samples));
  out.add(dir, cfg.output_stem + ".json", dump_json(summary));
  out.summary_line = "two-circle window N=" + std::to_string(window) + ", dim " +
                     std::to_string(model.dim);
}

void run_noise_split(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                     Artifacts& out) {
  const QuantumModel model = materialize_model(cfg);
  const NoiseSplit split = noise_split(model);
  const MeanCharge mean = mean_charge(model);

  json summary = base_summary(cfg);
  summary["dim"] = model.dim;
  summary["thermal"] = split.thermal;
  summary["shot"] = split.shot;
  summary["sum"] = split.total();
  summary["kappa2_trace"] = second_cumulant_trace(model);
  summary["mean_charge"] = {{"naive", mean.naive}, {"regularized", mean.regularized}};

  out.add(dir, cfg.output_stem + ".json", dump_json(summary));
  out.summary_line = "noise split: thermal " + format_double(split.thermal) + ", shot " +
                     format_double(split.shot);
}

void run_sweep(const ExperimentConfig& cfg, const std::filesystem::path& dir, Artifacts& out) {
  const std::vector<double>& probes =
      cfg.lambda_probes.empty() ? kDefaultLambdaProbes : cfg.lambda_probes;
  const SweepReport report = cutoff_sweep(*cfg.two_circle, cfg.beta, cfg.cutoffs, probes);

  std::vector<std::string> header = {"cutoff",        "dim",
                                     "tr_rho_q",      "tr_compensation",
                                     "identity_deviation", "d_rho",
                                     "d_sqrt",        "d_mix",
                                     "d_noise"};
  for (size_t p = 0; p < probes.size(); ++p) {
    header.push_back("re_chi_reg_" + std::to_string(p));
    header.push_back("im_chi_reg_" + std::to_string(p));
    header.push_back("re_chi_naive_" + std::to_string(p));
    header.push_back("im_chi_naive_" + std::to_string(p));
  }
  CsvWriter csv(header);
  json records = json::array();
  for (const SweepRecord& rec : report.records) {
    std::vector<std::string> row = {
        format_double(rec.cutoff),          std::to_string(rec.dim),
        format_double(rec.tr_rho_q),        format_double(rec.tr_compensation),
        format_double(rec.identity_deviation), format_double(rec.diagnostics.d_rho),
        format_double(rec.diagnostics.d_sqrt), format_double(rec.diagnostics.d_mix),
        format_double(rec.diagnostics.d_noise)};
    json jrec{{"cutoff", rec.cutoff},
              {"dim", rec.dim},
              {"tr_rho_q", rec.tr_rho_q},
              {"tr_compensation", rec.tr_compensation},
              {"identity_deviation", rec.identity_deviation},
              {"d_rho", rec.diagnostics.d_rho},
              {"d_sqrt", rec.diagnostics.d_sqrt},
              {"d_mix", rec.diagnostics.d_mix},
              {"d_noise", rec.diagnostics.d_noise}};
    json chi_reg = json::array();
    json chi_naive = json::array();
    for (size_t p = 0; p < probes.size(); ++p) {
      row.push_back(format_double(rec.chi_regularized[p].real()));
      row.push_back(format_double(rec.chi_regularized[p].imag()));
      row.push_back(format_double(rec.chi_naive[p].real()));
      row.push_back(format_double(rec.chi_naive[p].imag()));
      chi_reg.push_back({rec.chi_regularized[p].real(), rec.chi_regularized[p].imag()});
      chi_naive.push_back({rec.chi_naive[p].real(), rec.chi_naive[p].imag()});
    }
    jrec["chi_regularized"] = std::move(chi_reg);
    jrec["chi_naive"] = std::move(chi_naive);
    records.push_back(std::move(jrec));
    csv.append_row(row);
  }

  json summary = base_summary(cfg);
  summary["lambda_probes"] = probes;
  summary["records"] = std::move(records);
  summary["max_chi_regularized_drift"] = report.max_chi_regularized_drift();

  out.add(dir, cfg.output_stem + ".csv", csv.str());
  out.add(dir, cfg.output_stem + ".json", dump_json(summary));
  out.summary_line = "sweep over " + std::to_string(cfg.cutoffs.size()) + " cutoffs, drift " +
                     format_double(report.max_chi_regularized_drift());
}

void run_diagnostics(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                     Artifacts& out) {
  const QuantumModel model = materialize_model(cfg);
  const ValidationReport report = validate(model);
  const TraceClassDiagnostics diag = trace_class_diagnostics(model);

  json summary = base_summary(cfg);
  summary["dim"] = model.dim;
  summary["validation"] = {{"unitarity_residual", report.unitarity_residual},
                           {"rho_min_eigenvalue", report.rho_min_eigenvalue},
                           {"rho_max_eigenvalue", report.rho_max_eigenvalue},
                           {"q_hermiticity_residual", report.q_hermiticity_residual},
                           {"q_projection_residual", report.q_projection_residual},
                           {"commutator_norm", report.commutator_norm},
                           {"purity_residual", report.purity_residual},
                           {"all_ok", report.all_ok()}};
  summary["trace_class"] = {{"d_rho", diag.d_rho},
                            {"d_sqrt", diag.d_sqrt},
                            {"d_mix", diag.d_mix},
                            {"d_noise", diag.d_noise}};

  out.add(dir, cfg.output_stem + ".json", dump_json(summary));
  out.summary_line = "diagnostics: " + report.summary();
}

void run_oracle_check(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                      Artifacts& out) {
  constexpr int kGrid = 32;
  double max_dev = 0.0;
  for (int i = 0; i < cfg.count; ++i) {
    const int dim = 2 + i % (cfg.max_dim - 1);
    const ModelKind kind = (i % 2 == 0) ? ModelKind::MixedCommuting : ModelKind::PureCommuting;
    const QuantumModel model = random_model(cfg.seed + static_cast<std::uint64_t>(i), dim, kind);
    ChiEvaluator eval(model, ChiVariant::LesLev);
    for (int k = 0; k < kGrid; ++k) {
      const double lam = kTwoPi * k / kGrid;
      max_dev = std::max(max_dev, std::abs(eval(lam) - fock::chi_oracle(model, lam)));
    }
  }
  const bool pass = max_dev <= 1e-9;

  json summary = base_summary(cfg);
  summary["seed"] = cfg.seed;
  summary["count"] = cfg.count;
  summary["max_dim"] = cfg.max_dim;
  summary["grid_size"] = kGrid;
  summary["max_deviation"] = max_dev;
  summary["tolerance"] = 1e-9;
  summary["pass"] = pass;

  out.add(dir, cfg.output_stem + ".json", dump_json(summary));
  out.summary_line = std::string("oracle check: max deviation ") + format_double(max_dev) +
                     (pass ? " <= 1e-9" : " EXCEEDS 1e-9");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::filesystem::path& out_dir) {
  if (cfg.threads > 0) set_num_threads(cfg.threads);
  std::filesystem::create_directories(out_dir);

  Artifacts artifacts;
  if (cfg.experiment == "chi") {
    run_chi(cfg, out_dir, artifacts);
  } else if (cfg.experiment == "cumulants") {
    run_cumulants(cfg, out_dir, artifacts);
  } else if (cfg.experiment == "distribution") {
    run_distribution(cfg, out_dir, artifacts);
  } else if (cfg.experiment == "two-circle") {
    run_two_circle(cfg, out_dir, artifacts);
  } else if (cfg.experiment == "noise-split") {
    run_noise_split(cfg, out_dir, artifacts);
  } else if (cfg.experiment == "sweep") {
    run_sweep(cfg, out_dir, artifacts);
  } else if (cfg.experiment == "diagnostics") {
    run_diagnostics(cfg, out_dir, artifacts);
  } else if (cfg.experiment == "oracle-check") {
    run_oracle_check(cfg, out_dir, artifacts);
  } else {
    throw Error(ErrorKind::InvalidArgument, "experiment: unknown kind '" + cfg.experiment + "'");
  }

  ExperimentResult result;
  result.artifacts = std::move(artifacts.paths);
  result.summary_line = std::move(artifacts.summary_line);
  return result;
}

}  // namespace fcs
