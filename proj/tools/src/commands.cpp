#include "pcadb_cli/commands.hpp"

#include "pcadb/errors.hpp"
#include "pcadb/replicate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace pcadb::cli {

namespace {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format;
  std::optional<int> jobs;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path + "'");
  return ss.str();
}

// Output sink: a file when a path is given, otherwise `fallback`.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : path_(path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
      if (!*file_) throw IoError("cannot open '" + path + "' for writing");
    }
    stream_ = file_ ? file_.get() : &fallback;
  }
  std::ostream& stream() { return *stream_; }
  void finish() {
    stream_->flush();
    if (!*stream_) throw IoError("error while writing '" + (path_.empty() ? "<stdout>" : path_) + "'");
  }

 private:
  std::string path_;
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

int resolve_jobs(const CommonOptions& opts, int config_jobs) {
  if (opts.jobs) {
    if (*opts.jobs < 1) throw ConfigError("--jobs must be >= 1", "jobs", 0);
    return *opts.jobs;
  }
  if (const char* env = std::getenv("PCA_DEBIAS_JOBS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1 || v > 4096) {
      throw ConfigError(std::string("PCA_DEBIAS_JOBS must be a positive integer (got '") + env + "')",
                        "PCA_DEBIAS_JOBS", 0);
    }
    return static_cast<int>(v);
  }
  return config_jobs;
}

RunConfig load_config(const CommonOptions& opts) {
  if (opts.config.empty()) throw ConfigError("--config is required", "config", 0);
  RunConfig cfg = parse_config(read_file(opts.config));
  if (opts.seed) {
    for (auto& s : cfg.scenarios) s.master_seed = *opts.seed;
  }
  if (!opts.out.empty()) cfg.output = opts.out;
  if (!opts.format.empty()) cfg.format = parse_format(opts.format);
  cfg.jobs = resolve_jobs(opts, cfg.jobs);
  if (opts.quiet) cfg.verbosity = 0;
  return cfg;
}

Format output_format(const CommonOptions& opts) {
  return opts.format.empty() ? Format::kCsv : parse_format(opts.format);
}

Matrix read_data_csv(const std::string& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
      if (used == 0 || used != cell.size()) {
        throw ValidationError("data line " + std::to_string(lineno) + ": cannot parse '" + cell + "'");
      }
      if (!std::isfinite(v)) {
        throw ValidationError("data line " + std::to_string(lineno) + ": non-finite entry");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError("data line " + std::to_string(lineno) + ": expected " +
                            std::to_string(rows.front().size()) + " columns, found " +
                            std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError("data file has no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--config", opts.config, "YAML run configuration");
  cmd->add_option("--seed", opts.seed, "Override every scenario's master seed");
  cmd->add_option("--out", opts.out, "Output path (stdout when absent)");
  cmd->add_option("--format", opts.format, "csv or json");
  cmd->add_option("--jobs", opts.jobs, "Concurrent replicates (fallback: PCA_DEBIAS_JOBS)");
  cmd->add_flag("--quiet", opts.quiet, "Suppress progress output");
}

int cmd_simulate(const CommonOptions& opts, const std::string& replicates_path, std::ostream& out,
                 std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  Sink sink(cfg.output.value_or(""), out);
  std::unique_ptr<Sink> reps;
  if (!replicates_path.empty()) reps = std::make_unique<Sink>(replicates_path, out);
  const int code = dispatch(cfg, sink.stream(), reps ? &reps->stream() : nullptr, err);
  sink.finish();
  if (reps) reps->finish();
  return code;
}

struct EstimateOptions {
  std::string data;
  int r = 1;
  std::string u;
  double tau = kDefaultTau;
  std::optional<int> m;
  double alpha = 0.05;
  std::string estimator = "debiased";
};

int cmd_estimate(const CommonOptions& opts, const EstimateOptions& eo, std::ostream& out) {
  const Format format = output_format(opts);
  if (eo.data.empty()) throw ConfigError("--data is required", "data", 0);
  if (eo.u.empty()) throw ConfigError("--u is required", "u", 0);
  if (eo.estimator != "plugin" && eo.estimator != "debiased") {
    throw ConfigError("--estimator must be plugin or debiased", "estimator", 0);
  }
  FunctionalSpec fs;
  try {
    fs = parse_functional(eo.u);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), "u", 0);
  }
  if (!fs.named.empty() && fs.named[0] != 'e') {
    throw ConfigError("--u must be coordinates or e<k> (population eigenvectors are unknown)", "u", 0);
  }
  Matrix data;
  try {
    data = read_data_csv(eo.data);
  } catch (const ValidationError& e) {
    throw ConfigError(e.what(), "data", 0);
  }
  const SampleSet samples = sample_set_from_rows(std::move(data));
  Vector u;
  if (fs.named.empty()) {
    if (static_cast<int>(fs.coords.size()) != samples.dim) {
      throw ConfigError("--u has " + std::to_string(fs.coords.size()) + " coordinates, data has " +
                            std::to_string(samples.dim) + " columns",
                        "u", 0);
    }
    u = Eigen::Map<const Vector>(fs.coords.data(), samples.dim);
  } else {
    const int k = std::stoi(fs.named.substr(1));
    if (k < 1 || k > samples.dim) throw ConfigError("--u " + fs.named + " exceeds the data dimension", "u", 0);
    u = Vector::Unit(samples.dim, k - 1);
  }

  EstimateRecord rec;
  rec.estimator = eo.estimator;
  rec.n = samples.n;
  rec.dim = samples.dim;
  rec.r = eo.r;
  rec.alpha = eo.alpha;
  rec.tau = eo.tau;
  Sink sink(opts.out, out);
  if (eo.estimator == "debiased") {
    const DebiasedEstimate de = debiased_estimate(samples, eo.r, eo.tau, u, eo.m);
    rec.value = de.value;
    rec.sigma_hat = de.sigma_hat;
    rec.d_check = de.d_check;
    rec.n_prime = de.n_prime;
    rec.m = de.m;
    rec.r_hat = de.r_hat;
    rec.clamped = de.clamped;
    rec.floor_engaged = de.floor_engaged;
  } else {
    const SpectralDecomposition dec = decompose(sample_covariance(samples));
    const PluginEstimate pe = plugin_estimate(dec, eo.r, eo.tau, u);
    rec.value = pe.value;
    rec.delta = pe.delta;
    rec.sigma_hat = std::sqrt(std::max(variance_true(dec, eo.r, u), 0.0));
  }
  rec.ci = confidence_interval(rec.value, rec.sigma_hat, rec.n, eo.alpha);
  write_estimate(sink.stream(), format, rec);
  sink.finish();
  return kExitOk;
}

struct BiasOptions {
  std::vector<double> ranks;
  int oracle_reps = 1000;
  int estimator_reps = 0;
};

int cmd_bias_curve(const CommonOptions& opts, const BiasOptions& bo, std::ostream& out,
                   std::ostream& err) {
  const RunConfig cfg = load_config(opts);
  if (bo.ranks.empty()) throw ConfigError("--ranks needs at least one effective rank", "ranks", 0);
  if (bo.oracle_reps < 2) throw ConfigError("--oracle-reps must be >= 2", "oracle-reps", 0);
  if (bo.estimator_reps != 0 && bo.estimator_reps < 2) {
    throw ConfigError("--estimator-reps must be 0 or >= 2", "estimator-reps", 0);
  }
  const Scenario& base = cfg.scenarios.front();
  if (!std::holds_alternative<Prop32Spec>(base.model)) {
    throw ConfigError("bias-curve needs a prop32 model in the first scenario", "model", 0);
  }
  Sink sink(cfg.output.value_or(""), out);
  set_default_jobs(cfg.jobs);
  const auto curve = bias_sweep(base, bo.ranks, {bo.oracle_reps, bo.estimator_reps}, cfg.jobs);
  if (cfg.verbosity > 0) err << "bias-curve: " << curve.size() << " points\n";
  write_bias_curve(sink.stream(), cfg.format, curve);
  sink.finish();
  return kExitOk;
}

struct LowerBoundOptions {
  double c = 10.0;
  std::optional<double> n;
  std::optional<double> class_a;
  std::optional<double> class_sigma0;
  bool no_enforce = false;
  bool integral = false;
};

int cmd_lowerbound(const CommonOptions& opts, const LowerBoundOptions& lo, std::ostream& out) {
  const RunConfig cfg = load_config(opts);
  const Scenario& s = cfg.scenarios.front();
  if (lo.class_a.has_value() != lo.class_sigma0.has_value()) {
    throw ConfigError("--class-a and --class-sigma0 go together", "class-a", 0);
  }
  CovarianceModel model;
  Vector u;
  try {
    model = make_model(s.model);
    u = resolve_functional(s.u, model.dec());
  } catch (const Error& e) {
    throw ScenarioError(std::string("lowerbound: ") + e.what());
  }
  VanTreesOptions vo;
  vo.enforce_admissibility = !lo.no_enforce;
  if (lo.class_a) vo.class_constants = ClassConstants{*lo.class_a, *lo.class_sigma0};
  LowerBoundRecord rec;
  rec.n = lo.n.value_or(static_cast<double>(s.n));
  rec.c = lo.c;
  rec.result = van_trees_bound(model, s.r, u, rec.n, rec.c, vo);
  if (lo.integral) rec.integral_bound = van_trees_integral_bound(model, s.r, u, rec.n, rec.c);
  Sink sink(cfg.output.value_or(""), out);
  write_lowerbound(sink.stream(), cfg.format, rec);
  sink.finish();
  return kExitOk;
}

int cmd_selftest(const CommonOptions& opts, std::ostream& out) {
  Sink sink(opts.out, out);
  bool all = true;
  for (const auto& c : run_selftest()) {
    sink.stream() << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    all = all && c.passed;
  }
  sink.finish();
  return all ? kExitOk : kExitRuntime;
}

}  // namespace

void emit_error(std::ostream& err, const std::string& kind, const std::string& message, int code,
                const std::string& key, int line) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  if (!key.empty()) j["key"] = key;
  if (line > 0) j["line"] = line;
  j["exit_code"] = code;
  err << j.dump() << '\n';
}

int dispatch(const RunConfig& cfg, std::ostream& out, std::ostream* replicates, std::ostream& log) {
  set_default_jobs(cfg.jobs);
  std::vector<ScenarioOutcome> outcomes;
  bool failed = false;
  bool first_replicates = true;
  for (const auto& s : cfg.scenarios) {
    ScenarioOutcome o;
    o.scenario = s;
    const auto start = std::chrono::steady_clock::now();
    try {
      const std::vector<ReplicateResult> results = run_replicates(s, cfg.jobs);
      o.report = summarize(s, results);
      o.report->wall_time =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (replicates != nullptr) {
        write_replicates_csv(*replicates, s.name, results, first_replicates);
        first_replicates = false;
      }
      if (cfg.verbosity > 0) {
        const SummaryReport& r = *o.report;
        log << "scenario " << s.name << ": " << r.reps << " reps, " << r.failures << " failures, mean m "
            << r.mean_m << " (true r(Sigma) " << r.effective_rank << "), " << r.wall_time << " s\n";
        for (const auto& w : r.warnings) log << "warning: " << s.name << ": " << w << '\n';
      }
    } catch (const Error& e) {
      o.error = e.what();
      failed = true;
      emit_error(log, "scenario", std::string(e.what()), kExitRuntime, s.name);
    }
    outcomes.push_back(std::move(o));
  }
  write_summaries(out, cfg.format, outcomes);
  return failed ? kExitRuntime : kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Debiased estimation of linear functionals of principal components", "pca-debias"};
  app.require_subcommand(1);
  CommonOptions opts;
  std::string replicates_path;
  EstimateOptions eo;
  BiasOptions bo;
  LowerBoundOptions lo;

  auto* simulate = app.add_subcommand("simulate", "Run the scenarios of a configuration");
  add_common(simulate, opts);
  simulate->add_option("--replicates", replicates_path, "Also write per-replicate CSV here");

  auto* estimate = app.add_subcommand("estimate", "Estimate <theta_r, u> from a headerless CSV data file");
  add_common(estimate, opts);
  estimate->add_option("--data", eo.data, "n x d CSV, one observation per row");
  estimate->add_option("--r", eo.r, "Target rank");
  estimate->add_option("--u", eo.u, "Functional: e<k> or comma separated coordinates");
  estimate->add_option("--tau", eo.tau, "delta = tau * ||Sigma_hat||");
  estimate->add_option("--m", eo.m, "Split block size override");
  estimate->add_option("--alpha", eo.alpha, "Interval level 1 - alpha");
  estimate->add_option("--estimator", eo.estimator, "plugin or debiased");

  auto* bias = app.add_subcommand("bias-curve", "Sweep b_r over effective ranks (prop32 model)");
  add_common(bias, opts);
  bias->add_option("--ranks", bo.ranks, "Effective ranks")->delimiter(',');
  bias->add_option("--oracle-reps", bo.oracle_reps, "Replicates per bias estimate");
  bias->add_option("--estimator-reps", bo.estimator_reps, "Replicates for plug-in/debiased runs (0 skips)");

  auto* lower = app.add_subcommand("lowerbound", "Evaluate the van Trees bound for the first scenario");
  add_common(lower, opts);
  lower->add_option("--c", lo.c, "Prior half-width");
  lower->add_option("--n", lo.n, "Sample size (default: scenario n)");
  lower->add_option("--class-a", lo.class_a, "Class constant a");
  lower->add_option("--class-sigma0", lo.class_sigma0, "Class constant sigma0");
  lower->add_flag("--no-enforce", lo.no_enforce, "Report instead of rejecting inadmissible (n, c)");
  lower->add_flag("--integral", lo.integral, "Also evaluate the van Trees integral by quadrature");

  auto* selftest = app.add_subcommand("selftest", "Run the invariant suite");
  add_common(selftest, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what(), kExitConfig);
    return kExitConfig;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opts, replicates_path, out, err);
    if (estimate->parsed()) return cmd_estimate(opts, eo, out);
    if (bias->parsed()) return cmd_bias_curve(opts, bo, out, err);
    if (lower->parsed()) return cmd_lowerbound(opts, lo, out);
    if (selftest->parsed()) return cmd_selftest(opts, out);
  } catch (const ConfigError& e) {
    emit_error(err, "config", e.message(), kExitConfig, e.key(), e.line());
    return kExitConfig;
  } catch (const IoError& e) {
    emit_error(err, "io", e.what(), kExitIo);
    return kExitIo;
  } catch (const AdmissibilityError& e) {
    emit_error(err, "admissibility", e.what(), kExitRuntime);
    return kExitRuntime;
  } catch (const ValidationError& e) {
    emit_error(err, "validation", e.what(), kExitConfig);
    return kExitConfig;
  } catch (const Error& e) {
    emit_error(err, "runtime", e.what(), kExitRuntime);
    return kExitRuntime;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what(), kExitRuntime);
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace pcadb::cli
