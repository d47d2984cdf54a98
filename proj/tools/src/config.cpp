#include "pcadb_cli/config.hpp"

#include "pcadb/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <set>
#include <sstream>

namespace pcadb::cli {

namespace {

std::string located(const std::string& message, int line) {
  if (line <= 0) return message;
  std::ostringstream os;
  os << "line " << line << ": " << message;
  return os.str();
}

int line_of(const YAML::Node& node) { return node.Mark().is_null() ? 0 : node.Mark().line + 1; }

[[noreturn]] void fail(const std::string& message, const std::string& key, const YAML::Node& node) {
  throw ConfigError(message, key, line_of(node));
}

void check_keys(const YAML::Node& map, const std::set<std::string>& allowed, const std::string& where) {
  if (!map.IsMap()) fail(where + " must be a mapping", where, map);
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.contains(key)) fail("unknown key '" + key + "' in " + where, key, kv.first);
  }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail("'" + key + "' must be a scalar", key, node);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail("'" + key + "' has an invalid value '" + node.Scalar() + "'", key, node);
  }
}

double finite(const YAML::Node& node, const std::string& key) {
  const auto v = scalar<double>(node, key);
  if (!std::isfinite(v)) fail("'" + key + "' must be finite", key, node);
  return v;
}

std::vector<double> number_list(const YAML::Node& node, const std::string& key) {
  if (!node.IsSequence()) fail("'" + key + "' must be a list of numbers", key, node);
  std::vector<double> out;
  for (const auto& item : node) out.push_back(finite(item, key));
  return out;
}

ModelSpec parse_model(const YAML::Node& node) {
  if (!node.IsMap()) fail("'model' must be a mapping", "model", node);
  const YAML::Node family_node = node["family"];
  if (!family_node) fail("model needs a 'family'", "family", node);
  const auto family = scalar<std::string>(family_node, "family");
  if (family == "prop32") {
    check_keys(node, {"family", "r", "a", "d", "mu1"}, "model");
    Prop32Spec s;
    if (node["r"]) s.r = scalar<int>(node["r"], "r");
    if (node["a"]) s.a = finite(node["a"], "a");
    if (node["d"]) s.d = scalar<int>(node["d"], "d");
    if (node["mu1"]) s.mu1 = finite(node["mu1"], "mu1");
    return s;
  }
  if (family == "diagonal") {
    check_keys(node, {"family", "values"}, "model");
    if (!node["values"]) fail("diagonal model needs 'values'", "values", node);
    return DiagonalSpec{number_list(node["values"], "values")};
  }
  if (family == "matrix") {
    check_keys(node, {"family", "rows"}, "model");
    const YAML::Node rows = node["rows"];
    if (!rows || !rows.IsSequence()) fail("matrix model needs 'rows' as a list of lists", "rows", node);
    MatrixSpec s;
    for (const auto& row : rows) s.rows.push_back(number_list(row, "rows"));
    return s;
  }
  if (family == "spiked") {
    check_keys(node, {"family", "spikes", "noise", "d"}, "model");
    SpikedSpec s;
    if (!node["spikes"]) fail("spiked model needs 'spikes'", "spikes", node);
    s.spikes = number_list(node["spikes"], "spikes");
    if (node["noise"]) s.noise = finite(node["noise"], "noise");
    if (!node["d"]) fail("spiked model needs 'd'", "d", node);
    s.d = scalar<int>(node["d"], "d");
    return s;
  }
  fail("unknown model family '" + family + "'", "family", family_node);
}

FunctionalSpec parse_u(const YAML::Node& node) {
  if (node.IsSequence()) {
    FunctionalSpec s;
    s.coords = number_list(node, "u");
    bool nonzero = false;
    for (double v : s.coords) nonzero = nonzero || v != 0.0;
    if (!nonzero) fail("'u' must be nonzero", "u", node);
    return s;
  }
  try {
    return parse_functional(scalar<std::string>(node, "u"));
  } catch (const ValidationError& e) {
    fail(e.what(), "u", node);
  }
}

Scenario parse_scenario(const YAML::Node& node, std::size_t index) {
  check_keys(node,
             {"name", "model", "r", "u", "n", "tau", "m", "estimator", "reps", "seed", "alpha", "loss"},
             "scenario");
  Scenario s;
  s.name = node["name"] ? scalar<std::string>(node["name"], "name") : "scenario" + std::to_string(index + 1);
  if (!node["model"]) fail("scenario needs a 'model'", "model", node);
  s.model = parse_model(node["model"]);
  if (!node["n"]) fail("scenario needs 'n'", "n", node);
  s.n = scalar<int>(node["n"], "n");
  if (!node["u"]) fail("scenario needs 'u'", "u", node);
  s.u = parse_u(node["u"]);
  if (node["r"]) s.r = scalar<int>(node["r"], "r");
  if (node["tau"]) s.tau = finite(node["tau"], "tau");
  if (node["m"]) s.m = scalar<int>(node["m"], "m");
  if (node["reps"]) s.reps = scalar<int>(node["reps"], "reps");
  if (node["seed"]) s.master_seed = scalar<std::uint64_t>(node["seed"], "seed");
  if (node["alpha"]) s.alpha = finite(node["alpha"], "alpha");
  if (node["estimator"]) {
    const auto e = scalar<std::string>(node["estimator"], "estimator");
    if (e == "plugin") {
      s.estimator = EstimatorKind::kPlugin;
    } else if (e == "debiased") {
      s.estimator = EstimatorKind::kDebiased;
    } else {
      fail("'estimator' must be plugin or debiased", "estimator", node["estimator"]);
    }
  }
  if (node["loss"]) {
    try {
      s.loss = parse_loss(scalar<std::string>(node["loss"], "loss"));
    } catch (const ValidationError& e) {
      fail(e.what(), "loss", node["loss"]);
    }
  }

  auto at = [&](const char* key) { return node[key] ? node[key] : node; };
  if (s.reps < 2) fail("'reps' must be >= 2", "reps", at("reps"));
  if (s.r < 1) fail("'r' must be >= 1", "r", at("r"));
  if (s.n < 1) fail("'n' must be >= 1", "n", at("n"));
  if (s.estimator == EstimatorKind::kDebiased && s.n < 12) {
    fail("'n' must be >= 12 for the debiased estimator", "n", at("n"));
  }
  if (!(s.tau > 0.0 && s.tau < 2.0)) fail("'tau' must lie in (0, 2)", "tau", at("tau"));
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) fail("'alpha' must lie in (0, 1)", "alpha", at("alpha"));
  if (s.m) {
    const int np = s.n - 2 * *s.m;
    if (*s.m < 1 || np <= 0 || 3 * np <= s.n) fail("'m' must satisfy n - 2m > n/3", "m", at("m"));
  }
  try {
    validate_scenario(s);
  } catch (const ValidationError& e) {
    fail(e.what(), "scenario", node);
  }
  return s;
}

void emit_model(YAML::Emitter& out, const ModelSpec& model) {
  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "family" << YAML::Value << family_name(model);
  if (const auto* p = std::get_if<Prop32Spec>(&model)) {
    out << YAML::Key << "r" << YAML::Value << p->r;
    out << YAML::Key << "a" << YAML::Value << p->a;
    out << YAML::Key << "d" << YAML::Value << p->d;
    out << YAML::Key << "mu1" << YAML::Value << p->mu1;
  } else if (const auto* dg = std::get_if<DiagonalSpec>(&model)) {
    out << YAML::Key << "values" << YAML::Value << YAML::Flow << dg->values;
  } else if (const auto* m = std::get_if<MatrixSpec>(&model)) {
    out << YAML::Key << "rows" << YAML::Value << YAML::BeginSeq;
    for (const auto& row : m->rows) out << YAML::Flow << row;
    out << YAML::EndSeq;
  } else if (const auto* sp = std::get_if<SpikedSpec>(&model)) {
    out << YAML::Key << "spikes" << YAML::Value << YAML::Flow << sp->spikes;
    out << YAML::Key << "noise" << YAML::Value << sp->noise;
    out << YAML::Key << "d" << YAML::Value << sp->d;
  }
  out << YAML::EndMap;
}

}  // namespace

ConfigError::ConfigError(const std::string& message, std::string key, int line)
    : std::runtime_error(located(message, line)), message_(message), key_(std::move(key)), line_(line) {}

Format parse_format(const std::string& text) {
  if (text == "csv") return Format::kCsv;
  if (text == "json") return Format::kJson;
  throw ConfigError("format must be csv or json (got '" + text + "')", "format", 0);
}

std::string format_name(Format f) { return f == Format::kCsv ? "csv" : "json"; }

FunctionalSpec parse_functional(const std::string& text) {
  FunctionalSpec s;
  if (!text.empty() && (std::isdigit(static_cast<unsigned char>(text[0])) || text[0] == '-' ||
                        text[0] == '+' || text[0] == '.')) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used == 0 || used != item.size() || !std::isfinite(v)) {
        throw ValidationError("functional: bad coordinate '" + item + "'");
      }
      s.coords.push_back(v);
    }
    bool nonzero = false;
    for (double v : s.coords) nonzero = nonzero || v != 0.0;
    if (!nonzero) throw ValidationError("functional: u must be nonzero");
    return s;
  }
  s.named = text;
  Scenario probe;
  probe.u = s;
  probe.reps = 2;
  probe.n = 12;
  validate_scenario(probe);  // checks the name syntax
  return s;
}

RunConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("syntax error: " + e.msg, "", e.mark.line + 1);
  }
  if (!root || root.IsNull()) throw ConfigError("empty configuration", "scenarios", 0);
  check_keys(root, {"output", "format", "verbosity", "jobs", "scenarios"}, "configuration");

  RunConfig cfg;
  if (root["output"]) cfg.output = scalar<std::string>(root["output"], "output");
  if (root["format"]) {
    try {
      cfg.format = parse_format(scalar<std::string>(root["format"], "format"));
    } catch (const ConfigError& e) {
      fail(e.message(), "format", root["format"]);
    }
  }
  if (root["verbosity"]) {
    cfg.verbosity = scalar<int>(root["verbosity"], "verbosity");
    if (cfg.verbosity < 0) fail("'verbosity' must be >= 0", "verbosity", root["verbosity"]);
  }
  if (root["jobs"]) {
    cfg.jobs = scalar<int>(root["jobs"], "jobs");
    if (cfg.jobs < 1) fail("'jobs' must be >= 1", "jobs", root["jobs"]);
  }
  const YAML::Node scenarios = root["scenarios"];
  if (!scenarios) throw ConfigError("configuration needs 'scenarios'", "scenarios", 0);
  if (!scenarios.IsSequence() || scenarios.size() == 0) {
    fail("'scenarios' must be a non-empty list", "scenarios", scenarios);
  }
  for (std::size_t i = 0; i < scenarios.size(); ++i) cfg.scenarios.push_back(parse_scenario(scenarios[i], i));
  return cfg;
}

std::string serialize(const RunConfig& cfg) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  if (cfg.output) out << YAML::Key << "output" << YAML::Value << *cfg.output;
  out << YAML::Key << "format" << YAML::Value << format_name(cfg.format);
  out << YAML::Key << "verbosity" << YAML::Value << cfg.verbosity;
  out << YAML::Key << "jobs" << YAML::Value << cfg.jobs;
  out << YAML::Key << "scenarios" << YAML::Value << YAML::BeginSeq;
  for (const auto& s : cfg.scenarios) {
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;
    emit_model(out, s.model);
    out << YAML::Key << "r" << YAML::Value << s.r;
    if (s.u.named.empty()) {
      out << YAML::Key << "u" << YAML::Value << YAML::Flow << s.u.coords;
    } else {
      out << YAML::Key << "u" << YAML::Value << s.u.named;
    }
    out << YAML::Key << "n" << YAML::Value << s.n;
    out << YAML::Key << "tau" << YAML::Value << s.tau;
    if (s.m) out << YAML::Key << "m" << YAML::Value << *s.m;
    out << YAML::Key << "estimator" << YAML::Value << estimator_name(s.estimator);
    out << YAML::Key << "reps" << YAML::Value << s.reps;
    out << YAML::Key << "seed" << YAML::Value << s.master_seed;
    out << YAML::Key << "alpha" << YAML::Value << s.alpha;
    out << YAML::Key << "loss" << YAML::Value << s.loss.name();
    out << YAML::EndMap;
  }
  out << YAML::EndSeq << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace pcadb::cli
