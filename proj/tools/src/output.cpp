#include "pcadb_cli/output.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <variant>

namespace pcadb::cli {

namespace {

using Value = std::variant<std::monostate, double, long long, bool, std::string>;
using Record = std::vector<std::pair<std::string, Value>>;

template <class T>
Value opt(const std::optional<T>& v) {
  if (!v) return std::monostate{};
  if constexpr (std::is_same_v<T, int>) {
    return static_cast<long long>(*v);
  } else {
    return *v;
  }
}

Value integer(long long v) { return v; }

std::string csv_value(const Value& v) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double d) const { return csv_number(d); }
    std::string operator()(long long i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(const std::string& s) const { return csv_field(s); }
  };
  return std::visit(Visitor{}, v);
}

nlohmann::json json_value(const Value& v) {
  struct Visitor {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(double d) const {
      if (!std::isfinite(d)) return nullptr;
      return d;
    }
    nlohmann::json operator()(long long i) const { return i; }
    nlohmann::json operator()(bool b) const { return b; }
    nlohmann::json operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, v);
}

nlohmann::ordered_json to_json(const Record& rec) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rec) j[k] = json_value(v);
  return j;
}

void write_csv(std::ostream& os, const std::vector<Record>& rows, bool header) {
  if (rows.empty()) return;
  if (header) {
    for (std::size_t i = 0; i < rows.front().size(); ++i) {
      os << (i ? "," : "") << rows.front()[i].first;
    }
    os << '\n';
  }
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_value(row[i].second);
    os << '\n';
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "; " : "") + items[i];
  return out;
}

Record summary_record(const ScenarioOutcome& o) {
  const Scenario& s = o.scenario;
  Record rec{{"scenario", s.name},
             {"status", o.report ? std::string("ok") : std::string("error")},
             {"estimator", estimator_name(s.estimator)},
             {"family", family_name(s.model)},
             {"n", integer(s.n)},
             {"r", integer(s.r)},
             {"reps", integer(s.reps)}};
  auto add = [&](const char* key, Value v) { rec.emplace_back(key, std::move(v)); };
  if (o.report) {
    const SummaryReport& r = *o.report;
    add("failures", integer(r.failures));
    add("failure_rate", r.failure_rate);
    add("degenerate", r.degenerate);
    add("true_value", r.true_value);
    add("sigma_true", r.sigma_true);
    add("effective_rank", r.effective_rank);
    add("mean_error", r.mean_error);
    add("std_error", r.std_error);
    add("mean_standardized", r.mean_standardized);
    add("std_error_standardized", r.std_error_standardized);
    add("ks_to_normal", r.ks_to_normal);
    add("ks_feasible", r.ks_feasible);
    add("coverage", r.coverage);
    add("risk", r.risk);
    add("mean_sigma_hat", r.mean_sigma_hat);
    add("mean_m", r.mean_m);
    add("floor_rate", r.floor_rate);
    add("clamp_rate", r.clamp_rate);
    add("warnings", join(r.warnings));
    add("error", std::monostate{});
  } else {
    for (const char* key : {"failures", "failure_rate", "degenerate", "true_value", "sigma_true",
                            "effective_rank", "mean_error", "std_error", "mean_standardized",
                            "std_error_standardized", "ks_to_normal", "ks_feasible", "coverage",
                            "risk", "mean_sigma_hat", "mean_m", "floor_rate", "clamp_rate",
                            "warnings"}) {
      add(key, std::monostate{});
    }
    add("error", o.error.value_or(""));
  }
  return rec;
}

}  // namespace

std::string csv_number(double v) {
  if (std::isnan(v)) return {};
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

void write_summaries(std::ostream& os, Format f, std::span<const ScenarioOutcome> outcomes) {
  std::vector<Record> rows;
  for (const auto& o : outcomes) rows.push_back(summary_record(o));
  if (f == Format::kCsv) {
    write_csv(os, rows, true);
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  nlohmann::ordered_json doc;
  doc["scenarios"] = arr;
  os << doc.dump(2) << '\n';
}

void write_replicates_csv(std::ostream& os, const std::string& scenario,
                          std::span<const ReplicateResult> results, bool header) {
  std::vector<Record> rows;
  for (const auto& r : results) {
    const bool ok = !r.failure.has_value();
    auto num = [&](double v) -> Value { return ok ? Value(v) : Value(std::monostate{}); };
    rows.push_back(Record{{"scenario", scenario},
                          {"index", integer(r.index)},
                          {"status", ok ? std::string("ok") : std::string("failed")},
                          {"estimate", num(r.estimate)},
                          {"aligned_error", num(r.aligned_error)},
                          {"standardized", num(r.standardized)},
                          {"feasible_standardized", num(r.feasible_standardized)},
                          {"sigma_hat", num(r.sigma_hat)},
                          {"ci_covers", ok ? Value(r.ci_covers) : Value(std::monostate{})},
                          {"d_check", num(r.d_check)},
                          {"floor_engaged", ok ? Value(r.floor_engaged) : Value(std::monostate{})},
                          {"clamped", ok ? Value(r.clamped) : Value(std::monostate{})},
                          {"m", integer(r.m)},
                          {"failure", r.failure.value_or("")}});
  }
  write_csv(os, rows, header);
}

void write_bias_curve(std::ostream& os, Format f, std::span<const BiasCurvePoint> curve) {
  std::vector<Record> rows;
  for (const auto& p : curve) {
    rows.push_back(Record{{"effective_rank", p.effective_rank},
                          {"tail_dim", integer(p.tail_dim)},
                          {"b_hat", p.b_hat},
                          {"b_std_error", p.b_std_error},
                          {"theoretical", p.theoretical},
                          {"plugin_mean_error", opt(p.plugin_mean_error)},
                          {"plugin_std_error", opt(p.plugin_std_error)},
                          {"debiased_mean_error", opt(p.debiased_mean_error)},
                          {"debiased_std_error", opt(p.debiased_std_error)}});
  }
  if (f == Format::kCsv) {
    write_csv(os, rows, true);
    return;
  }
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) arr.push_back(to_json(r));
  nlohmann::ordered_json doc;
  doc["bias_curve"] = arr;
  os << doc.dump(2) << '\n';
}

void write_estimate(std::ostream& os, Format f, const EstimateRecord& rec) {
  const Record row{{"estimator", rec.estimator},
                   {"n", integer(rec.n)},
                   {"d", integer(rec.dim)},
                   {"r", integer(rec.r)},
                   {"value", rec.value},
                   {"sigma_hat", rec.sigma_hat},
                   {"alpha", rec.alpha},
                   {"ci_lo", rec.ci.lo},
                   {"ci_hi", rec.ci.hi},
                   {"tau", rec.tau},
                   {"delta", opt(rec.delta)},
                   {"d_check", opt(rec.d_check)},
                   {"n_prime", opt(rec.n_prime)},
                   {"m", opt(rec.m)},
                   {"r_hat", opt(rec.r_hat)},
                   {"clamped", opt(rec.clamped)},
                   {"floor_engaged", opt(rec.floor_engaged)}};
  if (f == Format::kCsv) {
    write_csv(os, {row}, true);
  } else {
    os << to_json(row).dump(2) << '\n';
  }
}

void write_lowerbound(std::ostream& os, Format f, const LowerBoundRecord& rec) {
  const VanTreesResult& v = rec.result;
  const Admissibility& a = v.admissibility;
  const Record row{{"n", rec.n},
                   {"c", rec.c},
                   {"bound", v.bound},
                   {"sigma2", v.sigma2},
                   {"numerator", v.numerator},
                   {"denominator", v.denominator},
                   {"first_factor", v.first_factor},
                   {"second_factor", v.second_factor},
                   {"b_norm", v.b_norm},
                   {"j_pi", v.j_pi},
                   {"numerator_term", v.numerator_term},
                   {"fisher_term", v.fisher_term},
                   {"prior_term", v.prior_term},
                   {"sigma_term", v.sigma_term},
                   {"delta", a.delta},
                   {"cond_H", a.cond_H},
                   {"cond_delta_1", a.cond_delta_1},
                   {"cond_delta_2", a.cond_delta_2},
                   {"cond_HH", a.cond_HH},
                   {"assump_XYZ", a.assump_XYZ},
                   {"class_ratio", opt(v.class_ratio)},
                   {"integral_bound", opt(rec.integral_bound)}};
  if (f == Format::kCsv) {
    write_csv(os, {row}, true);
  } else {
    os << to_json(row).dump(2) << '\n';
  }
}

}  // namespace pcadb::cli
