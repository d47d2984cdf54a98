#pragma once

// Run configuration for the pca-debias tool. The on-disk format is YAML:
//
//   output: results.json      # optional, stdout when absent
//   format: json              # csv | json (default csv)
//   verbosity: 1              # 0 quiet, 1 progress on stderr
//   jobs: 4                   # concurrent replicates (default 1)
//   scenarios:
//     - name: baseline
//       model: {family: prop32, r: 1, a: 2, d: 50, mu1: 1}
//       r: 1
//       u: e2                 # or theta1+theta2, or a coordinate list
//       n: 4000
//       tau: 0.1
//       m: 500                # optional split override
//       estimator: debiased   # plugin | debiased
//       reps: 2000
//       seed: 42
//       alpha: 0.05
//       loss: squared         # squared | absolute | huber(<k>)
//
// Model families: prop32 {r, a, d, mu1}, diagonal {values}, matrix {rows},
// spiked {spikes, noise, d}.

#include "pcadb/montecarlo.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcadb::cli {

enum class Format { kCsv, kJson };

struct RunConfig {
  std::vector<Scenario> scenarios;
  std::optional<std::string> output;
  Format format = Format::kCsv;
  int verbosity = 1;
  int jobs = 1;

  bool operator==(const RunConfig&) const = default;
};

// Syntax errors, unknown keys and invariant violations. `key` names the
// offending field and `line` is 1-based (0 when unknown).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, std::string key, int line);
  const std::string& key() const { return key_; }
  int line() const { return line_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  std::string key_;
  int line_;
};

RunConfig parse_config(const std::string& text);
std::string serialize(const RunConfig& cfg);

Format parse_format(const std::string& text);
std::string format_name(Format f);

// "e2", "theta1+theta2" or a comma separated coordinate list.
FunctionalSpec parse_functional(const std::string& text);

}  // namespace pcadb::cli
