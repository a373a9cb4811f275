#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ellshrink/statcore.hpp"

namespace ellshrink {

std::string_view version() noexcept;

// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitConditionFailed = 1,
  kExitUsage = 2,
  kExitRuntime = 3,
};

// Malformed input: bad config key or value, unparsable spec, violated
// precondition. Maps to kExitUsage.
class UsageError : public std::runtime_error {
 public:
  UsageError(const std::string& what, int line = 0, std::string field = {});

  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

// Flat `key = value` experiment description; `#` starts a comment.
// Keys: p, N, sigma, theta, mixing, estimators, reps, seed, compare, out.
struct ExperimentConfig {
  int p = 5;
  int n_obs = 20;
  std::string sigma = "identity";
  std::string theta = "zero";
  std::string mixing = "gaussian";
  std::vector<std::string> estimators{"mean"};
  std::int64_t reps = 10000;
  std::uint64_t seed = 1;
  bool compare = false;
  std::string out;
};

ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);
// Sets one key as if it appeared in the file; `line` is for diagnostics.
void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value, int line = 0);

// Canonical `key=value` lines (out excluded) and their FNV-1a 64 hash.
std::string canonical_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

// theta grammar: `zero` | `ray:<dir>:<norm1>,<norm2>,...` with dir `e<k>`
// (1-based) or `ones` | `file:<path>` (one theta per CSV row).
std::vector<Vector> parse_theta_spec(std::string_view spec, int p);

// Writes the CSV (with `#` provenance lines) for every (theta, estimator)
// and, when compare is set, every estimator pair. Throws UsageError for
// config problems and Error for numeric failures.
void run_risk(const ExperimentConfig& cfg, std::ostream& csv, unsigned threads = 1);

struct CheckRequest {
  std::string fn;
  int p = 5;
  int n_obs = 20;
  std::size_t grid_points = 81;
  std::size_t schwartz_samples = 20000;
  std::uint64_t seed = 1;
};

// Prints minimax, dominance and integrability reports as text; the same
// entries go to csv_out when non-null. Returns kExitOk or
// kExitConditionFailed.
int run_check(const CheckRequest& req, std::ostream& out, std::ostream* csv_out = nullptr);

struct IdentityRequest {
  int p = 5;
  int dof = 19;
  double alpha = 0.05;
  double beta = 1.0;
  double theta_norm = 0.0;  // theta = theta_norm * e1
  std::string fn = "baranchik:at,c=1";
  std::int64_t reps = 200000;
  std::uint64_t seed = 1;
  double perturb = 1.0;
  unsigned threads = 1;
};

int run_identity(const IdentityRequest& req, std::ostream& out);

// Reads N x p data, prints `point,logpdf` for each comma-separated point.
int run_posterior(const std::filesystem::path& data, const std::vector<std::string>& points, std::ostream& out);

}  // namespace ellshrink
