// ellshrink: command-line front end for the shrinkage-estimation library.
//
//   ellshrink risk <config> [--<key> <value> ...] [--threads T]
//   ellshrink check --fn <spec> --p <p> --N <N>
//   ellshrink identity [--p --n --alpha --beta --theta-norm --fn --reps --seed --perturb]
//   ellshrink posterior --data <csv> --at <x1,x2,...> [--at ...]
//
// Exit codes: 0 ok, 1 a checked condition failed, 2 usage, 3 runtime failure.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ellshrink/error.hpp"
#include "ellshrink/experiment.hpp"

namespace {

using namespace ellshrink;

int run_risk_command(const std::string& config_path, const std::map<std::string, std::optional<std::string>>& overrides,
                     unsigned threads) {
  ExperimentConfig cfg = load_config(config_path);
  for (const auto& [key, value] : overrides) {
    if (value) apply_config_value(cfg, key, *value);
  }
  if (cfg.out.empty()) {
    run_risk(cfg, std::cout, threads);
    return kExitOk;
  }
  std::ofstream out(cfg.out);
  if (!out) throw UsageError("cannot open output file '" + cfg.out + "'", 0, "out");
  run_risk(cfg, out, threads);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Baranchik-type shrinkage estimation of an elliptical location vector"};
  app.set_version_flag("--version", std::string(ellshrink::version()));
  app.require_subcommand(1);

  // risk
  auto* risk = app.add_subcommand("risk", "Monte Carlo risk study driven by a key = value config file");
  std::string config_path;
  unsigned threads = 1;
  std::map<std::string, std::optional<std::string>> overrides;
  risk->add_option("config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  for (const char* key : {"p", "N", "sigma", "theta", "mixing", "estimators", "reps", "seed", "compare", "out"}) {
    risk->add_option(std::string("--") + key, overrides[key], std::string("override config key '") + key + "'");
  }
  risk->add_option("--threads", threads, "worker threads (results do not depend on this)")->check(CLI::PositiveNumber);

  // check
  auto* check = app.add_subcommand("check", "check minimaxity / dominance / integrability conditions for r");
  CheckRequest check_req;
  std::string check_csv;
  check->add_option("--fn", check_req.fn, "shrinkage spec, e.g. baranchik:at,c=1")->required();
  check->add_option("--p", check_req.p, "dimension")->required();
  check->add_option("--N", check_req.n_obs, "sample size")->required();
  check->add_option("--grid-points", check_req.grid_points, "points of the log-uniform grid on [1e-4, 1e4]");
  check->add_option("--samples", check_req.schwartz_samples, "reference samples of F for the integrability check");
  check->add_option("--seed", check_req.seed, "seed for the reference samples");
  check->add_option("--csv", check_csv, "also write the report as CSV to this path");

  // identity
  auto* identity = app.add_subcommand("identity", "Monte Carlo check of the Stein-type identities");
  IdentityRequest id_req;
  identity->add_option("--p", id_req.p, "dimension")->capture_default_str();
  identity->add_option("--n", id_req.dof, "Wishart degrees of freedom")->capture_default_str();
  identity->add_option("--alpha", id_req.alpha, "x ~ N(theta, alpha Sigma)")->capture_default_str();
  identity->add_option("--beta", id_req.beta, "S ~ Wishart(beta Sigma, n)")->capture_default_str();
  identity->add_option("--theta-norm", id_req.theta_norm, "theta = norm * e1")->capture_default_str();
  identity->add_option("--fn", id_req.fn, "shrinkage spec")->capture_default_str();
  identity->add_option("--reps", id_req.reps, "replicates")->capture_default_str();
  identity->add_option("--seed", id_req.seed, "seed")->capture_default_str();
  identity->add_option("--perturb", id_req.perturb, "test hook: scale both right-hand sides")->capture_default_str();
  identity->add_option("--threads", id_req.threads, "worker threads")->check(CLI::PositiveNumber);

  // posterior
  auto* posterior = app.add_subcommand("posterior", "log-density of the posterior of theta at given points");
  std::string data_path;
  std::vector<std::string> points;
  posterior->add_option("--data", data_path, "N x p data CSV, no header")->required();
  posterior->add_option("--at", points, "comma-separated point (repeatable)")->required()->take_all();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (risk->parsed()) return run_risk_command(config_path, overrides, threads);
    if (check->parsed()) {
      if (check_csv.empty()) return run_check(check_req, std::cout);
      std::ofstream csv(check_csv);
      if (!csv) throw UsageError("cannot open '" + check_csv + "'", 0, "csv");
      return run_check(check_req, std::cout, &csv);
    }
    if (identity->parsed()) return run_identity(id_req, std::cout);
    if (posterior->parsed()) return run_posterior(data_path, points, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "ellshrink: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ellshrink::Error& e) {
    std::cerr << "ellshrink: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "ellshrink: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
