#include "ellshrink/experiment.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "ellshrink/conditions.hpp"
#include "ellshrink/elliptical.hpp"
#include "ellshrink/error.hpp"
#include "ellshrink/estimators.hpp"
#include "ellshrink/posterior.hpp"
#include "ellshrink/risk.hpp"
#include "text.hpp"

#ifndef ELLSHRINK_VERSION
#define ELLSHRINK_VERSION "0.0.0"
#endif

namespace ellshrink {

std::string_view version() noexcept { return ELLSHRINK_VERSION; }

UsageError::UsageError(const std::string& what, int line, std::string field)
    : std::runtime_error(line > 0 ? fmt::format("line {}: {}{}", line, field.empty() ? "" : field + ": ", what)
                                  : (field.empty() ? what : field + ": " + what)),
      line_(line), field_(std::move(field)) {}

namespace {

// Estimator lists are comma-separated, but `baranchik:at,c=1` carries its
// own commas; a `key=value` token continues the previous entry.
std::vector<std::string> split_estimators(std::string_view s) {
  std::vector<std::string> out;
  for (auto tok : detail::split(s, ',')) {
    const bool continuation = !out.empty() && tok.find('=') != std::string_view::npos &&
                              !detail::starts_with(tok, "baranchik:") && tok != "mean" && tok != "js" && tok != "js+";
    if (continuation) {
      out.back() += ",";
      out.back() += tok;
    } else {
      out.emplace_back(tok);
    }
  }
  return out;
}

bool parse_bool(std::string_view v, bool& out) {
  if (v == "true" || v == "1" || v == "yes") return out = true, true;
  if (v == "false" || v == "0" || v == "no") return out = false, true;
  return false;
}

}  // namespace

void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value, int line) {
  key = detail::trim(key);
  value = detail::trim(value);
  const std::string field(key);
  auto bad = [&](std::string_view why) { throw UsageError(fmt::format("{} (got '{}')", why, value), line, field); };
  if (key == "p") {
    auto v = detail::parse_int(value);
    if (!v || *v < 3) bad("expected an integer >= 3");
    cfg.p = static_cast<int>(*v);
  } else if (key == "N") {
    auto v = detail::parse_int(value);
    if (!v || *v < 2) bad("expected an integer >= 2");
    cfg.n_obs = static_cast<int>(*v);
  } else if (key == "sigma") {
    cfg.sigma = std::string(value);
  } else if (key == "theta") {
    cfg.theta = std::string(value);
  } else if (key == "mixing") {
    cfg.mixing = std::string(value);
  } else if (key == "estimators") {
    cfg.estimators = split_estimators(value);
    if (cfg.estimators.empty() || cfg.estimators.front().empty()) bad("expected at least one estimator");
  } else if (key == "reps") {
    auto v = detail::parse_int(value);
    if (!v || *v < 100) bad("expected an integer >= 100");
    cfg.reps = *v;
  } else if (key == "seed") {
    auto v = detail::parse_int(value);
    if (!v || *v < 0) bad("expected a non-negative integer");
    cfg.seed = static_cast<std::uint64_t>(*v);
  } else if (key == "compare") {
    if (!parse_bool(value, cfg.compare)) bad("expected true or false");
  } else if (key == "out") {
    cfg.out = std::string(value);
  } else {
    throw UsageError(fmt::format("unknown key '{}'", key), line, field);
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw UsageError("expected 'key = value'", lineno);
    apply_config_value(cfg, line.substr(0, eq), line.substr(eq + 1), lineno);
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string estimators;
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) estimators += (i ? ";" : "") + cfg.estimators[i];
  return fmt::format("p={}\nN={}\nsigma={}\ntheta={}\nmixing={}\nestimators={}\nreps={}\nseed={}\ncompare={}\n", cfg.p,
                     cfg.n_obs, cfg.sigma, cfg.theta, cfg.mixing, estimators, cfg.reps, cfg.seed,
                     cfg.compare ? "true" : "false");
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<Vector> parse_theta_spec(std::string_view spec, int p) {
  spec = detail::trim(spec);
  if (spec == "zero") return {Vector::Zero(p)};
  if (detail::starts_with(spec, "ray:")) {
    const auto body = spec.substr(4);
    const auto colon = body.find(':');
    if (colon == std::string_view::npos) throw UsageError(fmt::format("'{}': expected ray:<dir>:<norms>", spec));
    const auto dir_s = detail::trim(body.substr(0, colon));
    Vector dir = Vector::Zero(p);
    if (dir_s == "ones") {
      dir.setConstant(1.0 / std::sqrt(static_cast<double>(p)));
    } else if (detail::starts_with(dir_s, "e")) {
      auto k = detail::parse_int(dir_s.substr(1));
      if (!k || *k < 1 || *k > p) throw UsageError(fmt::format("'{}': direction must be e1..e{}", spec, p));
      dir(*k - 1) = 1.0;
    } else {
      throw UsageError(fmt::format("'{}': unknown direction '{}'", spec, dir_s));
    }
    std::vector<Vector> out;
    for (auto tok : detail::split(body.substr(colon + 1), ',')) {
      auto norm = detail::parse_double(tok);
      if (!norm || *norm < 0.0) throw UsageError(fmt::format("'{}': norm '{}' must be a non-negative number", spec, tok));
      out.emplace_back(*norm * dir);
    }
    return out;
  }
  if (detail::starts_with(spec, "file:")) {
    Matrix m;
    try {
      m = read_csv_matrix(std::filesystem::path(std::string(spec.substr(5))));
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    if (m.cols() != p) throw UsageError(fmt::format("'{}': rows have {} values, expected p = {}", spec, m.cols(), p));
    std::vector<Vector> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.emplace_back(m.row(i).transpose());
    return out;
  }
  throw UsageError(fmt::format("unknown theta spec '{}'", spec));
}

namespace {

struct ResolvedExperiment {
  SpdMatrix sigma;
  MixingMeasure mixing;
  std::vector<Vector> thetas;
  std::vector<EstimatorSpec> estimators;
};

// Every spec is resolved before any simulation starts, so config errors
// surface as UsageError and never as a runtime failure.
ResolvedExperiment resolve(const ExperimentConfig& cfg) {
  if (cfg.n_obs <= cfg.p) {
    throw UsageError(fmt::format("N must exceed p (N = {}, p = {})", cfg.n_obs, cfg.p), 0, "N");
  }
  auto wrap = [](const char* field, auto&& make) {
    try {
      return make();
    } catch (const Error& e) {
      throw UsageError(e.what(), 0, field);
    }
  };
  auto sigma = wrap("sigma", [&] { return spd_from_spec(cfg.sigma, cfg.p); });
  auto mixing = wrap("mixing", [&] { return make_mixing_measure(cfg.mixing); });
  std::vector<Vector> thetas;
  try {
    thetas = parse_theta_spec(cfg.theta, cfg.p);
  } catch (const UsageError& e) {
    throw UsageError(e.what(), 0, "theta");
  }
  std::vector<EstimatorSpec> estimators;
  for (const auto& s : cfg.estimators) {
    estimators.push_back(wrap("estimators", [&] { return parse_estimator(s, cfg.p, cfg.n_obs); }));
  }
  return {std::move(sigma), std::move(mixing), std::move(thetas), std::move(estimators)};
}

}  // namespace

void run_risk(const ExperimentConfig& cfg, std::ostream& csv, unsigned threads) {
  const auto plan = resolve(cfg);
  const bool signed_path = !plan.mixing.is_probability();
  if (signed_path && !std::holds_alternative<DiscreteAtoms>(plan.mixing.kind())) {
    throw UsageError("signed mixing measures must be given as atoms", 0, "mixing");
  }
  const MonteCarloOptions opts{threads};

  csv << "# ellshrink " << version() << '\n';
  csv << fmt::format("# config_hash={:016x} seed={}\n", config_hash(cfg), cfg.seed);
  csv << risk_csv_header() << '\n';

  for (const auto& theta : plan.thetas) {
    const Scenario scn(cfg.n_obs, plan.sigma, theta, plan.mixing);
    auto emit = [&](const RiskEstimate& est) {
      csv << format_risk_csv_row(RiskRow{est, cfg.p, cfg.n_obs, plan.mixing.label(), theta.norm()}) << '\n';
    };
    for (const auto& est : plan.estimators) {
      emit(signed_path ? mc_risk_signed(scn, est, cfg.reps, cfg.seed, opts)
                       : mc_risk(scn, est, cfg.reps, cfg.seed, opts));
    }
    if (!cfg.compare) continue;
    for (std::size_t i = 0; i < plan.estimators.size(); ++i) {
      for (std::size_t j = i + 1; j < plan.estimators.size(); ++j) {
        const auto& a = plan.estimators[i];
        const auto& b = plan.estimators[j];
        emit(signed_path ? paired_risk_difference_signed(scn, a, b, cfg.reps, cfg.seed, opts)
                         : paired_risk_difference(scn, a, b, cfg.reps, cfg.seed, opts));
      }
    }
  }
}

int run_check(const CheckRequest& req, std::ostream& out, std::ostream* csv_out) {
  if (req.p < 3) throw UsageError(fmt::format("p must be >= 3, got {}", req.p), 0, "p");
  if (req.n_obs <= req.p) throw UsageError(fmt::format("N must exceed p, got N = {}", req.n_obs), 0, "N");
  ShrinkageFunction r = [&] {
    try {
      return parse_shrinkage(req.fn, req.p, req.n_obs);
    } catch (const Error& e) {
      throw UsageError(e.what(), 0, "fn");
    }
  }();

  const auto minimax = check_minimax_conditions(r, req.p, req.n_obs, default_minimax_grid(1e-4, 1e4, req.grid_points));
  const auto necessary = check_necessary_conditions(r, req.p, req.n_obs);
  const auto samples = reference_f_samples(req.p, req.n_obs, req.schwartz_samples, req.seed);
  const auto schwartz = check_schwartz_integrability(r, samples);

  out << fmt::format("shrinkage function {} (p = {}, N = {})\n", r.name(), req.p, req.n_obs);
  out << "\nminimaxity (sufficient conditions)\n" << render_report_text(minimax);
  out << "\ndominance over James-Stein (necessary conditions)\n" << render_report_text(necessary);
  out << fmt::format("\nintegrability against F under the Gaussian reference scenario ({} samples, seed {})\n",
                     samples.size(), req.seed)
      << render_report_text(schwartz);

  ConditionReport all = minimax;
  all.append(necessary);
  all.append(schwartz);
  if (csv_out) *csv_out << render_report_csv(all);
  return all.any_fail() ? kExitConditionFailed : kExitOk;
}

int run_identity(const IdentityRequest& req, std::ostream& out) {
  if (req.p < 3) throw UsageError(fmt::format("p must be >= 3, got {}", req.p), 0, "p");
  if (req.dof < req.p) {
    throw UsageError(fmt::format("n must be >= p (n = {}, p = {})", req.dof, req.p), 0, "n");
  }
  if (!(req.alpha > 0.0) || !(req.beta > 0.0)) throw UsageError("alpha and beta must be positive");
  if (req.reps < 100) throw UsageError("reps must be >= 100", 0, "reps");
  SteinIdentityParams prm;
  prm.alpha = req.alpha;
  prm.beta = req.beta;
  prm.dof = req.dof;
  prm.sigma = SpdMatrix::identity(req.p);
  prm.theta = Vector::Zero(req.p);
  prm.theta(0) = req.theta_norm;
  try {
    // The shrinkage constants are indexed by N = n + 1.
    prm.r = parse_shrinkage(req.fn, req.p, req.dof + 1);
  } catch (const Error& e) {
    throw UsageError(e.what(), 0, "fn");
  }
  prm.reps = req.reps;
  prm.seed = req.seed;
  prm.perturb = req.perturb;
  prm.mc.threads = req.threads;

  const auto report = stein_identity_check(prm);
  out << fmt::format("Stein-type identities: p = {}, n = {}, alpha = {}, beta = {}, |theta| = {}, r = {}, reps = {}, "
                     "seed = {}{}\n",
                     req.p, req.dof, req.alpha, req.beta, req.theta_norm, prm.r.name(), req.reps, req.seed,
                     req.perturb != 1.0 ? fmt::format(", rhs perturbed by {}", req.perturb) : "");
  out << fmt::format("{:<18} {:>24} {:>12} {:>24} {:>12} {:>10}  {}\n", "identity", "lhs", "lhs_se", "rhs", "rhs_se",
                     "z", "verdict");
  auto line = [&](const IdentityCheck& c, std::string_view verdict) {
    out << fmt::format("{:<18} {:>24.17g} {:>12.4g} {:>24.17g} {:>12.4g} {:>10.3f}  {}\n", c.name, c.lhs.mean,
                       c.lhs.std_error, c.rhs.mean, c.rhs.std_error, c.z, verdict);
  };
  line(report.cross, report.cross.pass ? "pass" : "fail");
  line(report.quadratic, report.quadratic.pass ? "pass" : "fail");
  line(report.cross_conditional, report.cross_conditional.pass ? "(diagnostic) agrees" : "(diagnostic) differs");
  return report.passed() ? kExitOk : kExitConditionFailed;
}

int run_posterior(const std::filesystem::path& data, const std::vector<std::string>& points, std::ostream& out) {
  Matrix rows;
  try {
    rows = read_csv_matrix(data);
  } catch (const Error& e) {
    throw UsageError(e.what(), 0, "data");
  }
  const auto stats = [&] {
    try {
      return sufficient_stats(Dataset(rows));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateScatter) throw;
      throw UsageError(e.what(), 0, "data");
    }
  }();
  const PosteriorT post(stats);
  out << "point,logpdf\n";
  for (const auto& pt : points) {
    const auto fields = detail::split(pt, ',');
    Vector theta(static_cast<Eigen::Index>(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      auto v = detail::parse_double(fields[i]);
      if (!v) throw UsageError(fmt::format("'{}' is not a comma-separated point", pt), 0, "at");
      theta(static_cast<Eigen::Index>(i)) = *v;
    }
    if (theta.size() != post.dim()) {
      throw UsageError(fmt::format("point '{}' has {} coordinates, data has p = {}", pt, theta.size(), post.dim()), 0,
                       "at");
    }
    out << csv_field(pt) << ',' << format_decimal(posterior_logpdf(theta, post)) << '\n';
  }
  return kExitOk;
}

}  // namespace ellshrink
