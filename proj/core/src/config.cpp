#include "mixfx/config.hpp"

#include <initializer_list>
#include <string_view>

#include <json.hpp>

#include "mixfx/catalogue.hpp"
#include "mixfx/errors.hpp"
#include "mixfx/version.hpp"

namespace mixfx {

namespace {

using nlohmann::json;

json parse_root(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  const auto it = j.find("schema_version");
  if (it == j.end()) throw ConfigError("/schema_version", "missing");
  if (!it->is_number_integer() || it->get<int>() != kSchemaVersion)
    throw ConfigError("/schema_version",
                      "unsupported (expected " + std::to_string(kSchemaVersion) + ")");
  return j;
}

// Fail-closed: any key outside the allowed set is an error at `base`/key.
void reject_unknown(const json& j, const std::string& base,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (auto a : allowed)
      if (key == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError(base + "/" + key, "unknown field");
  }
}

const json& require(const json& j, const std::string& base, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(base + "/" + key, "missing");
  return *it;
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  return j.get<double>();
}

std::uint64_t as_u64(const json& j, const std::string& where) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw ConfigError(where, "expected a nonnegative integer");
  return j.get<std::uint64_t>();
}

std::size_t as_count(const json& j, const std::string& where) {
  return static_cast<std::size_t>(as_u64(j, where));
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where, "expected a string");
  return j.get<std::string>();
}

std::vector<double> as_double_array(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(as_number(j[i], where + "/" + std::to_string(i)));
  return out;
}

MixtureParams parse_params(const json& j, const std::string& base) {
  if (!j.is_object()) throw ConfigError(base, "expected an object");
  reject_unknown(j, base, {"weights", "means", "omega2"});
  MixtureParams theta;
  theta.weights = as_double_array(require(j, base, "weights"), base + "/weights");
  theta.means = as_double_array(require(j, base, "means"), base + "/means");
  theta.omega2 = as_double_array(require(j, base, "omega2"), base + "/omega2");
  return theta;
}

ParamBox parse_box(const json& root, const std::string& base) {
  ParamBox box;
  const auto it = root.find("box");
  if (it == root.end()) return box;
  const json& j = *it;
  if (!j.is_object()) throw ConfigError(base, "expected an object");
  reject_unknown(j, base, {"a_min", "mu_lo", "mu_hi", "omega2_lo", "omega2_hi"});
  if (j.contains("a_min")) box.a_min = as_number(j["a_min"], base + "/a_min");
  if (j.contains("mu_lo")) box.mu_lo = as_number(j["mu_lo"], base + "/mu_lo");
  if (j.contains("mu_hi")) box.mu_hi = as_number(j["mu_hi"], base + "/mu_hi");
  if (j.contains("omega2_lo"))
    box.omega2_lo = as_number(j["omega2_lo"], base + "/omega2_lo");
  if (j.contains("omega2_hi"))
    box.omega2_hi = as_number(j["omega2_hi"], base + "/omega2_hi");
  for (const auto& v : validate_box(box))
    throw ConfigError(base + "/" + v.path, v.message);
  return box;
}

void check_params(const MixtureParams& theta, const ParamBox& box,
                  const std::string& base) {
  const auto violations = validate_params(theta, theta.M(), box);
  if (!violations.empty())
    throw ConfigError(base + "/" + violations.front().path,
                      violations.front().message);
}

// design: {"mode":"iid","x0":..,"T":..} or
//         {"mode":"noniid","x1":..,"x_inf":..,"T1":..,"T_inf":..}
void parse_design(const json& root, const std::string& base, DesignMode& mode,
                  SubjectDesign& iid, NonIidSpec& noniid) {
  const json& j = require(root, "", "design");
  if (!j.is_object()) throw ConfigError(base, "expected an object");
  const std::string m = as_string(require(j, base, "mode"), base + "/mode");
  if (m == "iid") {
    reject_unknown(j, base, {"mode", "x0", "T"});
    mode = DesignMode::Iid;
    iid.x0 = as_number(require(j, base, "x0"), base + "/x0");
    iid.T = as_number(require(j, base, "T"), base + "/T");
    if (!(iid.T > 0.0)) throw ConfigError(base + "/T", "must be positive");
  } else if (m == "noniid") {
    reject_unknown(j, base, {"mode", "x1", "x_inf", "T1", "T_inf"});
    mode = DesignMode::NonIid;
    noniid.x1 = as_number(require(j, base, "x1"), base + "/x1");
    noniid.x_inf = as_number(require(j, base, "x_inf"), base + "/x_inf");
    noniid.T1 = as_number(require(j, base, "T1"), base + "/T1");
    noniid.T_inf = as_number(require(j, base, "T_inf"), base + "/T_inf");
    if (!(noniid.T1 > 0.0) || !(noniid.T_inf > 0.0))
      throw ConfigError(base + "/T1", "horizons must be positive");
  } else {
    throw ConfigError(base + "/mode", "expected 'iid' or 'noniid'");
  }
}

PriorSpec parse_prior(const json& parent, const std::string& base,
                      const ParamBox& box) {
  PriorSpec prior;
  prior.box = box;
  const auto it = parent.find("prior");
  if (it == parent.end()) return prior;
  const json& j = *it;
  if (!j.is_object()) throw ConfigError(base, "expected an object");
  const std::string kind = as_string(require(j, base, "kind"), base + "/kind");
  if (kind == "uniform") {
    reject_unknown(j, base, {"kind"});
    prior.kind = PriorKind::Uniform;
  } else if (kind == "truncated_normal") {
    reject_unknown(j, base,
                   {"kind", "mu_mean", "mu_sd", "omega2_mean", "omega2_sd"});
    prior.kind = PriorKind::TruncatedNormal;
    if (j.contains("mu_mean")) prior.mu_mean = as_number(j["mu_mean"], base + "/mu_mean");
    if (j.contains("mu_sd")) prior.mu_sd = as_number(j["mu_sd"], base + "/mu_sd");
    if (j.contains("omega2_mean"))
      prior.omega2_mean = as_number(j["omega2_mean"], base + "/omega2_mean");
    if (j.contains("omega2_sd"))
      prior.omega2_sd = as_number(j["omega2_sd"], base + "/omega2_sd");
    if (!(prior.mu_sd > 0.0)) throw ConfigError(base + "/mu_sd", "must be positive");
    if (!(prior.omega2_sd > 0.0))
      throw ConfigError(base + "/omega2_sd", "must be positive");
  } else {
    throw ConfigError(base + "/kind", "expected 'uniform' or 'truncated_normal'");
  }
  return prior;
}

std::string parse_model(const json& root) {
  const std::string name = as_string(require(root, "", "model"), "/model");
  find_model(name); // unknown names throw with pointer /model
  return name;
}

} // namespace

SimulateConfig parse_simulate_config(const std::string& json_text) {
  const json root = parse_root(json_text);
  reject_unknown(root, "",
                 {"schema_version", "model", "theta0", "box", "n", "design", "dt",
                  "seed"});
  SimulateConfig cfg;
  cfg.model = parse_model(root);
  cfg.box = parse_box(root, "/box");
  cfg.theta0 = parse_params(require(root, "", "theta0"), "/theta0");
  check_params(cfg.theta0, cfg.box, "/theta0");
  cfg.n = as_count(require(root, "", "n"), "/n");
  if (cfg.n == 0) throw ConfigError("/n", "must be positive");
  parse_design(root, "/design", cfg.design_mode, cfg.design, cfg.noniid);
  cfg.dt = as_number(require(root, "", "dt"), "/dt");
  if (!(cfg.dt > 0.0)) throw ConfigError("/dt", "must be positive");
  if (root.contains("seed")) cfg.seed = as_u64(root["seed"], "/seed");
  return cfg;
}

SuffstatsConfig parse_suffstats_config(const std::string& json_text) {
  const json root = parse_root(json_text);
  reject_unknown(root, "", {"schema_version", "model", "cohort_csv"});
  SuffstatsConfig cfg;
  cfg.model = parse_model(root);
  cfg.cohort_csv = as_string(require(root, "", "cohort_csv"), "/cohort_csv");
  return cfg;
}

FitConfig parse_fit_config(const std::string& json_text) {
  const json root = parse_root(json_text);
  reject_unknown(root, "",
                 {"schema_version", "method", "stats_csv", "M", "box", "restarts",
                  "max_iter", "tol_factor", "mcmc", "prior", "seed"});
  FitConfig cfg;
  cfg.method = as_string(require(root, "", "method"), "/method");
  if (cfg.method != "em" && cfg.method != "direct" && cfg.method != "bayes")
    throw ConfigError("/method", "expected 'em', 'direct', or 'bayes'");
  cfg.stats_csv = as_string(require(root, "", "stats_csv"), "/stats_csv");
  cfg.M = as_count(require(root, "", "M"), "/M");
  if (cfg.M == 0) throw ConfigError("/M", "must be positive");
  cfg.box = parse_box(root, "/box");
  if (static_cast<double>(cfg.M) * cfg.box.a_min >= 1.0)
    throw ConfigError("/M", "too many components for the simplex floor");
  if (root.contains("restarts")) {
    cfg.restarts = static_cast<int>(as_u64(root["restarts"], "/restarts"));
    if (cfg.restarts < 1) throw ConfigError("/restarts", "must be positive");
  }
  if (root.contains("max_iter"))
    cfg.em.max_iter = static_cast<int>(as_u64(root["max_iter"], "/max_iter"));
  if (root.contains("tol_factor")) {
    cfg.em.tol_factor = as_number(root["tol_factor"], "/tol_factor");
    if (!(cfg.em.tol_factor > 0.0))
      throw ConfigError("/tol_factor", "must be positive");
  }
  if (root.contains("mcmc")) {
    const json& j = root["mcmc"];
    if (!j.is_object()) throw ConfigError("/mcmc", "expected an object");
    reject_unknown(j, "/mcmc", {"iterations"});
    if (j.contains("iterations"))
      cfg.mcmc_iterations = as_count(j["iterations"], "/mcmc/iterations");
  }
  if (cfg.method == "bayes" && cfg.mcmc_iterations < 1000)
    throw ConfigError("/mcmc/iterations", "needs at least 1000");
  cfg.prior = parse_prior(root, "/prior", cfg.box);
  if (root.contains("seed")) cfg.seed = as_u64(root["seed"], "/seed");
  return cfg;
}

ExperimentFileConfig parse_experiment_file(const std::string& json_text) {
  const json root = parse_root(json_text);
  reject_unknown(root, "",
                 {"schema_version", "kind", "model", "theta0", "box", "ladder",
                  "replicates", "dt", "design", "estimator", "restarts", "seed",
                  "mcmc", "prior", "info_replicates", "limit_replicates",
                  "theta_alt"});
  ExperimentFileConfig out;
  out.kind = as_string(require(root, "", "kind"), "/kind");
  if (out.kind != "consistency" && out.kind != "mle_normality" &&
      out.kind != "posterior" && out.kind != "kl_info_limits")
    throw ConfigError("/kind", "unknown experiment kind '" + out.kind + "'");

  ExperimentConfig& cfg = out.exp;
  cfg.model = parse_model(root);
  cfg.box = parse_box(root, "/box");
  cfg.theta0 = parse_params(require(root, "", "theta0"), "/theta0");
  check_params(cfg.theta0, cfg.box, "/theta0");

  const json& ladder = require(root, "", "ladder");
  if (!ladder.is_array() || ladder.empty())
    throw ConfigError("/ladder", "expected a non-empty array");
  for (std::size_t i = 0; i < ladder.size(); ++i)
    cfg.ladder.push_back(as_count(ladder[i], "/ladder/" + std::to_string(i)));

  cfg.replicates = as_count(require(root, "", "replicates"), "/replicates");
  cfg.dt = as_number(require(root, "", "dt"), "/dt");
  parse_design(root, "/design", cfg.design_mode, cfg.iid_design, cfg.noniid);

  if (root.contains("estimator")) {
    const std::string est = as_string(root["estimator"], "/estimator");
    if (est == "em") cfg.estimator = Estimator::Em;
    else if (est == "direct") cfg.estimator = Estimator::Direct;
    else if (est == "bayes") cfg.estimator = Estimator::Bayes;
    else throw ConfigError("/estimator", "expected 'em', 'direct', or 'bayes'");
  }
  if (root.contains("restarts")) {
    cfg.restarts = static_cast<int>(as_u64(root["restarts"], "/restarts"));
    if (cfg.restarts < 1) throw ConfigError("/restarts", "must be positive");
  }
  if (root.contains("seed")) cfg.seed = as_u64(root["seed"], "/seed");
  if (root.contains("mcmc")) {
    const json& j = root["mcmc"];
    if (!j.is_object()) throw ConfigError("/mcmc", "expected an object");
    reject_unknown(j, "/mcmc", {"iterations"});
    if (j.contains("iterations"))
      cfg.mcmc_iterations = as_count(j["iterations"], "/mcmc/iterations");
  }
  cfg.prior = parse_prior(root, "/prior", cfg.box);
  if (root.contains("info_replicates"))
    cfg.info_replicates = as_count(root["info_replicates"], "/info_replicates");
  if (root.contains("limit_replicates"))
    cfg.limit_replicates = as_count(root["limit_replicates"], "/limit_replicates");
  if (root.contains("theta_alt")) {
    cfg.theta_alt = parse_params(root["theta_alt"], "/theta_alt");
    check_params(*cfg.theta_alt, cfg.box, "/theta_alt");
  }

  const auto violations = validate_experiment_config(cfg);
  if (!violations.empty())
    throw ConfigError(violations.front().path, violations.front().message);
  return out;
}

} // namespace mixfx
