#pragma once

#include <cstdint>
#include <string>

#include "mixfx/experiments.hpp"
#include "mixfx/mle.hpp"
#include "mixfx/prior.hpp"
#include "mixfx/types.hpp"

namespace mixfx {

// JSON config parsing for the command-line front end. Fail-closed: every
// config carries "schema_version": 1, unknown fields are rejected, and every
// error is a ConfigError whose pointer() names the offending field
// ("/theta0/omega2/0" style).

struct SimulateConfig {
  std::string model = "linear";
  MixtureParams theta0;
  ParamBox box;
  std::size_t n = 0;
  DesignMode design_mode = DesignMode::Iid;
  SubjectDesign design;
  NonIidSpec noniid;
  double dt = 1e-2;
  std::uint64_t seed = 1;
};

struct SuffstatsConfig {
  std::string model = "linear";
  std::string cohort_csv;
};

struct FitConfig {
  std::string method = "em"; // em | direct | bayes
  std::string stats_csv;
  std::size_t M = 1;
  ParamBox box;
  int restarts = 4;
  EmOptions em;
  std::size_t mcmc_iterations = 50000;
  PriorSpec prior;
  std::uint64_t seed = 1;
};

struct ExperimentFileConfig {
  std::string kind; // consistency | mle_normality | posterior | kl_info_limits
  ExperimentConfig exp;
};

SimulateConfig parse_simulate_config(const std::string& json_text);
SuffstatsConfig parse_suffstats_config(const std::string& json_text);
FitConfig parse_fit_config(const std::string& json_text);
ExperimentFileConfig parse_experiment_file(const std::string& json_text);

} // namespace mixfx
