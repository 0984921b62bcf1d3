#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mixfx/catalogue.hpp"
#include "mixfx/suffstats.hpp"
#include "mixfx/types.hpp"

namespace mixfx {

struct EmOptions {
  double tol_factor = 1e-8; // convergence when |delta loglik| < tol_factor * n
  int max_iter = 500;
};

struct FitDiagnostics {
  std::size_t excluded_degenerate = 0; // subjects dropped for V < 1e-12
  bool boundary = false;               // theta_hat touches the box boundary
  std::string note;
};

struct FitResult {
  MixtureParams theta_hat;          // canonicalized, valid in the box
  std::vector<double> loglik_trace; // init value, then one entry per sweep
  bool converged = false;
  std::string reason;               // "tol_reached" | "max_iter" | solver-specific
  Eigen::MatrixXd observed_info;    // -Hessian of total loglik at theta_hat (chart)
  std::size_t n = 0;                // subjects actually used
  FitDiagnostics diagnostics;

  double final_loglik() const { return loglik_trace.back(); }
};

// ECM: exact E-step; exact constrained weight step (KKT water-filling onto the
// a_min simplex); exact boxed mean step; safeguarded, backtracked 1-D Newton
// on the omega2 profile. Log likelihood is nondecreasing sweep over sweep by
// construction; a decrease beyond 1e-8*n throws InternalError (bug trap).
FitResult em_fit(std::span<const SuffStats> stats, std::size_t M,
                 const ParamBox& box, const MixtureParams& init,
                 const EmOptions& opts = {});

// Quasi-Newton (BFGS) maximization in the unconstrained chart with analytic
// gradients; result mapped back into the box and canonicalized.
FitResult direct_fit(std::span<const SuffStats> stats, std::size_t M,
                     const ParamBox& box, const MixtureParams& init,
                     const EmOptions& opts = {});

// Deterministic data-driven starting point: 1-D k-means (quantile init) on
// {U_i/V_i} for the means, within-cluster variance minus the mean of 1/V_i
// (floored into the box) for omega2, cluster shares for the weights.
MixtureParams moment_init(std::span<const SuffStats> stats, std::size_t M,
                          const ParamBox& box);

// Best-of-K em_fit: start 1 is moment_init, starts 2..K are chart-space
// jitters of it (seeded). Deterministic given (stats, seed); ties keep the
// earliest start.
FitResult multistart_fit(std::span<const SuffStats> stats, std::size_t M,
                         const ParamBox& box, int restarts, std::uint64_t seed,
                         const EmOptions& opts = {});

struct BicRow {
  std::size_t M = 0;
  double loglik = 0.0;
  double bic = 0.0;
};

struct BicSelection {
  std::size_t best_M = 0;
  std::vector<BicRow> table; // ordered by M ascending
  std::vector<FitResult> fits;
};

// BIC(M) = -2 max-loglik + (3M-1) log n over a range of component counts;
// smallest BIC wins, ties to the smaller M. Each M is fit by multistart_fit,
// with one extra start that splits a component of the previous M's winner
// (keeps the fitted loglik nondecreasing in M up to solver tolerance).
BicSelection bic_select(std::span<const SuffStats> stats,
                        const std::vector<std::size_t>& M_range,
                        const ParamBox& box, int restarts, std::uint64_t seed,
                        const EmOptions& opts = {});

// Monte Carlo Fisher information at theta: average over R fresh subjects of
// score * score^T in chart coordinates. Also reports the averaged Hessian
// (for the information identity E[g g^T] = -E[H]) and the entrywise standard
// error of the g g^T average (Frobenius-aggregated).
struct InfoEstimate {
  Eigen::MatrixXd score_outer;  // E-hat[g g^T]
  Eigen::MatrixXd mean_hessian; // E-hat[H]
  double se_frobenius = 0.0;    // ||entrywise s.e. of score_outer||_F
  std::size_t R = 0;
};

InfoEstimate expected_info_mc(const MixtureParams& theta, const SdeModel& model,
                              const SubjectDesign& design, std::size_t R,
                              double dt, std::uint64_t seed,
                              bool with_hessian = true);

} // namespace mixfx
