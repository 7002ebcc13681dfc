#pragma once

#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mmpen/cd_solver.hpp"
#include "mmpen/dataset.hpp"
#include "mmpen/losses.hpp"
#include "mmpen/penalties.hpp"

namespace mmpen {

enum class InitMode { Zeros, InterceptOnly, ConvexPilot, Custom };

struct FitConfig {
  double outer_tol = 1e-9;  // relative change of F between MM iterations
  int max_outer = 500;
  InitMode init = InitMode::ConvexPilot;
  Eigen::VectorXd custom_init;  // used when init == Custom
  /// Restrict MM iterations to the current support and verify with one
  /// unrestricted iteration before accepting convergence.
  bool active_set = true;

  void validate() const;
};

struct FitResult {
  Eigen::VectorXd phi;
  std::vector<double> objective_trace;  // F at the initial value and after each MM iteration
  int n_outer = 0;
  int cd_sweeps = 0;
  bool converged = false;
  double kkt_max_residual = std::numeric_limits<double>::quiet_NaN();
};

/// Penalized objective F(phi) = empirical loss + sum of slope penalties.
double objective(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen, double lambda,
                 const Eigen::VectorXd& phi);

struct InterceptFit {
  double beta0 = 0.0;
  bool at_boundary = false;
};

/// Minimizer of (1/n) sum Gamma(psi(b0)) over b0 in [-R, R],
/// R = max(10, 10 max|y|). Zero when the data has no intercept.
InterceptFit intercept_only_fit_detail(const Dataset& data, const LossSpec& loss);
double intercept_only_fit(const Dataset& data, const LossSpec& loss);

/// Starting value for `fit` under cfg.init.
Eigen::VectorXd initial_phi(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                            double lambda, const FitConfig& cfg, const CdConfig& cd);

/// MM with quadratic majorization: rebuild the working response at the
/// current fit, solve the penalized least-squares surrogate by coordinate
/// descent, repeat. Throws ConvergenceError when max_outer is exhausted and
/// InternalError if F ever increases.
FitResult fit(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen, double lambda,
              const FitConfig& cfg = {}, const CdConfig& cd = {});

/// Same iteration on a prepared design, starting from `start`. Returns with
/// converged = false instead of throwing when max_outer is exhausted.
FitResult fit_from(const Design& design, const Dataset& data, const LossSpec& loss,
                   const PenaltySpec& pen, double lambda, const Eigen::VectorXd& start,
                   const FitConfig& cfg, const CdConfig& cd);

/// Unpenalized MM: each surrogate is solved as ordinary least squares on the
/// working response (minimum-norm solution when the design is rank deficient).
FitResult fit_unpenalized(const Dataset& data, const LossSpec& loss, const FitConfig& cfg = {});

}  // namespace mmpen
