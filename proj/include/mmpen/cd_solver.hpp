#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mmpen/penalties.hpp"

namespace mmpen {

/// Working copy of a design matrix prepared once and reused by every
/// coordinate-descent solve on it. With `center` (and an intercept) the
/// columns are centered so the intercept decouples from the slopes. Column
/// scaling is not applied: exact coordinate minimization is invariant to
/// it, and the penalty is always on the original coefficient scale.
class Design {
 public:
  Design(const Eigen::MatrixXd& x, bool intercept, bool center = true);

  Eigen::Index n() const noexcept { return work_.rows(); }
  Eigen::Index p() const noexcept { return work_.cols(); }
  bool intercept() const noexcept { return intercept_; }
  bool centered() const noexcept { return centered_; }

  const Eigen::MatrixXd& work() const noexcept { return work_; }
  const Eigen::VectorXd& means() const noexcept { return means_; }
  const Eigen::VectorXd& sumsq() const noexcept { return sumsq_; }
  /// Columns with no usable variation; their slopes stay at zero.
  bool degenerate(Eigen::Index j) const noexcept { return degenerate_[static_cast<std::size_t>(j)]; }

 private:
  Eigen::MatrixXd work_;
  Eigen::VectorXd means_;
  Eigen::VectorXd sumsq_;
  std::vector<bool> degenerate_;
  bool intercept_;
  bool centered_;
};

struct CdConfig {
  double tol = 1e-10;      // relative change of the objective between sweeps
  int max_sweeps = 10000;
  bool standardize = true;  // center columns when an intercept is present

  void validate() const;
};

/// Penalized weighted least squares
///   (B / 2n) sum_i (h_i - x_i' phi)^2 + sum_j [alpha p(|b_j|) + lambda (1 - alpha)/2 b_j^2].
struct PwlsProblem {
  const Design& design;
  Eigen::VectorXd h;
  double bound;  // B
  PenaltySpec penalty;
  double lambda;
};

struct PwlsResult {
  Eigen::VectorXd phi;      // original scale, length p + 1
  Eigen::VectorXd fitted;   // x_i' phi as tracked by the solver's residual
  std::vector<double> objective_trace;  // one entry per sweep, starting at the warm start
  int sweeps = 0;
  bool converged = false;
};

double pwls_objective(const PwlsProblem& prob, const Eigen::VectorXd& phi);

/// Cyclic coordinate descent in ascending column order with the two-level
/// active-set protocol: converge on the active set, sweep every allowed
/// coordinate once, and repeat until the active set is stable.
///
/// `allowed`, when given, restricts which slopes may move; the rest are held
/// at zero. Never throws on non-convergence; check `converged`.
PwlsResult solve_pwls_unchecked(const PwlsProblem& prob, const CdConfig& cfg,
                                const std::optional<Eigen::VectorXd>& warm = std::nullopt,
                                const std::vector<bool>* allowed = nullptr);

/// As solve_pwls_unchecked but throws ConvergenceError when max_sweeps is hit.
PwlsResult solve_pwls(const PwlsProblem& prob, const CdConfig& cfg,
                      const std::optional<Eigen::VectorXd>& warm = std::nullopt);

}  // namespace mmpen
