#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "mmpen/dataset.hpp"
#include "mmpen/losses.hpp"
#include "mmpen/penalties.hpp"

namespace mmpen {

enum class KktRule { Intercept, NonzeroStationarity, ZeroSubgradientBound };

struct KktReport {
  Eigen::VectorXd residuals;  // length p + 1; entry 0 is the intercept
  double max_residual = 0.0;
  std::vector<Eigen::Index> active_set;  // slopes (1-based coefficient index) that are nonzero
  std::vector<KktRule> rule_used;
};

/// (1/n) sum_i dL_i/dphi, length p + 1 (entry 0 is zero without an intercept).
Eigen::VectorXd loss_gradient(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& phi);

/// First-order optimality residuals: stationarity on nonzero slopes, the
/// subgradient bound |grad_j| <= alpha lambda on zero slopes, and the
/// intercept gradient.
KktReport kkt_residual(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                       double lambda, const Eigen::VectorXd& phi);

struct DiniProbe {
  bool stationary = true;
  double worst_ratio = 0.0;  // min over directions of (F(phi + tau e) - F(phi)) / tau
  Eigen::VectorXd worst_direction;
  int directions = 0;
};

/// Looks for a descent direction at phi among all signed coordinate axes and
/// `n_dirs` seeded uniform directions on the unit sphere of free coefficients.
/// A ratio below -10 tau counts as descent.
DiniProbe dini_stationarity_probe(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                                  double lambda, const Eigen::VectorXd& phi, int n_dirs = 200,
                                  double tau = 1e-5, std::uint64_t seed = 0x5eed);

/// Worst |loss_grad - central difference| / max(1, |grad|) over random u in [-20, 20].
double fd_gradient_check(const LossSpec& loss, int n_samples, std::uint64_t seed = 1);

struct MajorizationAudit {
  double worst_violation = 0.0;  // max of Gamma(u) - gamma(u|z), floored at 0
  double worst_tangency = 0.0;   // max |gamma(z|z) - Gamma(z)|
};

/// Checks Gamma(u) <= Gamma(z) + Gamma'(z)(u - z) + B/2 (u - z)^2 on random pairs.
MajorizationAudit majorization_audit(const LossSpec& loss, int n_samples, std::uint64_t seed = 2);

/// Largest central second difference of Gamma (extended precision, less its
/// rounding allowance) over an evenly spaced grid on [-50 sigma - 50, 50 sigma + 50].
double numeric_curvature_max(const LossSpec& loss, int n_grid = 1000000);

}  // namespace mmpen
