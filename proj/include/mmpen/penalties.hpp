#pragma once

#include <optional>
#include <string>

#include <Eigen/Dense>

namespace mmpen {

enum class PenaltyFamily { Lasso, Scad, Mcp };

/// Sparse penalty p_lambda with elastic-net mixing: each slope contributes
/// alpha * p_lambda(|b|) + lambda * (1 - alpha) / 2 * b^2.
class PenaltySpec {
 public:
  /// `a` defaults to 3.7 for SCAD and 3 for MCP. Throws ConfigError when
  /// SCAD a <= 2, MCP a <= 1, or alpha is outside (0, 1].
  explicit PenaltySpec(PenaltyFamily family, std::optional<double> a = std::nullopt,
                       double alpha = 1.0);

  static PenaltySpec from_name(const std::string& name, std::optional<double> a = std::nullopt,
                               double alpha = 1.0);

  PenaltyFamily family() const noexcept { return family_; }
  double a() const noexcept { return a_; }
  double alpha() const noexcept { return alpha_; }
  std::string name() const;

  static double default_a(PenaltyFamily family);

 private:
  PenaltyFamily family_;
  double a_;
  double alpha_;
};

std::string to_string(PenaltyFamily family);
PenaltyFamily penalty_family_from_string(const std::string& name);

/// p_lambda(theta) for theta >= 0.
double penalty_value(const PenaltySpec& spec, double lambda, double theta);

/// p'_lambda(theta) for theta > 0.
double penalty_deriv(const PenaltySpec& spec, double lambda, double theta);

/// Exact minimizer over b of
///   (v/2) b^2 - z b + alpha p_lambda(|b|) + lambda (1 - alpha)/2 b^2.
/// Uses the closed-form regimes when the scalar problem is convex and an exact
/// piecewise-quadratic comparison otherwise. Ties go to the smaller |b|.
double threshold_update(const PenaltySpec& spec, double z, double v, double lambda);

/// True when the scalar problem solved by threshold_update is strictly convex.
bool threshold_is_convex(const PenaltySpec& spec, double v, double lambda);

/// alpha p_lambda(|b|) + lambda (1 - alpha)/2 b^2 for one slope.
double penalty_term(const PenaltySpec& spec, double lambda, double beta);

/// Sum of penalty_term over the slopes phi[1..p] (the intercept is free).
double penalty_total(const PenaltySpec& spec, double lambda, const Eigen::VectorXd& phi);

}  // namespace mmpen
