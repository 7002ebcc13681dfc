#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mmpen/dataset.hpp"

namespace mmpen {

enum class LossFamily { LeastSquares, Huber, Logistic, ClossR, Closs, Gloss, Qloss };

/// A loss family bound to its shape parameter and task. Immutable once
/// built; the curvature bound B >= sup Gamma''(u) is computed at construction.
///
/// For regression the loss is evaluated at the residual u = y - f, for
/// classification at the margin u = y * f.
class LossSpec {
 public:
  /// `sigma` is the shape parameter (Huber: delta). When omitted the family
  /// default is used. Throws ConfigError on an invalid shape or a family/task
  /// combination that is not supported.
  LossSpec(LossFamily family, Task task, std::optional<double> sigma = std::nullopt);

  /// Family and task resolved from a case-insensitive name ("ls", "huber",
  /// "logistic", "clossr", "closs", "gloss", "qloss"); task follows the family.
  static LossSpec from_name(const std::string& name, std::optional<double> sigma = std::nullopt);

  LossFamily family() const noexcept { return family_; }
  Task task() const noexcept { return task_; }
  double sigma() const noexcept { return sigma_; }
  double curvature_bound() const noexcept { return bound_; }
  bool convex() const noexcept;
  std::string name() const;

  static double default_sigma(LossFamily family);
  static Task native_task(LossFamily family);

 private:
  LossFamily family_;
  Task task_;
  double sigma_;
  double bound_;
};

std::string to_string(LossFamily family);
LossFamily loss_family_from_string(const std::string& name);

/// Gamma(u).
double loss_value(const LossSpec& spec, double u);
/// dGamma/du.
double loss_grad(const LossSpec& spec, double u);
/// Closed-form curvature bound B (same value cached on the spec).
double curvature_bound(const LossSpec& spec);

/// d/df Gamma(psi(f)) for one observation: -Gamma'(y - f) for regression,
/// y * Gamma'(y f) for classification.
double observation_gradient(const LossSpec& spec, double y, double f);

/// Pseudo-response h_i that turns the quadratic majorizer into a least
/// squares term (B/2)(h_i - f)^2 + const around z_i.
double working_response(const LossSpec& spec, double y, double z, double bound);

/// (1/n) sum_i Gamma(psi(x_i' phi)). `phi` has length p + 1.
double empirical_loss(const LossSpec& spec, const Dataset& data, const Eigen::VectorXd& phi);
/// Same, from precomputed linear predictors.
double empirical_loss_at(const LossSpec& spec, const Eigen::VectorXd& y, const Eigen::VectorXd& f);

namespace detail {

template <class T>
T softplus(T u) {
  using std::exp;
  using std::log1p;
  return (u > T(0) ? u : T(0)) + log1p(exp(-(u < T(0) ? -u : u)));
}

template <class T>
T sigmoid(T u) {
  using std::exp;
  if (u >= T(0)) return T(1) / (T(1) + exp(-u));
  const T e = exp(u);
  return e / (T(1) + e);
}

template <class T>
T closs_scale(T sigma) {
  using std::expm1;
  return T(1) / -expm1(T(-1) / (T(2) * sigma * sigma));
}

/// Gamma(u) generic over the floating type so numerical oracles can run in
/// extended precision.
template <class T>
T loss_value_impl(LossFamily family, T sigma, T u) {
  using std::abs;
  using std::erfc;
  using std::exp;
  using std::expm1;
  using std::log;
  switch (family) {
    case LossFamily::LeastSquares:
      return u * u;
    case LossFamily::Huber:
      return abs(u) <= sigma ? u * u / T(2) : sigma * abs(u) - sigma * sigma / T(2);
    case LossFamily::Logistic:
      return softplus(-u) / std::numbers::ln2_v<T>;
    case LossFamily::ClossR:
      return -expm1(-u * u / (T(2) * sigma * sigma));
    case LossFamily::Closs: {
      const T m = T(1) - u;
      return closs_scale(sigma) * -expm1(-m * m / (T(2) * sigma * sigma));
    }
    case LossFamily::Gloss:
      return exp(sigma * (std::numbers::ln2_v<T> - softplus(u)));
    case LossFamily::Qloss:
      return erfc(u / (sigma * std::numbers::sqrt2_v<T>));
  }
  return T(0);
}

}  // namespace detail

}  // namespace mmpen
