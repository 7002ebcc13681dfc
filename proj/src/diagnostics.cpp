#include "mmpen/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "mmpen/errors.hpp"
#include "mmpen/mm_engine.hpp"
#include "mmpen/rng.hpp"

namespace mmpen {

Eigen::VectorXd loss_gradient(const Dataset& data, const LossSpec& loss, const Eigen::VectorXd& phi) {
  const Eigen::VectorXd f = data.predict(phi);
  Eigen::VectorXd g(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) g[i] = observation_gradient(loss, data.y[i], f[i]);
  const double n = static_cast<double>(data.n());
  Eigen::VectorXd out(data.p() + 1);
  out[0] = data.intercept ? g.sum() / n : 0.0;
  out.tail(data.p()) = data.x.transpose() * g / n;
  return out;
}

KktReport kkt_residual(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                       double lambda, const Eigen::VectorXd& phi) {
  if (!phi.allFinite()) throw InputError("kkt_residual: coefficients are not finite");
  const Eigen::VectorXd grad = loss_gradient(data, loss, phi);
  KktReport rep;
  rep.residuals.resize(phi.size());
  rep.residuals[0] = std::abs(grad[0]);
  rep.rule_used.push_back(KktRule::Intercept);
  const double alpha = pen.alpha();
  for (Eigen::Index j = 1; j < phi.size(); ++j) {
    const double b = phi[j];
    if (b != 0.0) {
      const double s = b > 0.0 ? 1.0 : -1.0;
      rep.residuals[j] = std::abs(grad[j] + alpha * s * penalty_deriv(pen, lambda, std::abs(b)) +
                                  lambda * (1.0 - alpha) * b);
      rep.active_set.push_back(j);
      rep.rule_used.push_back(KktRule::NonzeroStationarity);
    } else {
      rep.residuals[j] = std::max(0.0, std::abs(grad[j]) - alpha * lambda);
      rep.rule_used.push_back(KktRule::ZeroSubgradientBound);
    }
  }
  rep.max_residual = rep.residuals.maxCoeff();
  return rep;
}

DiniProbe dini_stationarity_probe(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                                  double lambda, const Eigen::VectorXd& phi, int n_dirs, double tau,
                                  std::uint64_t seed) {
  if (!(tau > 0.0)) throw ConfigError("dini probe: tau must be positive");
  if (n_dirs < 1) throw ConfigError("dini probe: n_dirs must be >= 1");
  const Eigen::Index p = data.p();
  std::vector<Eigen::Index> free;
  if (data.intercept) free.push_back(0);
  for (Eigen::Index j = 1; j <= p; ++j) free.push_back(j);

  const double F0 = objective(data, loss, pen, lambda, phi);
  DiniProbe out;
  out.worst_ratio = std::numeric_limits<double>::infinity();
  auto probe = [&](const Eigen::VectorXd& dir) {
    const double ratio = (objective(data, loss, pen, lambda, phi + tau * dir) - F0) / tau;
    ++out.directions;
    if (ratio < out.worst_ratio) {
      out.worst_ratio = ratio;
      out.worst_direction = dir;
    }
  };
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(p + 1);
  for (Eigen::Index j : free) {
    for (double s : {1.0, -1.0}) {
      dir.setZero();
      dir[j] = s;
      probe(dir);
    }
  }
  Rng rng = Rng::stream(seed, {static_cast<std::uint64_t>(p)});
  for (int k = 0; k < n_dirs && !free.empty(); ++k) {
    dir.setZero();
    for (Eigen::Index j : free) dir[j] = rng.normal();
    dir /= dir.norm();
    probe(dir);
  }
  if (out.directions == 0) out.worst_ratio = 0.0;
  out.stationary = out.worst_ratio >= -10.0 * tau;
  return out;
}

double fd_gradient_check(const LossSpec& loss, int n_samples, std::uint64_t seed) {
  Rng rng(seed);
  constexpr long double h = 1e-5L;
  double worst = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const double u = rng.uniform(-20.0, 20.0);
    const auto s = static_cast<long double>(loss.sigma());
    const long double lu = u;
    const long double fd = (detail::loss_value_impl<long double>(loss.family(), s, lu + h) -
                            detail::loss_value_impl<long double>(loss.family(), s, lu - h)) /
                           (2.0L * h);
    const double g = loss_grad(loss, u);
    worst = std::max(worst, static_cast<double>(std::abs(static_cast<long double>(g) - fd)) /
                                std::max(1.0, std::abs(g)));
  }
  return worst;
}

MajorizationAudit majorization_audit(const LossSpec& loss, int n_samples, std::uint64_t seed) {
  Rng rng(seed);
  const double B = loss.curvature_bound();
  const double span = 10.0 * std::max(1.0, loss.sigma());
  MajorizationAudit out;
  for (int k = 0; k < n_samples; ++k) {
    const double z = rng.uniform(-span, span);
    const double u = rng.uniform(-span, span);
    const double gz = loss_value(loss, z);
    const double major = gz + loss_grad(loss, z) * (u - z) + 0.5 * B * (u - z) * (u - z);
    out.worst_violation = std::max(out.worst_violation, loss_value(loss, u) - major);
    out.worst_tangency = std::max(out.worst_tangency, std::abs(gz - loss_value(loss, z)));
  }
  return out;
}

double numeric_curvature_max(const LossSpec& loss, int n_grid) {
  const long double s = loss.sigma();
  const long double half = 50.0L * s + 50.0L;
  constexpr long double h = 1e-4L;
  constexpr long double eps = std::numeric_limits<long double>::epsilon();
  auto g = [&](long double u) { return detail::loss_value_impl<long double>(loss.family(), s, u); };
  long double best = -std::numeric_limits<long double>::infinity();
  for (int k = 0; k < n_grid; ++k) {
    const long double u = -half + 2.0L * half * k / (n_grid - 1);
    const long double a = g(u - h), b = g(u), c = g(u + h);
    // rounding in the three values and in u +- h; without it the quadratic
    // loss reads slightly above 2 far from the origin
    const long double slope = std::abs(c - a) / (2.0L * h);
    const long double noise = 4.0L * eps * (std::abs(a) + 2.0L * std::abs(b) + std::abs(c) + 2.0L * std::abs(u) * slope);
    best = std::max(best, (a - 2.0L * b + c - noise) / (h * h));
  }
  return static_cast<double>(best);
}

}  // namespace mmpen
