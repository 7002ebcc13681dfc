#include "mm_engine_internal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mmpen/diagnostics.hpp"
#include "mmpen/errors.hpp"

namespace mmpen {

void FitConfig::validate() const {
  if (!(outer_tol > 0.0)) throw ConfigError("fit: outer_tol must be positive");
  if (max_outer < 1) throw ConfigError("fit: max_outer must be >= 1");
}

double objective(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen, double lambda,
                 const Eigen::VectorXd& phi) {
  return empirical_loss(loss, data, phi) + penalty_total(pen, lambda, phi);
}

namespace {

void check_compatible(const Dataset& data, const LossSpec& loss) {
  data.validate();
  if (data.task != loss.task()) {
    throw ConfigError("loss '" + loss.name() + "' is for " + to_string(loss.task()) +
                      " but the data is " + to_string(data.task));
  }
}

double mean_loss_at(const LossSpec& loss, const Eigen::VectorXd& y, double b) {
  double s = 0.0;
  const bool reg = loss.task() == Task::Regression;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += loss_value(loss, reg ? y[i] - b : y[i] * b);
  return s / static_cast<double>(y.size());
}

double mean_grad_at(const LossSpec& loss, const Eigen::VectorXd& y, double b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) s += observation_gradient(loss, y[i], b);
  return s / static_cast<double>(y.size());
}

bool small_change(double before, double after, double tol, double floor) {
  return std::abs(before - after) <= tol * std::max(std::abs(after), floor);
}

std::vector<bool> support_mask(const Eigen::VectorXd& phi) {
  std::vector<bool> mask(static_cast<std::size_t>(phi.size() - 1));
  for (Eigen::Index j = 1; j < phi.size(); ++j) mask[static_cast<std::size_t>(j - 1)] = phi[j] != 0.0;
  return mask;
}

void check_descent(double before, double after, int iteration) {
  if (after > before + 1e-8 * std::max(1.0, std::abs(before))) {
    throw InternalError("MM descent violated at iteration " + std::to_string(iteration) + ": F went from " +
                        std::to_string(before) + " to " + std::to_string(after));
  }
}

}  // namespace

InterceptFit intercept_only_fit_detail(const Dataset& data, const LossSpec& loss) {
  InterceptFit out;
  if (!data.intercept) return out;
  const Eigen::VectorXd& y = data.y;
  if (y.size() < 1) throw InputError("intercept_only_fit: no rows");
  if (loss.family() == LossFamily::LeastSquares) {
    out.beta0 = y.mean();
    return out;
  }
  const double R = std::max(10.0, 10.0 * y.cwiseAbs().maxCoeff());
  auto g = [&](double b) { return mean_loss_at(loss, y, b); };
  auto dg = [&](double b) { return mean_grad_at(loss, y, b); };

  std::vector<double> cand;
  constexpr int kGrid = 2001;
  cand.reserve(kGrid + 600);
  for (int k = 0; k < kGrid; ++k) cand.push_back(-R + 2.0 * R * k / (kGrid - 1));
  if (loss.task() == Task::Regression) {
    std::vector<double> ys(y.data(), y.data() + y.size());
    std::sort(ys.begin(), ys.end());
    const std::size_t m = ys.size();
    const std::size_t take = std::min<std::size_t>(m, 512);
    for (std::size_t k = 0; k < take; ++k) {
      cand.push_back(ys[take == 1 ? 0 : k * (m - 1) / (take - 1)]);
    }
    cand.push_back(y.mean());
    cand.push_back(m % 2 ? ys[m / 2] : 0.5 * (ys[m / 2 - 1] + ys[m / 2]));
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

  std::size_t best = 0;
  double best_val = g(cand[0]);
  for (std::size_t k = 1; k < cand.size(); ++k) {
    const double val = g(cand[k]);
    if (val < best_val) {
      best_val = val;
      best = k;
    }
  }
  double lo = cand[best == 0 ? 0 : best - 1];
  double hi = cand[std::min(best + 1, cand.size() - 1)];

  double b = cand[best];
  if (dg(lo) < 0.0 && dg(hi) > 0.0) {
    // derivative changes sign: bisect to full precision
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (dg(mid) > 0.0 ? hi : lo) = mid;
    }
    b = 0.5 * (lo + hi);
  } else if (hi > lo) {
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
      if (gc <= gd) {
        hi = d;
        d = c;
        gd = gc;
        c = hi - r * (hi - lo);
        gc = g(c);
      } else {
        lo = c;
        c = d;
        gc = gd;
        d = lo + r * (hi - lo);
        gd = g(d);
      }
    }
    b = 0.5 * (lo + hi);
  }
  if (g(b) > best_val) b = cand[best];
  out.beta0 = b;
  out.at_boundary = std::abs(std::abs(b) - R) <= 1e-8 * R;
  return out;
}

double intercept_only_fit(const Dataset& data, const LossSpec& loss) {
  return intercept_only_fit_detail(data, loss).beta0;
}

LossSpec convex_pilot_loss(Task task) {
  return task == Task::Regression ? LossSpec(LossFamily::Huber, Task::Regression)
                                  : LossSpec(LossFamily::Logistic, Task::Classification);
}

Eigen::VectorXd initial_phi(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                            double lambda, const FitConfig& cfg, const CdConfig& cd) {
  const Eigen::Index p = data.p();
  switch (cfg.init) {
    case InitMode::Zeros:
      return Eigen::VectorXd::Zero(p + 1);
    case InitMode::InterceptOnly: {
      Eigen::VectorXd phi = Eigen::VectorXd::Zero(p + 1);
      phi[0] = intercept_only_fit(data, loss);
      return phi;
    }
    case InitMode::Custom: {
      if (cfg.custom_init.size() != p + 1) {
        throw InputError("fit: custom initial value has length " + std::to_string(cfg.custom_init.size()) +
                         ", expected " + std::to_string(p + 1));
      }
      if (!cfg.custom_init.allFinite()) throw InputError("fit: custom initial value is not finite");
      Eigen::VectorXd phi = cfg.custom_init;
      if (!data.intercept) phi[0] = 0.0;
      return phi;
    }
    case InitMode::ConvexPilot: {
      FitConfig pilot_cfg = cfg;
      pilot_cfg.init = InitMode::InterceptOnly;
      if (loss.convex()) return initial_phi(data, loss, pen, lambda, pilot_cfg, cd);
      const LossSpec pilot = convex_pilot_loss(data.task);
      try {
        return fit(data, pilot, pen, lambda, pilot_cfg, cd).phi;
      } catch (const ConvergenceError& e) {
        // e.g. separable classes: the pilot drifts off but still points the right way
        return e.last_iterate();
      }
    }
  }
  return Eigen::VectorXd::Zero(p + 1);
}

FitResult fit_from(const Design& design, const Dataset& data, const LossSpec& loss,
                   const PenaltySpec& pen, double lambda, const Eigen::VectorXd& start,
                   const FitConfig& cfg, const CdConfig& cd) {
  cfg.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("fit: lambda must be finite and >= 0");
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const double B = loss.curvature_bound();

  FitResult res;
  Eigen::VectorXd phi = start;
  if (!data.intercept) phi[0] = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (design.degenerate(j)) phi[j + 1] = 0.0;
  }
  Eigen::VectorXd f = data.predict(phi);
  double F = empirical_loss_at(loss, data.y, f) + penalty_total(pen, lambda, phi);
  res.objective_trace.push_back(F);
  const double floor = 1e-14 * std::max(1.0, std::abs(F));

  bool restricted = cfg.active_set;
  std::vector<bool> allowed = support_mask(phi);
  PwlsProblem prob{design, Eigen::VectorXd(n), B, pen, lambda};

  while (res.n_outer < cfg.max_outer) {
    for (Eigen::Index i = 0; i < n; ++i) prob.h[i] = working_response(loss, data.y[i], f[i], B);
    const std::vector<bool> before_support = support_mask(phi);
    PwlsResult inner = solve_pwls_unchecked(prob, cd, phi, restricted ? &allowed : nullptr);
    res.cd_sweeps += inner.sweeps;
    if (!inner.converged) {
      res.objective_trace.push_back(F);
      throw ConvergenceError("coordinate descent did not converge inside MM iteration " +
                                 std::to_string(res.n_outer + 1),
                             inner.phi, res.objective_trace);
    }
    const Eigen::VectorXd f_new = data.predict(inner.phi);
    const double F_new = empirical_loss_at(loss, data.y, f_new) + penalty_total(pen, lambda, inner.phi);
    ++res.n_outer;
    check_descent(F, F_new, res.n_outer);
    res.objective_trace.push_back(F_new);
    const bool small = small_change(F, F_new, cfg.outer_tol, floor);
    phi = inner.phi;
    f = f_new;
    F = F_new;
    if (!small) continue;
    if (restricted) {
      restricted = false;  // verify with one unrestricted iteration
      continue;
    }
    if (!cfg.active_set || support_mask(phi) == before_support) {
      res.converged = true;
      break;
    }
    allowed = support_mask(phi);
    restricted = true;
  }
  res.phi = phi;
  res.kkt_max_residual = kkt_residual(data, loss, pen, lambda, phi).max_residual;
  return res;
}

FitResult fit(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen, double lambda,
              const FitConfig& cfg, const CdConfig& cd) {
  check_compatible(data, loss);
  cfg.validate();
  cd.validate();
  const Design design(data.x, data.intercept, cd.standardize);
  const Eigen::VectorXd start = initial_phi(data, loss, pen, lambda, cfg, cd);
  FitResult res = fit_from(design, data, loss, pen, lambda, start, cfg, cd);
  if (!res.converged) {
    throw ConvergenceError("MM did not converge within " + std::to_string(cfg.max_outer) + " iterations",
                           res.phi, res.objective_trace);
  }
  return res;
}

FitResult fit_unpenalized(const Dataset& data, const LossSpec& loss, const FitConfig& cfg) {
  check_compatible(data, loss);
  cfg.validate();
  const Eigen::Index n = data.n();
  const Eigen::Index p = data.p();
  const double B = loss.curvature_bound();
  const PenaltySpec none(PenaltyFamily::Lasso);

  Eigen::MatrixXd a(n, p + 1);
  a.col(0).setConstant(data.intercept ? 1.0 : 0.0);
  a.rightCols(p) = data.x;
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);

  Eigen::VectorXd phi;
  if (cfg.init == InitMode::ConvexPilot && !loss.convex()) {
    FitConfig pilot_cfg = cfg;
    pilot_cfg.init = InitMode::Zeros;
    try {
      phi = fit_unpenalized(data, convex_pilot_loss(data.task), pilot_cfg).phi;
    } catch (const ConvergenceError& e) {
      phi = e.last_iterate();
    }
  } else {
    FitConfig base = cfg;
    if (base.init == InitMode::ConvexPilot) base.init = InitMode::InterceptOnly;
    phi = initial_phi(data, loss, none, 0.0, base, CdConfig{});
  }
  if (!data.intercept) phi[0] = 0.0;

  FitResult res;
  Eigen::VectorXd f = data.predict(phi);
  double F = empirical_loss_at(loss, data.y, f);
  res.objective_trace.push_back(F);
  const double floor = 1e-14 * std::max(1.0, std::abs(F));
  Eigen::VectorXd h(n);
  while (res.n_outer < cfg.max_outer) {
    for (Eigen::Index i = 0; i < n; ++i) h[i] = working_response(loss, data.y[i], f[i], B);
    Eigen::VectorXd next = cod.solve(h);
    if (!data.intercept) next[0] = 0.0;
    const Eigen::VectorXd f_new = data.predict(next);
    const double F_new = empirical_loss_at(loss, data.y, f_new);
    ++res.n_outer;
    check_descent(F, F_new, res.n_outer);
    res.objective_trace.push_back(F_new);
    const bool small = small_change(F, F_new, cfg.outer_tol, floor);
    phi = next;
    f = f_new;
    F = F_new;
    if (small) {
      res.converged = true;
      break;
    }
  }
  res.phi = phi;
  res.kkt_max_residual = loss_gradient(data, loss, phi).cwiseAbs().maxCoeff();
  if (!res.converged) {
    throw ConvergenceError("unpenalized MM did not converge within " + std::to_string(cfg.max_outer) +
                               " iterations",
                           res.phi, res.objective_trace);
  }
  return res;
}

}  // namespace mmpen
