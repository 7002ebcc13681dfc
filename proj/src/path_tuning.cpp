#include "mmpen/path_tuning.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "mmpen/diagnostics.hpp"
#include "mmpen/errors.hpp"
#include "mmpen/rng.hpp"
#include "parallel.hpp"

namespace mmpen {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0)) throw InputError("lambda_max: alpha must be positive");
}

}  // namespace

std::string to_string(PathDirection d) { return d == PathDirection::Forward ? "forward" : "backward"; }

PathDirection path_direction_from_string(const std::string& name) {
  const std::string s = lower(name);
  if (s == "forward") return PathDirection::Forward;
  if (s == "backward") return PathDirection::Backward;
  throw ConfigError("unknown path direction '" + name + "' (expected forward or backward)");
}

void PathConfig::validate() const {
  if (K < 2) throw ConfigError("path: the grid needs at least 2 values");
  if (eps && !(*eps > 0.0 && *eps < 1.0)) throw ConfigError("path: lambda-min-ratio must lie in (0, 1)");
}

double PathConfig::resolved_eps(Eigen::Index n, Eigen::Index p) const {
  return eps.value_or(n < p ? 0.05 : 1e-3);
}

double lambda_max(const Dataset& data, const LossSpec& loss, double alpha) {
  check_alpha(alpha);
  if (data.p() == 0) return 0.0;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(data.p() + 1);
  phi[0] = intercept_only_fit(data, loss);
  return loss_gradient(data, loss, phi).tail(data.p()).cwiseAbs().maxCoeff() / alpha;
}

double lambda_max_closed_form(const Dataset& data, const LossSpec& loss, double alpha, double beta0) {
  check_alpha(alpha);
  if (data.p() == 0) return 0.0;
  const double s = loss.sigma();
  const double n = static_cast<double>(data.n());
  const Eigen::VectorXd& y = data.y;
  Eigen::VectorXd w(data.n());
  double scale = 1.0;
  switch (loss.family()) {
    case LossFamily::ClossR:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double r = y[i] - beta0;
        w[i] = r * std::exp(-r * r / (2.0 * s * s));
      }
      scale = 1.0 / (n * alpha * s * s);
      break;
    case LossFamily::Closs:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double m = 1.0 - y[i] * beta0;
        w[i] = (y[i] - beta0) * std::exp(-m * m / (2.0 * s * s));
      }
      scale = detail::closs_scale(s) / (n * alpha * s * s);
      break;
    case LossFamily::Gloss:
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double e = std::exp(y[i] * beta0);
        w[i] = y[i] * e * std::pow(1.0 + e, -s - 1.0);
      }
      scale = s * std::pow(2.0, s) / (n * alpha);
      break;
    case LossFamily::Qloss:
      w = y;
      scale = std::numbers::sqrt2 / (n * alpha * std::sqrt(std::numbers::pi) * s) *
              std::exp(-beta0 * beta0 / (2.0 * s * s));
      break;
    default:
      throw ConfigError("lambda_max_closed_form: no closed form for loss '" + loss.name() + "'");
  }
  return scale * (data.x.transpose() * w).cwiseAbs().maxCoeff();
}

std::vector<double> lambda_grid(double lmax, int K, double eps) {
  if (!(lmax > 0.0) || !std::isfinite(lmax)) throw InputError("lambda_grid: lambda_max must be positive");
  if (K < 2) throw ConfigError("lambda_grid: K must be >= 2");
  if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("lambda_grid: eps must lie in (0, 1)");
  std::vector<double> out(static_cast<std::size_t>(K));
  const double step = std::log(eps) / (K - 1);
  for (int k = 0; k < K; ++k) out[static_cast<std::size_t>(k)] = lmax * std::exp(step * k);
  out.front() = lmax;
  out.back() = lmax * eps;
  return out;
}

std::vector<double> lambda_grid(double lmax, const PathConfig& cfg) {
  cfg.validate();
  return lambda_grid(lmax, cfg.K, cfg.eps.value_or(1e-3));
}

PathResult solution_path_on_grid(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                                 const std::vector<double>& lambdas, PathDirection direction,
                                 const FitConfig& fit_cfg, const CdConfig& cd_cfg) {
  data.validate();
  if (data.task != loss.task()) throw ConfigError("path: loss and data task differ");
  fit_cfg.validate();
  cd_cfg.validate();
  if (lambdas.empty()) throw ConfigError("path: empty lambda grid");
  for (std::size_t k = 1; k < lambdas.size(); ++k) {
    if (!(lambdas[k] < lambdas[k - 1])) throw ConfigError("path: lambda grid must be strictly decreasing");
  }
  const auto K = static_cast<Eigen::Index>(lambdas.size());
  const Design design(data.x, data.intercept, cd_cfg.standardize);

  PathResult out;
  out.direction = direction;
  out.lambdas = lambdas;
  out.coefs.resize(K, data.p() + 1);
  out.per_lambda.resize(lambdas.size());
  out.failures.assign(lambdas.size(), "");

  FitConfig cfg = fit_cfg;
  Eigen::VectorXd start;
  if (direction == PathDirection::Forward) {
    FitConfig init = fit_cfg;
    init.init = InitMode::InterceptOnly;
    start = initial_phi(data, loss, pen, lambdas.front(), init, cd_cfg);
  } else {
    FitConfig init = fit_cfg;
    init.init = InitMode::ConvexPilot;
    start = initial_phi(data, loss, pen, lambdas.back(), init, cd_cfg);
    cfg.active_set = true;
  }

  for (Eigen::Index step = 0; step < K; ++step) {
    const Eigen::Index k = direction == PathDirection::Forward ? step : K - 1 - step;
    const double lambda = lambdas[static_cast<std::size_t>(k)];
    FitResult res;
    std::string failure;
    try {
      res = fit_from(design, data, loss, pen, lambda, start, cfg, cd_cfg);
      if (!res.converged) failure = "MM did not converge within " + std::to_string(cfg.max_outer) + " iterations";
    } catch (const ConvergenceError& e) {
      failure = e.what();
      res.phi = e.last_iterate();
      res.objective_trace = e.trace();
      res.converged = false;
      res.kkt_max_residual = kkt_residual(data, loss, pen, lambda, res.phi).max_residual;
    }
    out.coefs.row(k) = res.phi.transpose();
    start = res.phi;
    out.per_lambda[static_cast<std::size_t>(k)] = std::move(res);
    out.failures[static_cast<std::size_t>(k)] = std::move(failure);
  }
  return out;
}

PathResult solution_path(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                         const PathConfig& cfg, const FitConfig& fit_cfg, const CdConfig& cd_cfg) {
  cfg.validate();
  data.validate();
  const double lmax = lambda_max(data, loss, pen.alpha());
  if (!(lmax > 0.0)) throw InputError("path: lambda_max is zero, no predictor carries signal");
  const auto grid = lambda_grid(lmax, cfg.K, cfg.resolved_eps(data.n(), data.p()));
  PathResult out = solution_path_on_grid(data, loss, pen, grid, cfg.direction, fit_cfg, cd_cfg);
  out.lambda_max = lmax;
  return out;
}

std::string to_string(CvMetric m) {
  switch (m) {
    case CvMetric::Mse:
      return "mse";
    case CvMetric::MisclassRate:
      return "misclass";
    case CvMetric::LossValue:
      return "loss";
  }
  return "?";
}

CvMetric cv_metric_from_string(const std::string& name) {
  const std::string s = lower(name);
  if (s == "mse") return CvMetric::Mse;
  if (s == "misclass" || s == "misclassrate") return CvMetric::MisclassRate;
  if (s == "loss" || s == "lossvalue") return CvMetric::LossValue;
  throw ConfigError("unknown metric '" + name + "' (expected mse, misclass or loss)");
}

double evaluate_metric(CvMetric metric, const LossSpec& loss, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& f) {
  switch (metric) {
    case CvMetric::Mse:
      return (y - f).squaredNorm() / static_cast<double>(y.size());
    case CvMetric::MisclassRate: {
      Eigen::Index wrong = 0;
      for (Eigen::Index i = 0; i < y.size(); ++i) wrong += ((f[i] >= 0.0 ? 1.0 : -1.0) != y[i]);
      return static_cast<double>(wrong) / static_cast<double>(y.size());
    }
    case CvMetric::LossValue:
      return empirical_loss_at(loss, y, f);
  }
  return 0.0;
}

std::vector<int> make_folds(Eigen::Index n, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs at least 2 folds");
  if (n < k) throw InputError("cross-validation: fewer rows than folds");
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng = Rng::stream(seed, {0xF01D});
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    std::swap(perm[i], perm[rng.below(i + 1)]);
  }
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t pos = 0; pos < perm.size(); ++pos) {
    fold[static_cast<std::size_t>(perm[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return fold;
}

namespace {

bool single_class(const Dataset& d) {
  if (d.task != Task::Classification) return false;
  return (d.y.array() > 0.0).all() || (d.y.array() < 0.0).all();
}

void summarize(CvResult& res) {
  const Eigen::Index K = res.fold_metric.cols();
  res.mean_metric.assign(static_cast<std::size_t>(K), std::numeric_limits<double>::quiet_NaN());
  res.sd_metric.assign(static_cast<std::size_t>(K), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index k = 0; k < K; ++k) {
    double sum = 0.0, sq = 0.0;
    int m = 0;
    for (Eigen::Index f = 0; f < res.fold_metric.rows(); ++f) {
      const double v = res.fold_metric(f, k);
      if (std::isnan(v)) continue;
      sum += v;
      sq += v * v;
      ++m;
    }
    if (m == 0) continue;
    const double mean = sum / m;
    res.mean_metric[static_cast<std::size_t>(k)] = mean;
    res.sd_metric[static_cast<std::size_t>(k)] = m > 1 ? std::sqrt(std::max(0.0, (sq - m * mean * mean) / (m - 1))) : 0.0;
  }
  int best = -1;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double v = res.mean_metric[static_cast<std::size_t>(k)];
    if (std::isnan(v)) continue;
    // strict improvement only: ties stay with the larger lambda
    if (best < 0 || v < res.mean_metric[static_cast<std::size_t>(best)] - 1e-12) best = static_cast<int>(k);
  }
  if (best < 0) throw InputError("cross-validation: every fold is missing (single-class splits)");
  res.best_index = best;
  res.best_lambda = res.lambdas[static_cast<std::size_t>(best)];
}

}  // namespace

CvResult cross_validate(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                        const PathConfig& cfg, int nfolds, CvMetric metric, const FitConfig& fit_cfg,
                        const CdConfig& cd_cfg, std::uint64_t seed, int jobs) {
  cfg.validate();
  data.validate();
  const double lmax = lambda_max(data, loss, pen.alpha());
  if (!(lmax > 0.0)) throw InputError("cross-validation: lambda_max is zero");
  CvResult res;
  res.lambdas = lambda_grid(lmax, cfg.K, cfg.resolved_eps(data.n(), data.p()));
  res.fold_of_row = make_folds(data.n(), nfolds, seed);
  const auto K = static_cast<Eigen::Index>(res.lambdas.size());
  res.fold_metric = Eigen::MatrixXd::Constant(nfolds, K, std::numeric_limits<double>::quiet_NaN());

  detail::parallel_for(nfolds, jobs, [&](int f) {
    std::vector<Eigen::Index> tr, va;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      (res.fold_of_row[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
    }
    const Dataset train = data.subset(tr);
    const Dataset valid = data.subset(va);
    if (single_class(train) || single_class(valid)) return;
    const PathResult path = solution_path_on_grid(train, loss, pen, res.lambdas, cfg.direction, fit_cfg, cd_cfg);
    for (Eigen::Index k = 0; k < K; ++k) {
      const Eigen::VectorXd phi = path.coefs.row(k).transpose();
      res.fold_metric(f, k) = evaluate_metric(metric, loss, valid.y, valid.predict(phi));
    }
  });
  summarize(res);
  return res;
}

CvResult tune_holdout(const Dataset& train, const Dataset& tune, const LossSpec& loss,
                      const PenaltySpec& pen, const PathConfig& cfg, CvMetric metric,
                      const FitConfig& fit_cfg, const CdConfig& cd_cfg, PathResult* path_out) {
  tune.validate();
  if (tune.p() != train.p()) throw InputError("tuning set has a different number of predictors");
  PathResult path = solution_path(train, loss, pen, cfg, fit_cfg, cd_cfg);
  CvResult res;
  res.lambdas = path.lambdas;
  const auto K = static_cast<Eigen::Index>(res.lambdas.size());
  res.fold_metric.resize(1, K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Eigen::VectorXd phi = path.coefs.row(k).transpose();
    res.fold_metric(0, k) = evaluate_metric(metric, loss, tune.y, tune.predict(phi));
  }
  summarize(res);
  if (path_out) *path_out = std::move(path);
  return res;
}

}  // namespace mmpen
