#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mmpen/diagnostics.hpp"
#include "mmpen/errors.hpp"
#include "mmpen/path_tuning.hpp"
#include "oracles.hpp"

using namespace mmpen;

namespace {

bool nonincreasing(const std::vector<double>& t) {
  for (std::size_t k = 1; k < t.size(); ++k)
    if (t[k] > t[k - 1] + 1e-10 * std::max(1.0, std::abs(t[k - 1]))) return false;
  return true;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("lambda grid") {
  const auto g = lambda_grid(1.0, 3, 0.01);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(1.0));
  CHECK(g[1] == doctest::Approx(0.1));
  CHECK(g[2] == doctest::Approx(0.01));
  const auto two = lambda_grid(2.5, 2, 0.2);
  CHECK(two[0] == doctest::Approx(2.5));
  CHECK(two[1] == doctest::Approx(0.5));
  const auto big = lambda_grid(3.0, 100, 1e-3);
  for (std::size_t k = 2; k < big.size(); ++k) {
    CHECK(std::abs(big[k] / big[k - 1] - big[1] / big[0]) <= 1e-12);
  }
  CHECK_THROWS_AS(lambda_grid(0.0, 10, 0.1), InputError);
  PathConfig cfg;
  CHECK(cfg.resolved_eps(10, 20) == 0.05);
  CHECK(cfg.resolved_eps(20, 10) == 1e-3);
}

TEST_CASE("qloss lambda_max in closed form with balanced labels") {
  Dataset d = oracle::random_data(Task::Classification, 40, 5, 41, false);
  for (int i = 0; i < 40; ++i) d.y[i] = i % 2 ? 1.0 : -1.0;
  for (double sigma : {0.2, 0.7}) {
    const LossSpec q(LossFamily::Qloss, Task::Classification, sigma);
    double best = 0;
    for (int j = 0; j < 5; ++j) best = std::max(best, std::abs(d.x.col(j).dot(d.y)));
    const double alpha = 0.5;
    const double expect = std::sqrt(2.0) / (40 * alpha * std::sqrt(std::numbers::pi) * sigma) * best;
    CHECK(lambda_max(d, q, alpha) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("lambda_max is zero without signal") {
  Dataset d = oracle::random_data(Task::Regression, 10, 3, 42);
  d.x.setZero();
  CHECK(lambda_max(d, LossSpec(LossFamily::Huber, Task::Regression), 1.0) == 0.0);
  CHECK_THROWS_AS(lambda_max(d, LossSpec(LossFamily::Huber, Task::Regression), 0.0), InputError);
}

TEST_CASE("logistic lambda_max matches a finite-difference gradient") {
  Dataset d;
  d.task = Task::Classification;
  d.x.resize(5, 2);
  d.x << 0.5, -1.0, 1.2, 0.3, -0.7, 0.8, 0.1, -0.4, -1.5, 1.1;
  d.y.resize(5);
  d.y << 1, 1, -1, 1, -1;
  const LossSpec l(LossFamily::Logistic, Task::Classification);
  const double b0 = intercept_only_fit(d, l);
  const double h = 1e-6;
  double best = 0;
  for (int j = 1; j <= 2; ++j) {
    Eigen::Vector3d up(b0, 0, 0), dn(b0, 0, 0);
    up[j] += h, dn[j] -= h;
    best = std::max(best, std::abs((empirical_loss(l, d, up) - empirical_loss(l, d, dn)) / (2 * h)));
  }
  CHECK(std::abs(lambda_max(d, l, 1.0) - best) <= 1e-6);
}

TEST_CASE("generic and closed-form lambda_max agree") {
  for (LossFamily f : {LossFamily::ClossR, LossFamily::Closs, LossFamily::Gloss, LossFamily::Qloss}) {
    const LossSpec l(f, LossSpec::native_task(f));
    for (unsigned seed = 0; seed < 4; ++seed) {
      const Dataset d = oracle::random_data(l.task(), 50, 7, 43 + seed, seed % 2 == 0);
      const double b0 = intercept_only_fit(d, l);
      const double generic = lambda_max(d, l, 0.8), closed = lambda_max_closed_form(d, l, 0.8, b0);
      INFO(l.name(), " seed ", seed);
      CHECK(std::abs(generic - closed) <= 1e-8 * std::abs(closed));
    }
  }
  const Dataset d = oracle::random_data(Task::Regression, 20, 2, 49);
  CHECK_THROWS_AS(lambda_max_closed_form(d, LossSpec(LossFamily::Huber, Task::Regression), 1.0, 0.0), ConfigError);
}

TEST_CASE("slopes stay at zero at lambda_max and activate just below it") {
  const LossFamily all[] = {LossFamily::LeastSquares, LossFamily::Huber, LossFamily::Logistic, LossFamily::ClossR,
                            LossFamily::Closs,        LossFamily::Gloss, LossFamily::Qloss};
  for (LossFamily f : all) {
    const LossSpec l(f, LossSpec::native_task(f));
    const Dataset d = oracle::random_data(l.task(), 60, 5, 50);
    for (const PenaltySpec& pen : {PenaltySpec(PenaltyFamily::Lasso), PenaltySpec(PenaltyFamily::Scad),
                                   PenaltySpec(PenaltyFamily::Mcp, std::nullopt, 0.5)}) {
      const double lmax = lambda_max(d, l, pen.alpha());
      FitConfig cfg;
      cfg.init = InitMode::InterceptOnly;
      // at exactly lambda_max the binding coordinate sits on the threshold and
      // rounding in the intercept can tip it by 1e-15
      const FitResult at = fit(d, l, pen, lmax * (1 + 1e-9), cfg);
      INFO(l.name(), " ", pen.name());
      CHECK(at.phi.tail(5).cwiseAbs().maxCoeff() == 0.0);
      if (l.convex() && pen.family() == PenaltyFamily::Lasso) {
        CHECK(fit(d, l, pen, 0.99 * lmax).phi.tail(5).cwiseAbs().maxCoeff() > 0.0);
      }
    }
  }
}

TEST_CASE("forward and backward convex lasso paths reach the same objective") {
  for (LossFamily f : {LossFamily::LeastSquares, LossFamily::Huber, LossFamily::Logistic}) {
    const LossSpec l(f, LossSpec::native_task(f));
    const Dataset d = oracle::random_data(l.task(), 80, 8, 51);
    const PenaltySpec pen(PenaltyFamily::Lasso);
    PathConfig cfg;
    cfg.K = 30;
    const PathResult fwd = solution_path(d, l, pen, cfg);
    cfg.direction = PathDirection::Backward;
    const PathResult bwd = solution_path(d, l, pen, cfg);
    REQUIRE(fwd.lambdas == bwd.lambdas);
    CHECK(fwd.coefs.row(0).tail(8).cwiseAbs().maxCoeff() == 0.0);
    double worst = 0;
    for (std::size_t k = 0; k < fwd.lambdas.size(); ++k) {
      CHECK(fwd.lambdas[k] < (k ? fwd.lambdas[k - 1] : INFINITY));
      const double a = objective(d, l, pen, fwd.lambdas[k], fwd.coefs.row(static_cast<Eigen::Index>(k)).transpose());
      const double b = objective(d, l, pen, bwd.lambdas[k], bwd.coefs.row(static_cast<Eigen::Index>(k)).transpose());
      worst = std::max(worst, std::abs(a - b));
    }
    INFO(l.name());
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("convex path is continuous along the grid") {
  const LossSpec l(LossFamily::Huber, Task::Regression);
  const Dataset d = oracle::random_data(Task::Regression, 80, 8, 52);
  PathConfig cfg;
  cfg.K = 50;
  const PathResult path = solution_path(d, l, PenaltySpec(PenaltyFamily::Lasso), cfg);
  // jumps per unit of lambda: the log grid shrinks the steps geometrically
  std::vector<double> jumps;
  for (std::size_t k = 1; k < path.lambdas.size(); ++k) {
    jumps.push_back((path.coefs.row(static_cast<Eigen::Index>(k)) - path.coefs.row(static_cast<Eigen::Index>(k - 1)))
                        .cwiseAbs()
                        .maxCoeff() /
                    (path.lambdas[k - 1] - path.lambdas[k]));
  }
  const double med = median(jumps);
  CHECK(*std::max_element(jumps.begin(), jumps.end()) <= 10 * med);
}

TEST_CASE("nonconvex paths descend and their converged fits are stationary") {
  const LossSpec l(LossFamily::ClossR, Task::Regression);
  const Dataset d = oracle::random_data(Task::Regression, 80, 6, 53);
  for (PathDirection dir : {PathDirection::Forward, PathDirection::Backward}) {
    PathConfig cfg;
    cfg.K = 15;
    cfg.direction = dir;
    const PenaltySpec pen(PenaltyFamily::Mcp);
    const PathResult path = solution_path(d, l, pen, cfg);
    CHECK(path.direction == dir);
    int probed = 0;
    for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
      const FitResult& r = path.per_lambda[k];
      CHECK(nonincreasing(r.objective_trace));
      if (!r.converged) continue;
      ++probed;
      CHECK(dini_stationarity_probe(d, l, pen, path.lambdas[k], r.phi, 50).stationary);
    }
    CHECK(probed >= 10);
  }
}

TEST_CASE("tuning on the training set picks the smallest lambda") {
  const LossSpec l(LossFamily::LeastSquares, Task::Regression);
  const Dataset d = oracle::random_data(Task::Regression, 20, 5, 54);
  PathConfig cfg;
  cfg.K = 20;
  PathResult path;
  const CvResult cv = tune_holdout(d, d, l, PenaltySpec(PenaltyFamily::Lasso), cfg, CvMetric::Mse, {}, {}, &path);
  for (std::size_t k = 1; k < cv.mean_metric.size(); ++k) CHECK(cv.mean_metric[k] <= cv.mean_metric[k - 1] + 1e-12);
  CHECK(cv.best_index == 19);
  CHECK(cv.best_lambda == cv.lambdas.back());
  CHECK(path.lambdas == cv.lambdas);
}

TEST_CASE("misclassification ties go to the largest lambda") {
  Dataset train = oracle::random_data(Task::Classification, 80, 3, 55);
  for (int i = 0; i < 80; ++i) train.y[i] = train.x(i, 0) + 0.4 >= 0 ? 1.0 : -1.0;
  Dataset tune = train;
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < 80; ++i)
    if (train.x(i, 0) > 1.0) rows.push_back(i);
  tune = train.subset(rows);
  PathConfig cfg;
  cfg.K = 10;
  const CvResult cv = tune_holdout(train, tune, LossSpec(LossFamily::Logistic, Task::Classification),
                                   PenaltySpec(PenaltyFamily::Lasso), cfg, CvMetric::MisclassRate);
  for (double m : cv.mean_metric) REQUIRE(m == 0.0);
  CHECK(cv.best_index == 0);
}

TEST_CASE("folds partition the rows") {
  const auto folds = make_folds(103, 5, 9);
  REQUIRE(folds.size() == 103);
  std::vector<int> count(5, 0);
  for (int f : folds) {
    REQUIRE(f >= 0);
    REQUIRE(f < 5);
    ++count[static_cast<std::size_t>(f)];
  }
  CHECK(*std::max_element(count.begin(), count.end()) - *std::min_element(count.begin(), count.end()) <= 1);
  CHECK(make_folds(103, 5, 9) == folds);
  CHECK(make_folds(103, 5, 10) != folds);
}

TEST_CASE("cross-validation is deterministic and independent of the thread count") {
  const LossSpec l(LossFamily::Huber, Task::Regression);
  const Dataset d = oracle::random_data(Task::Regression, 60, 5, 56);
  PathConfig cfg;
  cfg.K = 12;
  const CvResult a = cross_validate(d, l, PenaltySpec(PenaltyFamily::Lasso), cfg, 5, CvMetric::Mse, {}, {}, 3, 1);
  const CvResult b = cross_validate(d, l, PenaltySpec(PenaltyFamily::Lasso), cfg, 5, CvMetric::Mse, {}, {}, 3, 4);
  CHECK(a.mean_metric == b.mean_metric);
  CHECK(a.best_index == b.best_index);
  CHECK(a.fold_of_row == make_folds(60, 5, 3));
  CHECK(a.lambdas == lambda_grid(lambda_max(d, l, 1.0), cfg));
}

TEST_CASE("single-class folds are recorded as missing") {
  Dataset d = oracle::random_data(Task::Classification, 30, 2, 57);
  const auto folds = make_folds(30, 3, 1);
  for (int i = 0; i < 30; ++i) d.y[i] = folds[static_cast<std::size_t>(i)] == 0 ? 1.0 : (i % 2 ? 1.0 : -1.0);
  PathConfig cfg;
  cfg.K = 5;
  const CvResult cv = cross_validate(d, LossSpec(LossFamily::Logistic, Task::Classification),
                                     PenaltySpec(PenaltyFamily::Lasso), cfg, 3, CvMetric::MisclassRate, {}, {}, 1);
  for (Eigen::Index k = 0; k < 5; ++k) CHECK(std::isnan(cv.fold_metric(0, k)));
  for (double m : cv.mean_metric) CHECK(std::isfinite(m));
}

TEST_CASE("metrics") {
  const Eigen::Vector3d y(1, -1, 1), f(0.5, 0.2, -0.1);
  const LossSpec logit(LossFamily::Logistic, Task::Classification);
  CHECK(evaluate_metric(CvMetric::MisclassRate, logit, y, f) == doctest::Approx(2.0 / 3.0));
  CHECK(evaluate_metric(CvMetric::LossValue, logit, y, f) == doctest::Approx(empirical_loss_at(logit, y, f)));
  const LossSpec ls(LossFamily::LeastSquares, Task::Regression);
  CHECK(evaluate_metric(CvMetric::Mse, ls, y, f) == doctest::Approx((0.25 + 1.44 + 1.21) / 3.0));
  CHECK(cv_metric_from_string("misclass") == CvMetric::MisclassRate);
  CHECK_THROWS_AS(cv_metric_from_string("auc"), ConfigError);
}
