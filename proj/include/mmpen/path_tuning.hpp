#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmpen/mm_engine.hpp"

namespace mmpen {

enum class PathDirection { Forward, Backward };

std::string to_string(PathDirection d);
PathDirection path_direction_from_string(const std::string& name);

struct PathConfig {
  int K = 100;
  std::optional<double> eps;  // lambda_min / lambda_max; default 0.05 if n < p else 1e-3
  PathDirection direction = PathDirection::Forward;

  void validate() const;
  double resolved_eps(Eigen::Index n, Eigen::Index p) const;
};

struct PathResult {
  double lambda_max = 0.0;
  std::vector<double> lambdas;           // strictly decreasing
  Eigen::MatrixXd coefs;                 // one row (b0, b1..bp) per lambda
  std::vector<FitResult> per_lambda;
  std::vector<std::string> failures;     // empty string when the fit converged cleanly
  PathDirection direction = PathDirection::Forward;
};

/// max_j |(1/n) sum_i dL_i/db_j| / alpha at the intercept-only model.
double lambda_max(const Dataset& data, const LossSpec& loss, double alpha);

/// Closed-form lambda_max for ClossR, Closs, Gloss and Qloss at a given
/// intercept. Throws ConfigError for the convex families.
double lambda_max_closed_form(const Dataset& data, const LossSpec& loss, double alpha, double beta0);

/// K log-equispaced values from lmax down to eps * lmax inclusive.
std::vector<double> lambda_grid(double lmax, int K, double eps);
std::vector<double> lambda_grid(double lmax, const PathConfig& cfg);

/// Warm-started fits over the grid. Forward starts from the intercept-only
/// model at lambda_max; backward starts from the convex pilot at lambda_min
/// and cycles only the current active set as lambda grows. Results are
/// always reported with lambda descending. Per-lambda convergence failures
/// are recorded, not thrown.
PathResult solution_path(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                         const PathConfig& cfg, const FitConfig& fit_cfg = {},
                         const CdConfig& cd_cfg = {});

/// As solution_path on an explicit descending grid.
PathResult solution_path_on_grid(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                                 const std::vector<double>& lambdas, PathDirection direction,
                                 const FitConfig& fit_cfg = {}, const CdConfig& cd_cfg = {});

enum class CvMetric { Mse, MisclassRate, LossValue };

std::string to_string(CvMetric m);
CvMetric cv_metric_from_string(const std::string& name);

/// Metric of predictions f against y (lower is better).
double evaluate_metric(CvMetric metric, const LossSpec& loss, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& f);

struct CvResult {
  std::vector<double> lambdas;
  Eigen::MatrixXd fold_metric;        // folds x K; NaN marks a missing fold
  std::vector<double> mean_metric;    // over non-missing folds
  std::vector<double> sd_metric;
  std::vector<int> fold_of_row;       // validation fold per row (k-fold only)
  int best_index = 0;
  double best_lambda = 0.0;
};

/// Seeded assignment of n rows to k folds of near-equal size.
std::vector<int> make_folds(Eigen::Index n, int k, std::uint64_t seed);

/// k-fold cross-validation on a grid computed from the full data. Ties in
/// the mean metric go to the larger lambda.
CvResult cross_validate(const Dataset& data, const LossSpec& loss, const PenaltySpec& pen,
                        const PathConfig& cfg, int nfolds, CvMetric metric,
                        const FitConfig& fit_cfg = {}, const CdConfig& cd_cfg = {},
                        std::uint64_t seed = 1, int jobs = 1);

/// Tuning on a held-out set; the grid comes from the training data.
/// `path_out`, when given, receives the training path.
CvResult tune_holdout(const Dataset& train, const Dataset& tune, const LossSpec& loss,
                      const PenaltySpec& pen, const PathConfig& cfg, CvMetric metric,
                      const FitConfig& fit_cfg = {}, const CdConfig& cd_cfg = {},
                      PathResult* path_out = nullptr);

}  // namespace mmpen
