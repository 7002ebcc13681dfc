#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mmpen {

enum class Task { Regression, Classification };

/// Training data. `x` holds the p predictors only; the intercept column of
/// ones is implicit. Coefficient vectors are laid out as (b0, b1, ..., bp).
/// When `intercept` is false, b0 is pinned at zero everywhere.
struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Task task = Task::Regression;
  bool intercept = true;
  std::vector<std::string> names;  // predictor names, optional

  Eigen::Index n() const { return x.rows(); }
  Eigen::Index p() const { return x.cols(); }

  /// Throws InputError on shape mismatch, non-finite entries, or
  /// classification labels outside {-1, +1}.
  void validate() const;

  /// Linear predictor x_i' phi for every row.
  Eigen::VectorXd predict(const Eigen::VectorXd& phi) const;

  /// Rows selected by index, keeping task/intercept/names.
  Dataset subset(const std::vector<Eigen::Index>& rows) const;
};

std::string to_string(Task task);
Task task_from_string(const std::string& name);

}  // namespace mmpen
