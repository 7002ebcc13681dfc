#include "mmpen/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mmpen/errors.hpp"

namespace mmpen {

void Dataset::validate() const {
  if (y.size() != x.rows()) {
    throw InputError("dataset: response has " + std::to_string(y.size()) +
                     " rows but design has " + std::to_string(x.rows()));
  }
  if (x.rows() < 1) throw InputError("dataset: at least one row is required");
  if (!x.allFinite() || !y.allFinite()) {
    throw InputError("dataset: non-finite values in design or response");
  }
  if (!names.empty() && static_cast<Eigen::Index>(names.size()) != x.cols()) {
    throw InputError("dataset: predictor name count does not match column count");
  }
  if (task == Task::Classification) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 1.0 && y[i] != -1.0) {
        throw InputError("dataset: classification label at row " + std::to_string(i) +
                         " is not in {-1, +1}");
      }
    }
  }
}

Eigen::VectorXd Dataset::predict(const Eigen::VectorXd& phi) const {
  if (phi.size() != x.cols() + 1) {
    throw InputError("predict: coefficient vector has length " + std::to_string(phi.size()) +
                     ", expected " + std::to_string(x.cols() + 1));
  }
  Eigen::VectorXd f = x * phi.tail(x.cols());
  if (intercept) f.array() += phi[0];
  return f;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& rows) const {
  Dataset out;
  out.task = task;
  out.intercept = intercept;
  out.names = names;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    out.x.row(static_cast<Eigen::Index>(k)) = x.row(rows[k]);
    out.y[static_cast<Eigen::Index>(k)] = y[rows[k]];
  }
  return out;
}

std::string to_string(Task task) {
  return task == Task::Regression ? "regression" : "classification";
}

Task task_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "regression") return Task::Regression;
  if (s == "classification") return Task::Classification;
  throw InputError("unknown task '" + name + "' (expected regression or classification)");
}

}  // namespace mmpen
