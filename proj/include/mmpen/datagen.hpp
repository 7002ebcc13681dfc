#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mmpen/dataset.hpp"

namespace mmpen {

enum class Example { Ex1Linear, Ex2DiskLinear, Ex3DiskQuadratic };

std::string to_string(Example e);
Example example_from_string(const std::string& name);  // "1", "2", "3" or "ex1".. .
Task example_task(Example e);

struct SimSpec {
  Example example = Example::Ex1Linear;
  int n_train = 200;
  int n_tune = 200;
  int n_test = 10000;
  double v = 0.0;                 // contamination percentage
  std::uint64_t seed = 1;
  std::uint64_t replicate = 0;    // selects an independent random stream
  bool contaminate_test = false;  // label flips also on the test set (classification)
  double factor = 1000.0;         // response multiplier for regression contamination
  double noise_var = 3.0;         // Example 1 error variance

  void validate() const;
  /// Benchmark-protocol sizes for an example (v and seed left at zero / one).
  static SimSpec defaults(Example e);
};

struct Truth {
  Example example = Example::Ex1Linear;
  Eigen::VectorXd phi;                 // (b0, b) for Example 1; empty otherwise
  Eigen::MatrixXd cov;                 // predictor covariance for Example 1
  std::vector<Eigen::Index> relevant;  // 1-based coefficient indices that carry the signal
  std::vector<Eigen::Index> contaminated_train;
  std::vector<Eigen::Index> contaminated_tune;
  std::vector<Eigen::Index> contaminated_test;
  double noise_var = 0.0;
  double bayes_error = 0.0;            // classification: best achievable test error
};

struct SimData {
  Dataset train, tune, test;
  Truth truth;
};

struct Contamination {
  Eigen::VectorXd values;
  std::vector<Eigen::Index> rows;  // sorted
};

/// Sigma_ij = rho^|i-j|.
Eigen::MatrixXd ar1_covariance(Eigen::Index p, double rho);

/// Multiplies a uniformly chosen floor(v n / 100)-subset of y by `factor`.
Contamination contaminate_multiply(const Eigen::VectorXd& y, double v, double factor,
                                   std::uint64_t seed);

/// Negates a uniformly chosen floor(v n / 100)-subset of +-1 labels.
Contamination flip_labels(const Eigen::VectorXd& labels, double v, std::uint64_t seed);

/// y = 1 + x'b + e with x ~ N_8(0, AR(0.5)), b = (3, 1.5, 0, 0, 2, 0, 0, 0), e ~ N(0, noise_var).
SimData gen_example1(const SimSpec& spec);

/// (x1, x2) uniform on the unit disk plus 18 U[-1, 1] noise predictors.
/// Example 2 labels y = 1 iff x1 >= x2; Example 3 labels y = 1 iff
/// (x1 - x2)(x1 + x2) < 0 and appends the 20 squared predictors.
SimData gen_disk(const SimSpec& spec);

SimData generate(const SimSpec& spec);

/// Population prediction error (phi - phi0)' S (phi - phi0), with S the
/// predictor covariance augmented by a unit intercept entry.
double example1_mse(const Truth& truth, const Eigen::VectorXd& phi);
double example1_mse(const Eigen::VectorXd& phi_true, const Eigen::VectorXd& phi, const Eigen::MatrixXd& cov);

}  // namespace mmpen
