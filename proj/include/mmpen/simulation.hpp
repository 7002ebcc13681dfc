#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmpen/datagen.hpp"
#include "mmpen/path_tuning.hpp"

namespace mmpen {

/// A benchmark method such as "GlossSCAD" or the unpenalized "Logis".
struct Method {
  std::string label;
  LossSpec loss;
  std::optional<PenaltySpec> penalty;  // empty: unpenalized fit
};

/// Parses "<loss><penalty>" labels: loss in {LS, Huber, Logis, ClossR, Closs,
/// Gloss, Qloss}, penalty in {LASSO, SCAD, MCP} or absent. Case-insensitive.
Method method_from_label(const std::string& label, const std::map<LossFamily, double>& sigma = {});

std::vector<std::string> default_methods(Example e);

/// Shape parameters used by the benchmark protocol (ClossR sigma = 10 in
/// Example 1); entries in SimConfig::sigma take precedence.
std::map<LossFamily, double> example_sigma(Example e);

struct SimConfig {
  SimSpec spec = SimSpec::defaults(Example::Ex1Linear);  // v and replicate are overridden per run
  std::vector<double> v_levels{0.0};
  int reps = 1;
  std::vector<std::string> methods;  // empty: default_methods(spec.example)
  std::map<LossFamily, double> sigma;
  PathConfig path;
  FitConfig fit;
  CdConfig cd;
  int jobs = 1;
  bool probe = true;  // Dini probe on each selected nonconvex fit
  bool probe_path = false;  // also probe every converged nonconvex fit along the path
  int probe_dirs = 200;
  double probe_tau = 1e-5;
};

struct SimOutcome {
  std::string method;
  double v = 0.0;
  int rep = 0;
  double lambda = 0.0;       // selected value (0 for unpenalized)
  double error = 0.0;        // population MSE (Example 1) or test misclassification rate
  int nvar = 0;              // nonzero slopes
  bool converged = true;     // selected fit converged
  int path_failures = 0;
  bool probed = false;
  bool probe_pass = true;
  double probe_ratio = 0.0;
  int path_probes = 0;          // converged path fits probed (probe_path)
  int path_probe_failures = 0;
  std::string note;
};

struct SimCell {
  std::string method;
  double v = 0.0;
  double error_mean = 0.0, error_sd = 0.0;
  double nvar_mean = 0.0, nvar_sd = 0.0;
  int converged = 0, total = 0, probe_fail = 0, probed = 0;
  int path_probes = 0, path_probe_failures = 0;
};

struct SimReport {
  SimConfig config;
  std::vector<SimOutcome> outcomes;  // ordered by (v, rep, method)
  std::vector<SimCell> cells;        // ordered by (method, v)
  double bayes_error(double v) const;

  const SimCell& cell(const std::string& method, double v) const;
  double converged_fraction() const;
};

/// Runs every (v, replicate, method) combination: generate the data, fit the
/// training path, select lambda on the tuning set and score the selection.
SimReport run_simulation(const SimConfig& cfg);

/// Tables in "mean(SD)" layout: methods by rows, v by columns.
std::string format_error_table(const SimReport& rep);
std::string format_nvar_table(const SimReport& rep);

/// "0.0547(0.0043)" style cell.
std::string mean_sd(double mean, double sd, int digits);

}  // namespace mmpen
