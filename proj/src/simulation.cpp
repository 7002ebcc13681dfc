#include "mmpen/simulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mmpen/diagnostics.hpp"
#include "mmpen/errors.hpp"
#include "parallel.hpp"

namespace mmpen {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::optional<double> sigma_for(LossFamily f, const std::map<LossFamily, double>& sigma) {
  auto it = sigma.find(f);
  if (it == sigma.end()) return std::nullopt;
  return it->second;
}

void mean_and_sd(const std::vector<double>& xs, double& mean, double& sd) {
  mean = sd = 0.0;
  if (xs.empty()) return;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

int count_nonzero(const Eigen::VectorXd& phi) {
  int k = 0;
  for (Eigen::Index j = 1; j < phi.size(); ++j) k += phi[j] != 0.0;
  return k;
}

}  // namespace

Method method_from_label(const std::string& label, const std::map<LossFamily, double>& sigma) {
  static const std::vector<std::pair<std::string, LossFamily>> losses = {
      {"clossr", LossFamily::ClossR}, {"closs", LossFamily::Closs},   {"gloss", LossFamily::Gloss},
      {"qloss", LossFamily::Qloss},   {"huber", LossFamily::Huber},   {"logistic", LossFamily::Logistic},
      {"logis", LossFamily::Logistic}, {"ls", LossFamily::LeastSquares}};
  const std::string s = lower(label);
  for (const auto& [prefix, family] : losses) {
    if (s.rfind(prefix, 0) != 0) continue;
    const std::string rest = s.substr(prefix.size());
    const LossSpec loss(family, LossSpec::native_task(family), sigma_for(family, sigma));
    if (rest.empty()) return Method{label, loss, std::nullopt};
    return Method{label, loss, PenaltySpec::from_name(rest)};
  }
  throw ConfigError("unknown method '" + label + "'");
}

std::vector<std::string> default_methods(Example e) {
  if (e == Example::Ex1Linear) {
    return {"LS", "LSLASSO", "LSSCAD", "LSMCP", "HuberLASSO", "ClossRLASSO", "ClossRSCAD", "ClossRMCP"};
  }
  return {"Logis",     "LogisLASSO", "LogisSCAD",  "LogisMCP",  "ClossLASSO", "ClossSCAD", "ClossMCP",
          "GlossLASSO", "GlossSCAD", "GlossMCP",  "QlossLASSO", "QlossSCAD", "QlossMCP"};
}

std::map<LossFamily, double> example_sigma(Example e) {
  if (e == Example::Ex1Linear) return {{LossFamily::ClossR, 10.0}};
  return {};
}

double SimReport::bayes_error(double v) const {
  if (config.spec.example == Example::Ex1Linear) return 0.0;
  return config.spec.contaminate_test ? v / 100.0 : 0.0;
}

const SimCell& SimReport::cell(const std::string& method, double v) const {
  for (const auto& c : cells) {
    if (c.method == method && c.v == v) return c;
  }
  throw InputError("no simulation cell for " + method + " at v=" + std::to_string(v));
}

double SimReport::converged_fraction() const {
  if (outcomes.empty()) return 1.0;
  std::size_t ok = 0;
  for (const auto& o : outcomes) ok += o.converged;
  return static_cast<double>(ok) / static_cast<double>(outcomes.size());
}

SimReport run_simulation(const SimConfig& cfg) {
  if (cfg.reps < 1) throw ConfigError("simulate: reps must be >= 1");
  if (cfg.v_levels.empty()) throw ConfigError("simulate: no contamination levels");
  SimReport rep;
  rep.config = cfg;
  if (rep.config.methods.empty()) rep.config.methods = default_methods(cfg.spec.example);
  std::map<LossFamily, double> sigma = example_sigma(cfg.spec.example);
  for (const auto& [family, value] : cfg.sigma) sigma[family] = value;
  std::vector<Method> methods;
  for (const auto& label : rep.config.methods) {
    methods.push_back(method_from_label(label, sigma));
    if (methods.back().loss.task() != example_task(cfg.spec.example)) {
      throw ConfigError("method '" + label + "' does not match the task of example " + to_string(cfg.spec.example));
    }
  }
  const bool regression = example_task(cfg.spec.example) == Task::Regression;
  const int nm = static_cast<int>(methods.size());
  const int nv = static_cast<int>(cfg.v_levels.size());
  const int units = nv * cfg.reps;
  rep.outcomes.resize(static_cast<std::size_t>(units * nm));

  detail::parallel_for(units, cfg.jobs, [&](int unit) {
    const int vi = unit / cfg.reps;
    const int r = unit % cfg.reps;
    SimSpec spec = cfg.spec;
    spec.v = cfg.v_levels[static_cast<std::size_t>(vi)];
    spec.replicate = static_cast<std::uint64_t>(r);
    const SimData data = generate(spec);
    for (int m = 0; m < nm; ++m) {
      const Method& method = methods[static_cast<std::size_t>(m)];
      SimOutcome& out = rep.outcomes[static_cast<std::size_t>(unit * nm + m)];
      out.method = method.label;
      out.v = spec.v;
      out.rep = r;
      Eigen::VectorXd phi;
      const PenaltySpec* pen = nullptr;
      try {
        if (!method.penalty) {
          FitConfig fc = cfg.fit;
          const FitResult fr = fit_unpenalized(data.train, method.loss, fc);
          phi = fr.phi;
          out.converged = fr.converged;
        } else {
          pen = &*method.penalty;
          PathResult path;
          const CvMetric metric = regression ? CvMetric::LossValue : CvMetric::MisclassRate;
          const CvResult cv = tune_holdout(data.train, data.tune, method.loss, *pen, cfg.path, metric,
                                           cfg.fit, cfg.cd, &path);
          out.lambda = cv.best_lambda;
          const auto k = static_cast<std::size_t>(cv.best_index);
          phi = path.per_lambda[k].phi;
          out.converged = path.per_lambda[k].converged;
          for (const auto& f : path.failures) out.path_failures += !f.empty();
          if (cfg.probe_path && !method.loss.convex()) {
            for (std::size_t j = 0; j < path.per_lambda.size(); ++j) {
              if (!path.per_lambda[j].converged) continue;
              const DiniProbe probe = dini_stationarity_probe(
                  data.train, method.loss, *pen, path.lambdas[j], path.per_lambda[j].phi, cfg.probe_dirs,
                  cfg.probe_tau, spec.seed + static_cast<std::uint64_t>(unit));
              ++out.path_probes;
              out.path_probe_failures += !probe.stationary;
            }
          }
        }
      } catch (const ConvergenceError& e) {
        phi = e.last_iterate();
        out.converged = false;
        out.note = e.what();
      }
      out.error = regression ? example1_mse(data.truth, phi)
                             : evaluate_metric(CvMetric::MisclassRate, method.loss, data.test.y,
                                               data.test.predict(phi));
      out.nvar = count_nonzero(phi);
      if (cfg.probe && !method.loss.convex() && out.converged) {
        const PenaltySpec none(PenaltyFamily::Lasso);
        const DiniProbe probe = dini_stationarity_probe(data.train, method.loss, pen ? *pen : none,
                                                        pen ? out.lambda : 0.0, phi, cfg.probe_dirs,
                                                        cfg.probe_tau, spec.seed + static_cast<std::uint64_t>(unit));
        out.probed = true;
        out.probe_pass = probe.stationary;
        out.probe_ratio = probe.worst_ratio;
      }
    }
  });

  for (int m = 0; m < nm; ++m) {
    for (int vi = 0; vi < nv; ++vi) {
      SimCell c;
      c.method = methods[static_cast<std::size_t>(m)].label;
      c.v = cfg.v_levels[static_cast<std::size_t>(vi)];
      std::vector<double> err, nvar;
      for (int r = 0; r < cfg.reps; ++r) {
        const SimOutcome& o =
            rep.outcomes[static_cast<std::size_t>((vi * cfg.reps + r) * nm + m)];
        err.push_back(o.error);
        nvar.push_back(o.nvar);
        c.converged += o.converged;
        c.probed += o.probed;
        c.probe_fail += o.probed && !o.probe_pass;
        c.path_probes += o.path_probes;
        c.path_probe_failures += o.path_probe_failures;
        ++c.total;
      }
      mean_and_sd(err, c.error_mean, c.error_sd);
      mean_and_sd(nvar, c.nvar_mean, c.nvar_sd);
      rep.cells.push_back(c);
    }
  }
  return rep;
}

std::string mean_sd(double mean, double sd, int digits) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.*f(%.*f)", digits, mean, digits, sd);
  return buf;
}

namespace {

std::string format_table(const SimReport& rep, bool error) {
  const int digits = error ? 4 : 1;
  std::ostringstream os;
  std::size_t width = 10;
  for (const auto& m : rep.config.methods) width = std::max(width, m.size() + 2);
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  os << pad("Method", width);
  for (double v : rep.config.v_levels) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "v=%g", v);
    os << pad(buf, 18);
  }
  os << '\n';
  if (rep.config.spec.example != Example::Ex1Linear) {
    os << pad("Bayes", width);
    for (double v : rep.config.v_levels) {
      char buf[32];
      if (error) {
        std::snprintf(buf, sizeof buf, "%g", rep.bayes_error(v));
      } else {
        std::snprintf(buf, sizeof buf, "%d", 2);
      }
      os << pad(buf, 18);
    }
    os << '\n';
  }
  for (const auto& m : rep.config.methods) {
    os << pad(m, width);
    for (double v : rep.config.v_levels) {
      const SimCell& c = rep.cell(m, v);
      std::string s = error ? mean_sd(c.error_mean, c.error_sd, digits)
                            : mean_sd(c.nvar_mean, c.nvar_sd, digits);
      if (error && rep.config.spec.example == Example::Ex1Linear && c.error_mean > 1e4) s = ">1e+4";
      os << pad(s, 18);
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace

std::string format_error_table(const SimReport& rep) { return format_table(rep, true); }
std::string format_nvar_table(const SimReport& rep) { return format_table(rep, false); }

}  // namespace mmpen
