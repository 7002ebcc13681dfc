#include "mmpen/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmpen/csv_io.hpp"
#include "mmpen/diagnostics.hpp"
#include "mmpen/errors.hpp"
#include "mmpen/path_tuning.hpp"
#include "mmpen/simulation.hpp"
#include "mmpen/version.hpp"

namespace mmpen {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::string data;
  std::string response = "y";
  std::string task;
  std::string loss;
  std::optional<double> sigma;
  std::string penalty = "lasso";
  std::optional<double> a;
  double alpha = 1.0;
  std::optional<double> lambda;
  int nlambda = 100;
  std::optional<double> lambda_min_ratio;
  std::string path_direction = "forward";
  int nfolds = 5;
  std::string tuning_file;
  std::string metric;
  std::string out;
  std::uint64_t seed = 1;
  bool no_intercept = false;
  std::string init = "pilot";
  double outer_tol = FitConfig{}.outer_tol;
  int max_outer = FitConfig{}.max_outer;
  double cd_tol = CdConfig{}.tol;
  std::string model;
  // simulate
  std::string example = "2";
  std::vector<double> v{0.0, 5.0, 10.0, 20.0};
  int reps = 10;
  std::string methods;
  int jobs = 1;
  int data_reps = 1;
};

fs::path output_dir(const Options& o) {
  std::string dir = o.out;
  if (dir.empty()) {
    const char* env = std::getenv("MMPEN_OUT_DIR");
    dir = env && *env ? env : ".";
  }
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory '" + dir + "': " + ec.message());
  return p;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& s) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << s;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("model file '" + path + "' is not valid JSON: " + e.what());
  }
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd json_vec(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  return v;
}

LossSpec make_loss(const Options& o) {
  if (o.loss.empty()) throw ConfigError("--loss is required");
  LossSpec loss = LossSpec::from_name(o.loss, o.sigma);
  if (!o.task.empty() && task_from_string(o.task) != loss.task()) {
    throw ConfigError("--task " + o.task + " does not match loss '" + o.loss + "'");
  }
  return loss;
}

InitMode init_from_string(const std::string& s) {
  if (s == "zeros") return InitMode::Zeros;
  if (s == "intercept") return InitMode::InterceptOnly;
  if (s == "pilot") return InitMode::ConvexPilot;
  throw ConfigError("unknown --init '" + s + "' (expected zeros, intercept or pilot)");
}

FitConfig make_fit_cfg(const Options& o) {
  FitConfig c;
  c.outer_tol = o.outer_tol;
  c.max_outer = o.max_outer;
  c.init = init_from_string(o.init);
  c.validate();
  return c;
}

CdConfig make_cd_cfg(const Options& o) {
  CdConfig c;
  c.tol = o.cd_tol;
  c.validate();
  return c;
}

PathConfig make_path_cfg(const Options& o) {
  PathConfig c;
  c.K = o.nlambda;
  c.eps = o.lambda_min_ratio;
  c.direction = path_direction_from_string(o.path_direction);
  c.validate();
  return c;
}

Dataset load_data(const Options& o, const LossSpec& loss, std::ostream& err) {
  if (o.data.empty()) throw ConfigError("--data is required");
  CsvDataset d = read_dataset(o.data, o.response, loss.task(), !o.no_intercept);
  if (d.mapped_zero_labels) err << "note: response labels 0 were mapped to -1\n";
  return std::move(d.data);
}

std::vector<std::string> coef_names(const Dataset& d) {
  std::vector<std::string> names{"(Intercept)"};
  for (Eigen::Index j = 0; j < d.p(); ++j) {
    names.push_back(d.names.empty() ? "x" + std::to_string(j + 1) : d.names[static_cast<std::size_t>(j)]);
  }
  return names;
}

json config_json(const Options& o, const std::string& command, const LossSpec* loss, const PenaltySpec* pen) {
  json c;
  c["command"] = command;
  if (!o.data.empty()) c["data"] = o.data;
  c["response"] = o.response;
  if (loss) {
    c["task"] = to_string(loss->task());
    c["loss"] = loss->name();
    c["sigma"] = loss->sigma();
    c["curvature_bound"] = loss->curvature_bound();
  }
  if (pen) {
    c["penalty"] = pen->name();
    c["a"] = pen->a();
    c["alpha"] = pen->alpha();
  }
  if (o.lambda) c["lambda"] = *o.lambda;
  c["intercept"] = !o.no_intercept;
  c["init"] = o.init;
  c["outer_tol"] = o.outer_tol;
  c["max_outer"] = o.max_outer;
  c["cd_tol"] = o.cd_tol;
  c["seed"] = o.seed;
  return c;
}

json header_json(const std::string& command) {
  json j;
  j["schema"] = kSchemaVersion;
  j["version"] = kVersion;
  j["command"] = command;
  return j;
}

json kkt_json(const KktReport& r) {
  json j;
  j["max_residual"] = r.max_residual;
  j["residuals"] = vec_json(r.residuals);
  j["active_set"] = r.active_set;
  json rules = json::array();
  for (KktRule k : r.rule_used) {
    rules.push_back(k == KktRule::Intercept             ? "intercept"
                    : k == KktRule::NonzeroStationarity ? "nonzero_stationarity"
                                                        : "zero_subgradient_bound");
  }
  j["rule_used"] = rules;
  return j;
}

CsvTable path_table(const PathResult& path, const Dataset& d) {
  CsvTable t;
  t.header = {"lambda", "converged", "n_outer", "objective", "kkt_max_residual"};
  for (const auto& n : coef_names(d)) t.header.push_back(n);
  for (std::size_t k = 0; k < path.lambdas.size(); ++k) {
    const FitResult& f = path.per_lambda[k];
    std::vector<std::string> r{format_double(path.lambdas[k]), f.converged ? "1" : "0", std::to_string(f.n_outer),
                               format_double(f.objective_trace.empty() ? std::nan("") : f.objective_trace.back()),
                               format_double(f.kkt_max_residual)};
    for (Eigen::Index j = 0; j < path.coefs.cols(); ++j) r.push_back(format_double(path.coefs(static_cast<Eigen::Index>(k), j)));
    t.rows.push_back(std::move(r));
  }
  return t;
}

// ---------------------------------------------------------------- fit

int cmd_fit(const Options& o, std::ostream& out, std::ostream& err) {
  const LossSpec loss = make_loss(o);
  const PenaltySpec pen = PenaltySpec::from_name(o.penalty, o.a, o.alpha);
  if (!o.lambda) throw ConfigError("fit requires --lambda");
  const Dataset data = load_data(o, loss, err);
  const FitConfig fc = make_fit_cfg(o);
  const CdConfig cd = make_cd_cfg(o);
  const fs::path dir = output_dir(o);

  FitResult res;
  int code = kExitOk;
  std::string message;
  try {
    res = fit(data, loss, pen, *o.lambda, fc, cd);
  } catch (const ConvergenceError& e) {
    res.phi = e.last_iterate();
    res.objective_trace = e.trace();
    res.n_outer = static_cast<int>(e.trace().size()) - 1;
    res.converged = false;
    message = e.what();
    code = kExitConvergence;
  }
  const KktReport kkt = kkt_residual(data, loss, pen, *o.lambda, res.phi);
  const auto names = coef_names(data);

  json j = header_json("fit");
  j["config"] = config_json(o, "fit", &loss, &pen);
  j["predictors"] = std::vector<std::string>(names.begin() + 1, names.end());
  json coefs;
  for (std::size_t k = 0; k < names.size(); ++k) coefs[names[k]] = res.phi[static_cast<Eigen::Index>(k)];
  j["coefficients"] = coefs;
  j["phi"] = vec_json(res.phi);
  j["lambda_max"] = lambda_max(data, loss, pen.alpha());
  j["objective"] = objective(data, loss, pen, *o.lambda, res.phi);
  j["in_sample_loss"] = empirical_loss(loss, data, res.phi);
  j["objective_trace"] = res.objective_trace;
  j["n_outer"] = res.n_outer;
  j["converged"] = res.converged;
  if (!message.empty()) j["error"] = message;
  j["kkt"] = kkt_json(kkt);
  write_json(dir / "fit.json", j);

  CsvTable t;
  t.header = {"term", "estimate"};
  for (std::size_t k = 0; k < names.size(); ++k) t.rows.push_back({names[k], format_double(res.phi[static_cast<Eigen::Index>(k)])});
  write_csv_file((dir / "coefs.csv").string(), t);

  out << "fit: " << loss.name() << "/" << pen.name() << " lambda=" << *o.lambda << " converged=" << res.converged
      << " n_outer=" << res.n_outer << " objective=" << j["objective"].get<double>()
      << " kkt=" << kkt.max_residual << "\n";
  if (code != kExitOk) err << "error: " << message << "\n";
  return code;
}

// ---------------------------------------------------------------- path

int cmd_path(const Options& o, std::ostream& out, std::ostream& err) {
  const LossSpec loss = make_loss(o);
  const PenaltySpec pen = PenaltySpec::from_name(o.penalty, o.a, o.alpha);
  const Dataset data = load_data(o, loss, err);
  const PathConfig pc = make_path_cfg(o);
  const PathResult path = solution_path(data, loss, pen, pc, make_fit_cfg(o), make_cd_cfg(o));
  const fs::path dir = output_dir(o);
  write_csv_file((dir / "path.csv").string(), path_table(path, data));

  json j = header_json("path");
  json cfg = config_json(o, "path", &loss, &pen);
  cfg["nlambda"] = pc.K;
  cfg["lambda_min_ratio"] = pc.resolved_eps(data.n(), data.p());
  cfg["direction"] = to_string(pc.direction);
  j["config"] = cfg;
  j["lambda_max"] = path.lambda_max;
  j["lambdas"] = path.lambdas;
  int failed = 0;
  json failures = json::array();
  for (std::size_t k = 0; k < path.failures.size(); ++k) {
    if (path.failures[k].empty()) continue;
    ++failed;
    failures.push_back({{"index", k}, {"lambda", path.lambdas[k]}, {"message", path.failures[k]}});
  }
  j["n_failed"] = failed;
  j["failures"] = failures;
  write_json(dir / "path.json", j);
  out << "path: " << path.lambdas.size() << " lambdas from " << path.lambda_max << ", " << failed
      << " did not converge\n";
  return kExitOk;
}

// ---------------------------------------------------------------- cv

int cmd_cv(const Options& o, std::ostream& out, std::ostream& err) {
  const LossSpec loss = make_loss(o);
  const PenaltySpec pen = PenaltySpec::from_name(o.penalty, o.a, o.alpha);
  const Dataset data = load_data(o, loss, err);
  const PathConfig pc = make_path_cfg(o);
  const FitConfig fc = make_fit_cfg(o);
  const CdConfig cd = make_cd_cfg(o);
  const CvMetric metric = o.metric.empty()
                              ? (loss.task() == Task::Regression ? CvMetric::Mse : CvMetric::MisclassRate)
                              : cv_metric_from_string(o.metric);
  const fs::path dir = output_dir(o);

  CvResult cv;
  PathResult full;
  const bool holdout = !o.tuning_file.empty();
  if (holdout) {
    CsvDataset tune = read_dataset(o.tuning_file, o.response, loss.task(), !o.no_intercept);
    cv = tune_holdout(data, tune.data, loss, pen, pc, metric, fc, cd, &full);
  } else {
    cv = cross_validate(data, loss, pen, pc, o.nfolds, metric, fc, cd, o.seed, o.jobs);
    full = solution_path_on_grid(data, loss, pen, cv.lambdas, pc.direction, fc, cd);
  }

  CsvTable t;
  t.header = {"lambda", "mean", "sd"};
  for (Eigen::Index f = 0; f < cv.fold_metric.rows(); ++f) {
    t.header.push_back(holdout ? "tuning" : "fold_" + std::to_string(f + 1));
  }
  for (std::size_t k = 0; k < cv.lambdas.size(); ++k) {
    std::vector<std::string> r{format_double(cv.lambdas[k]), format_double(cv.mean_metric[k]),
                               format_double(cv.sd_metric[k])};
    for (Eigen::Index f = 0; f < cv.fold_metric.rows(); ++f) {
      const double m = cv.fold_metric(f, static_cast<Eigen::Index>(k));
      r.push_back(std::isnan(m) ? "" : format_double(m));
    }
    t.rows.push_back(std::move(r));
  }
  write_csv_file((dir / "cv.csv").string(), t);
  if (!holdout) {
    CsvTable folds;
    folds.header = {"row", "fold"};
    for (std::size_t i = 0; i < cv.fold_of_row.size(); ++i) {
      folds.rows.push_back({std::to_string(i + 1), std::to_string(cv.fold_of_row[i] + 1)});
    }
    write_csv_file((dir / "folds.csv").string(), folds);
  }

  const auto best = static_cast<std::size_t>(cv.best_index);
  const auto names = coef_names(data);
  json j = header_json("cv");
  json cfg = config_json(o, "cv", &loss, &pen);
  cfg["nlambda"] = pc.K;
  cfg["direction"] = to_string(pc.direction);
  cfg["metric"] = to_string(metric);
  if (holdout) cfg["tuning_file"] = o.tuning_file;
  else cfg["nfolds"] = o.nfolds;
  j["config"] = cfg;
  j["best_lambda"] = cv.best_lambda;
  j["best_index"] = cv.best_index;
  j["best_metric"] = cv.mean_metric[best];
  json coefs;
  for (std::size_t k = 0; k < names.size(); ++k) coefs[names[k]] = full.coefs(cv.best_index, static_cast<Eigen::Index>(k));
  j["coefficients"] = coefs;
  j["converged"] = full.per_lambda[best].converged;
  int missing = 0;
  for (Eigen::Index f = 0; f < cv.fold_metric.rows(); ++f) missing += std::isnan(cv.fold_metric(f, 0));
  j["missing_folds"] = missing;
  write_json(dir / "cv.json", j);
  out << "cv: best lambda " << cv.best_lambda << " (index " << cv.best_index << ") " << to_string(metric) << "="
      << cv.mean_metric[best] << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- model-based commands

struct Model {
  LossSpec loss;
  PenaltySpec pen;
  double lambda;
  bool intercept;
  std::vector<std::string> predictors;
  Eigen::VectorXd phi;
};

Model load_model(const std::string& path) {
  const json j = read_json(path);
  try {
    const json& c = j.at("config");
    Model m{LossSpec::from_name(c.at("loss").get<std::string>(), c.at("sigma").get<double>()),
            PenaltySpec::from_name(c.at("penalty").get<std::string>(), c.at("a").get<double>(),
                                   c.at("alpha").get<double>()),
            c.at("lambda").get<double>(),
            c.at("intercept").get<bool>(),
            j.at("predictors").get<std::vector<std::string>>(),
            json_vec(j.at("phi"))};
    if (m.phi.size() != static_cast<Eigen::Index>(m.predictors.size()) + 1) {
      throw InputError("model file '" + path + "': phi length does not match predictors");
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError("model file '" + path + "' is missing fields: " + e.what());
  }
}

/// Design columns in model order; the response is read when present.
Dataset model_data(const Model& m, const std::string& path, const std::string& response, bool& has_response) {
  const CsvTable t = read_csv_file(path);
  has_response = false;
  for (const auto& h : t.header) has_response |= h == response;
  Dataset d;
  d.task = m.loss.task();
  d.intercept = m.intercept;
  d.names = m.predictors;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  d.x.resize(n, static_cast<Eigen::Index>(m.predictors.size()));
  d.y = Eigen::VectorXd::Ones(n);
  std::vector<std::size_t> cols;
  for (const auto& name : m.predictors) cols.push_back(t.column(name));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = t.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < cols.size(); ++j) {
      d.x(i, static_cast<Eigen::Index>(j)) = parse_double(r[cols[j]], static_cast<std::size_t>(i), t.header[cols[j]]);
    }
  }
  if (has_response) {
    CsvTable yt;
    yt.header = {response};
    const std::size_t yc = t.column(response);
    for (const auto& r : t.rows) yt.rows.push_back({r[yc]});
    CsvDataset yd = dataset_from_csv(yt, response, d.task, d.intercept);
    d.y = yd.data.y;
  }
  return d;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream&) {
  if (o.model.empty()) throw ConfigError("predict requires --model");
  if (o.data.empty()) throw ConfigError("--data is required");
  const Model m = load_model(o.model);
  bool has_y = false;
  const Dataset d = model_data(m, o.data, o.response, has_y);
  const Eigen::VectorXd f = d.predict(m.phi);
  const fs::path dir = output_dir(o);

  CsvTable t;
  t.header = {"row", "linear_predictor"};
  const bool cls = m.loss.task() == Task::Classification;
  if (cls) t.header.push_back("label");
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    std::vector<std::string> r{std::to_string(i + 1), format_double(f[i])};
    if (cls) r.push_back(f[i] >= 0.0 ? "1" : "-1");
    t.rows.push_back(std::move(r));
  }
  write_csv_file((dir / "predictions.csv").string(), t);

  json j = header_json("predict");
  json cfg;
  cfg["model"] = o.model;
  cfg["data"] = o.data;
  cfg["response"] = o.response;
  cfg["loss"] = m.loss.name();
  cfg["sigma"] = m.loss.sigma();
  j["config"] = cfg;
  j["n"] = d.n();
  if (has_y) {
    j["in_sample_loss"] = empirical_loss_at(m.loss, d.y, f);
    j[cls ? "misclassification_rate" : "mse"] =
        evaluate_metric(cls ? CvMetric::MisclassRate : CvMetric::Mse, m.loss, d.y, f);
  }
  write_json(dir / "predict.json", j);
  out << "predict: " << f.size() << " rows";
  if (has_y) out << ", loss=" << j["in_sample_loss"].get<double>();
  out << "\n";
  return kExitOk;
}

int cmd_kkt(const Options& o, std::ostream& out, std::ostream&) {
  if (o.model.empty()) throw ConfigError("kkt requires --model");
  if (o.data.empty()) throw ConfigError("--data is required");
  const Model m = load_model(o.model);
  bool has_y = false;
  const Dataset d = model_data(m, o.data, o.response, has_y);
  if (!has_y) throw InputError("column '" + o.response + "' not found in CSV header");
  const double lambda = o.lambda.value_or(m.lambda);
  const KktReport rep = kkt_residual(d, m.loss, m.pen, lambda, m.phi);
  const DiniProbe probe = dini_stationarity_probe(d, m.loss, m.pen, lambda, m.phi, 200, 1e-5, o.seed);
  json j = header_json("kkt");
  json cfg;
  cfg["model"] = o.model;
  cfg["data"] = o.data;
  cfg["loss"] = m.loss.name();
  cfg["sigma"] = m.loss.sigma();
  cfg["penalty"] = m.pen.name();
  cfg["a"] = m.pen.a();
  cfg["alpha"] = m.pen.alpha();
  cfg["lambda"] = lambda;
  cfg["seed"] = o.seed;
  j["config"] = cfg;
  j["kkt"] = kkt_json(rep);
  j["dini_probe"] = {{"stationary", probe.stationary},
                     {"worst_ratio", probe.worst_ratio},
                     {"directions", probe.directions},
                     {"tau", 1e-5}};
  const fs::path dir = output_dir(o);
  write_json(dir / "kkt.json", j);
  out << "kkt: max residual " << rep.max_residual << ", dini probe " << (probe.stationary ? "pass" : "fail") << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json truth_json(const SimData& d, const SimSpec& s) {
  json j = header_json("simulate");
  j["example"] = to_string(s.example);
  j["v"] = s.v;
  j["seed"] = s.seed;
  j["replicate"] = s.replicate;
  j["noise_variance"] = s.example == Example::Ex1Linear ? json(s.noise_var) : json(nullptr);
  if (d.truth.phi.size()) j["phi"] = vec_json(d.truth.phi);
  j["relevant"] = d.truth.relevant;
  j["bayes_error"] = d.truth.bayes_error;
  j["contaminated_train"] = d.truth.contaminated_train;
  j["contaminated_tune"] = d.truth.contaminated_tune;
  j["contaminated_test"] = d.truth.contaminated_test;
  j["contaminate_test"] = s.contaminate_test;
  j["intercept"] = d.train.intercept;
  return j;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream&) {
  SimConfig cfg;
  const Example ex = example_from_string(o.example);
  cfg.spec = SimSpec::defaults(ex);
  cfg.spec.seed = o.seed;
  cfg.v_levels = o.v;
  cfg.reps = o.reps;
  cfg.methods = split_list(o.methods);
  cfg.jobs = o.jobs;
  cfg.fit.outer_tol = o.outer_tol;
  cfg.fit.max_outer = o.max_outer;
  cfg.cd.tol = o.cd_tol;
  cfg.path.K = o.nlambda;
  cfg.path.eps = o.lambda_min_ratio;
  cfg.path.direction = path_direction_from_string(o.path_direction);
  cfg.path.validate();
  const fs::path dir = output_dir(o);

  const SimReport rep = run_simulation(cfg);

  fs::create_directories(dir / "data");
  for (double v : cfg.v_levels) {
    for (int r = 0; r < std::min(o.data_reps, cfg.reps); ++r) {
      SimSpec s = cfg.spec;
      s.v = v;
      s.replicate = static_cast<std::uint64_t>(r);
      const SimData d = generate(s);
      char stem[64];
      std::snprintf(stem, sizeof stem, "ex%s_v%g_rep%d", to_string(ex).c_str(), v, r);
      write_csv_file((dir / "data" / (std::string(stem) + "_train.csv")).string(), dataset_to_csv(d.train));
      write_csv_file((dir / "data" / (std::string(stem) + "_tune.csv")).string(), dataset_to_csv(d.tune));
      write_csv_file((dir / "data" / (std::string(stem) + "_test.csv")).string(), dataset_to_csv(d.test));
      write_json(dir / "data" / (std::string(stem) + "_truth.json"), truth_json(d, s));
    }
  }

  CsvTable t;
  t.header = {"method", "v", "rep", "lambda", "error", "nvar", "converged", "path_failures", "probed", "probe_pass", "probe_ratio"};
  for (const auto& r : rep.outcomes) {
    t.rows.push_back({r.method, format_double(r.v), std::to_string(r.rep), format_double(r.lambda), format_double(r.error),
                      std::to_string(r.nvar), r.converged ? "1" : "0", std::to_string(r.path_failures),
                      r.probed ? "1" : "0", r.probe_pass ? "1" : "0", format_double(r.probe_ratio)});
  }
  write_csv_file((dir / "results.csv").string(), t);
  const std::string err_table = format_error_table(rep);
  const std::string nvar_table = format_nvar_table(rep);
  write_text(dir / "table_error.txt", err_table);
  write_text(dir / "table_nvar.txt", nvar_table);

  json j = header_json("simulate");
  json c;
  c["example"] = to_string(ex);
  c["v"] = cfg.v_levels;
  c["reps"] = cfg.reps;
  c["seed"] = cfg.spec.seed;
  c["n_train"] = cfg.spec.n_train;
  c["n_tune"] = cfg.spec.n_tune;
  c["n_test"] = cfg.spec.n_test;
  c["contaminate_test"] = cfg.spec.contaminate_test;
  c["noise_variance"] = cfg.spec.noise_var;
  c["factor"] = cfg.spec.factor;
  c["methods"] = cfg.methods.empty() ? default_methods(ex) : cfg.methods;
  c["nlambda"] = cfg.path.K;
  c["direction"] = to_string(cfg.path.direction);
  c["outer_tol"] = cfg.fit.outer_tol;
  c["max_outer"] = cfg.fit.max_outer;
  c["cd_tol"] = cfg.cd.tol;
  c["jobs"] = cfg.jobs;
  j["config"] = c;
  json cells = json::array();
  for (const auto& cell : rep.cells) {
    cells.push_back({{"method", cell.method},
                     {"v", cell.v},
                     {"error_mean", cell.error_mean},
                     {"error_sd", cell.error_sd},
                     {"nvar_mean", cell.nvar_mean},
                     {"nvar_sd", cell.nvar_sd},
                     {"converged", cell.converged},
                     {"total", cell.total},
                     {"probed", cell.probed},
                     {"probe_failures", cell.probe_fail}});
  }
  j["cells"] = cells;
  j["converged_fraction"] = rep.converged_fraction();
  write_json(dir / "simulate.json", j);

  out << "Test error\n" << err_table << "\nSelected variables\n" << nvar_table;
  out << "converged fraction: " << rep.converged_fraction() << "\n";
  return rep.converged_fraction() >= 0.9 ? kExitOk : kExitConvergence;
}

void add_model_options(CLI::App* sc, Options& o) {
  sc->add_option("--data", o.data, "CSV file with a header row");
  sc->add_option("--response", o.response, "response column name")->capture_default_str();
  sc->add_option("--task", o.task, "regression or classification (checked against --loss)");
  sc->add_option("--loss", o.loss, "ls, huber, logistic, clossr, closs, gloss or qloss");
  sc->add_option("--sigma", o.sigma, "loss shape parameter (huber: delta)");
  sc->add_option("--penalty", o.penalty, "lasso, scad or mcp")->capture_default_str();
  sc->add_option("--a", o.a, "SCAD/MCP concavity (default 3.7 / 3)");
  sc->add_option("--alpha", o.alpha, "elastic-net mixing in (0, 1]")->capture_default_str();
  sc->add_flag("--no-intercept", o.no_intercept, "fit without an intercept");
  sc->add_option("--init", o.init, "zeros, intercept or pilot")->capture_default_str();
  sc->add_option("--outer-tol", o.outer_tol, "relative MM stopping tolerance")->capture_default_str();
  sc->add_option("--max-outer", o.max_outer, "MM iteration limit")->capture_default_str();
  sc->add_option("--cd-tol", o.cd_tol, "coordinate descent tolerance")->capture_default_str();
  sc->add_option("--out", o.out, "output directory (default $MMPEN_OUT_DIR or .)");
  sc->add_option("--seed", o.seed, "random seed")->capture_default_str();
}

void add_path_options(CLI::App* sc, Options& o) {
  sc->add_option("--nlambda", o.nlambda, "grid size")->capture_default_str();
  sc->add_option("--lambda-min-ratio", o.lambda_min_ratio, "lambda_min / lambda_max");
  sc->add_option("--path-direction", o.path_direction, "forward or backward")->capture_default_str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Penalized robust regression and classification by majorization-minimization"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  auto* fit_cmd = app.add_subcommand("fit", "fit one lambda; writes fit.json and coefs.csv");
  add_model_options(fit_cmd, o);
  fit_cmd->add_option("--lambda", o.lambda, "penalty level");

  auto* path_cmd = app.add_subcommand("path", "solution path; writes path.csv and path.json");
  add_model_options(path_cmd, o);
  add_path_options(path_cmd, o);

  auto* cv_cmd = app.add_subcommand("cv", "tune lambda; writes cv.csv, folds.csv and cv.json");
  add_model_options(cv_cmd, o);
  add_path_options(cv_cmd, o);
  cv_cmd->add_option("--nfolds", o.nfolds, "number of folds")->capture_default_str();
  cv_cmd->add_option("--tuning-file", o.tuning_file, "held-out tuning CSV instead of folds");
  cv_cmd->add_option("--metric", o.metric, "mse, misclass or loss");
  cv_cmd->add_option("--jobs", o.jobs, "folds fitted concurrently")->capture_default_str();

  auto* predict_cmd = app.add_subcommand("predict", "score a CSV with a fitted model");
  predict_cmd->add_option("--model", o.model, "fit.json from the fit command");
  predict_cmd->add_option("--data", o.data, "CSV with the model's predictor columns");
  predict_cmd->add_option("--response", o.response, "response column (optional in the file)")->capture_default_str();
  predict_cmd->add_option("--out", o.out, "output directory");

  auto* kkt_cmd = app.add_subcommand("kkt", "optimality report for a fitted model; writes kkt.json");
  kkt_cmd->add_option("--model", o.model, "fit.json from the fit command");
  kkt_cmd->add_option("--data", o.data, "training CSV");
  kkt_cmd->add_option("--response", o.response, "response column")->capture_default_str();
  kkt_cmd->add_option("--lambda", o.lambda, "override the model's lambda");
  kkt_cmd->add_option("--seed", o.seed, "probe seed")->capture_default_str();
  kkt_cmd->add_option("--out", o.out, "output directory");

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo benchmark for Examples 1-3");
  sim_cmd->add_option("--example", o.example, "1, 2 or 3")->capture_default_str();
  sim_cmd->add_option("--v", o.v, "contamination percentages")->delimiter(',')->capture_default_str();
  sim_cmd->add_option("--reps", o.reps, "replicates")->capture_default_str();
  sim_cmd->add_option("--seed", o.seed, "random seed")->capture_default_str();
  sim_cmd->add_option("--methods", o.methods, "comma-separated labels, e.g. GlossSCAD,LogisLASSO");
  sim_cmd->add_option("--jobs", o.jobs, "replicates run concurrently")->capture_default_str();
  sim_cmd->add_option("--data-reps", o.data_reps, "replicates whose data files are written")->capture_default_str();
  sim_cmd->add_option("--out", o.out, "output directory");
  sim_cmd->add_option("--outer-tol", o.outer_tol, "relative MM stopping tolerance")->capture_default_str();
  sim_cmd->add_option("--max-outer", o.max_outer, "MM iteration limit")->capture_default_str();
  sim_cmd->add_option("--cd-tol", o.cd_tol, "coordinate descent tolerance")->capture_default_str();
  add_path_options(sim_cmd, o);

  // CLI11's vector overload takes arguments reversed, without the program name
  std::vector<std::string> rev;
  if (!args.empty()) rev.assign(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (*fit_cmd) return cmd_fit(o, out, err);
    if (*path_cmd) return cmd_path(o, out, err);
    if (*cv_cmd) return cmd_cv(o, out, err);
    if (*predict_cmd) return cmd_predict(o, out, err);
    if (*kkt_cmd) return cmd_kkt(o, out, err);
    if (*sim_cmd) return cmd_simulate(o, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitInput;
}

}  // namespace mmpen
