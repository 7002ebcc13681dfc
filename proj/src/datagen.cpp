#include "mmpen/datagen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "mmpen/errors.hpp"
#include "mmpen/rng.hpp"

namespace mmpen {

namespace {

enum Stream : std::uint64_t { kTrain = 0, kTune = 1, kTest = 2, kContam = 10 };

std::vector<Eigen::Index> choose_rows(Eigen::Index n, double v, Rng& rng) {
  if (!(v >= 0.0 && v <= 100.0)) throw ConfigError("contamination percentage must lie in [0, 100]");
  const auto m = static_cast<Eigen::Index>(std::floor(v * static_cast<double>(n) / 100.0 + 1e-9));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  // partial Fisher-Yates: the first m entries are a uniform subset
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto j = k + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n - k)));
    std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::uint64_t stream_seed(const SimSpec& s, std::uint64_t part) {
  return Rng::stream(s.seed, {static_cast<std::uint64_t>(s.example), s.replicate, part}).next();
}

}  // namespace

std::string to_string(Example e) {
  switch (e) {
    case Example::Ex1Linear:
      return "1";
    case Example::Ex2DiskLinear:
      return "2";
    case Example::Ex3DiskQuadratic:
      return "3";
  }
  return "?";
}

Example example_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s.rfind("ex", 0) == 0) s = s.substr(2);
  if (s == "1") return Example::Ex1Linear;
  if (s == "2") return Example::Ex2DiskLinear;
  if (s == "3") return Example::Ex3DiskQuadratic;
  throw ConfigError("unknown example '" + name + "' (expected 1, 2 or 3)");
}

Task example_task(Example e) {
  return e == Example::Ex1Linear ? Task::Regression : Task::Classification;
}

void SimSpec::validate() const {
  if (n_train < 1 || n_tune < 1 || n_test < 1) throw ConfigError("simulation sizes must be >= 1");
  if (!(v >= 0.0 && v <= 50.0)) throw ConfigError("contamination v must lie in [0, 50]");
  if (!(noise_var > 0.0)) throw ConfigError("noise variance must be positive");
}

SimSpec SimSpec::defaults(Example e) {
  SimSpec s;
  s.example = e;
  switch (e) {
    case Example::Ex1Linear:
      s.n_train = 200;
      s.n_tune = 200;
      s.n_test = 10000;
      s.contaminate_test = false;
      break;
    case Example::Ex2DiskLinear:
      s.n_train = 200;
      s.n_tune = 200;
      s.n_test = 10000;
      s.contaminate_test = true;
      break;
    case Example::Ex3DiskQuadratic:
      s.n_train = 1000;
      s.n_tune = 1000;
      s.n_test = 10000;
      s.contaminate_test = true;
      break;
  }
  return s;
}

Eigen::MatrixXd ar1_covariance(Eigen::Index p, double rho) {
  Eigen::MatrixXd s(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
  }
  return s;
}

Contamination contaminate_multiply(const Eigen::VectorXd& y, double v, double factor, std::uint64_t seed) {
  Rng rng(seed);
  Contamination out{y, choose_rows(y.size(), v, rng)};
  for (Eigen::Index i : out.rows) out.values[i] *= factor;
  return out;
}

Contamination flip_labels(const Eigen::VectorXd& labels, double v, std::uint64_t seed) {
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) throw InputError("flip_labels: labels must be -1 or +1");
  }
  Rng rng(seed);
  Contamination out{labels, choose_rows(labels.size(), v, rng)};
  for (Eigen::Index i : out.rows) out.values[i] = -out.values[i];
  return out;
}

SimData gen_example1(const SimSpec& spec) {
  spec.validate();
  if (spec.example != Example::Ex1Linear) throw ConfigError("gen_example1: spec is not Example 1");
  constexpr Eigen::Index p = 8;
  SimData out;
  Truth& t = out.truth;
  t.example = spec.example;
  t.cov = ar1_covariance(p, 0.5);
  t.phi.resize(p + 1);
  t.phi << 1.0, 3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0;
  t.relevant = {1, 2, 5};
  t.noise_var = spec.noise_var;
  const Eigen::MatrixXd L = t.cov.llt().matrixL();
  const double sd = std::sqrt(spec.noise_var);

  auto draw = [&](int n, std::uint64_t part) {
    Rng rng = Rng::stream(stream_seed(spec, part), {});
    Dataset d;
    d.task = Task::Regression;
    d.x.resize(n, p);
    d.y.resize(n);
    Eigen::VectorXd z(p);
    for (int i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
      d.x.row(i) = (L * z).transpose();
      d.y[i] = t.phi[0] + d.x.row(i).dot(t.phi.tail(p)) + sd * rng.normal();
    }
    for (Eigen::Index j = 0; j < p; ++j) d.names.push_back("x" + std::to_string(j + 1));
    return d;
  };
  out.train = draw(spec.n_train, kTrain);
  out.tune = draw(spec.n_tune, kTune);
  out.test = draw(spec.n_test, kTest);

  auto contam = [&](Dataset& d, std::vector<Eigen::Index>& rows, std::uint64_t part) {
    Contamination c = contaminate_multiply(d.y, spec.v, spec.factor, stream_seed(spec, kContam + part));
    d.y = std::move(c.values);
    rows = std::move(c.rows);
  };
  contam(out.train, t.contaminated_train, kTrain);
  contam(out.tune, t.contaminated_tune, kTune);
  if (spec.contaminate_test) contam(out.test, t.contaminated_test, kTest);
  return out;
}

SimData gen_disk(const SimSpec& spec) {
  spec.validate();
  if (spec.example == Example::Ex1Linear) throw ConfigError("gen_disk: spec is not a disk example");
  const bool quad = spec.example == Example::Ex3DiskQuadratic;
  constexpr Eigen::Index raw = 20;
  const Eigen::Index p = quad ? 2 * raw : raw;
  SimData out;
  Truth& t = out.truth;
  t.example = spec.example;
  t.relevant = quad ? std::vector<Eigen::Index>{raw + 1, raw + 2} : std::vector<Eigen::Index>{1, 2};

  auto draw = [&](int n, std::uint64_t part) {
    Rng rng = Rng::stream(stream_seed(spec, part), {});
    Dataset d;
    d.task = Task::Classification;
    d.intercept = false;
    d.x.resize(n, p);
    d.y.resize(n);
    for (int i = 0; i < n; ++i) {
      double x1, x2;
      do {
        x1 = rng.uniform(-1.0, 1.0);
        x2 = rng.uniform(-1.0, 1.0);
      } while (x1 * x1 + x2 * x2 > 1.0);
      d.x(i, 0) = x1;
      d.x(i, 1) = x2;
      for (Eigen::Index j = 2; j < raw; ++j) d.x(i, j) = rng.uniform(-1.0, 1.0);
      if (quad) {
        for (Eigen::Index j = 0; j < raw; ++j) d.x(i, raw + j) = d.x(i, j) * d.x(i, j);
        d.y[i] = (x1 - x2) * (x1 + x2) < 0.0 ? 1.0 : -1.0;
      } else {
        d.y[i] = x1 >= x2 ? 1.0 : -1.0;
      }
    }
    for (Eigen::Index j = 0; j < raw; ++j) d.names.push_back("x" + std::to_string(j + 1));
    if (quad) {
      for (Eigen::Index j = 0; j < raw; ++j) d.names.push_back("x" + std::to_string(j + 1) + "_sq");
    }
    return d;
  };
  out.train = draw(spec.n_train, kTrain);
  out.tune = draw(spec.n_tune, kTune);
  out.test = draw(spec.n_test, kTest);

  auto contam = [&](Dataset& d, std::vector<Eigen::Index>& rows, std::uint64_t part) {
    Contamination c = flip_labels(d.y, spec.v, stream_seed(spec, kContam + part));
    d.y = std::move(c.values);
    rows = std::move(c.rows);
  };
  contam(out.train, t.contaminated_train, kTrain);
  contam(out.tune, t.contaminated_tune, kTune);
  if (spec.contaminate_test) contam(out.test, t.contaminated_test, kTest);
  t.bayes_error = spec.contaminate_test ? spec.v / 100.0 : 0.0;
  return out;
}

SimData generate(const SimSpec& spec) {
  return spec.example == Example::Ex1Linear ? gen_example1(spec) : gen_disk(spec);
}

double example1_mse(const Eigen::VectorXd& phi_true, const Eigen::VectorXd& phi, const Eigen::MatrixXd& cov) {
  if (phi.size() != phi_true.size() || cov.rows() != phi.size() - 1 || cov.cols() != cov.rows()) {
    throw InputError("example1_mse: dimension mismatch");
  }
  const Eigen::VectorXd d = phi - phi_true;
  const Eigen::VectorXd b = d.tail(d.size() - 1);
  return d[0] * d[0] + b.dot(cov * b);
}

double example1_mse(const Truth& truth, const Eigen::VectorXd& phi) {
  return example1_mse(truth.phi, phi, truth.cov);
}

}  // namespace mmpen
