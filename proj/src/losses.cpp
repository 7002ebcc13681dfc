#include "mmpen/losses.hpp"

#include <algorithm>
#include <cctype>

#include "mmpen/errors.hpp"

namespace mmpen {

namespace {

constexpr double kLn2 = std::numbers::ln2;
constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1 / sqrt(2 pi)

double gloss_bound(double s) {
  // Gamma'' = s 2^s t (1-t)^s ((1+s) t - 1) in t = sigmoid(u); the maximum is
  // the larger root of (1+s)(2+s) t^2 - 3(1+s) t + 1 = 0.
  const double t = (3.0 * (1.0 + s) + std::sqrt((1.0 + s) * (1.0 + 5.0 * s))) /
                   (2.0 * (1.0 + s) * (2.0 + s));
  return s * std::pow(2.0, s) * t * std::pow(1.0 - t, s) * ((1.0 + s) * t - 1.0);
}

double closed_form_bound(LossFamily family, double sigma) {
  switch (family) {
    case LossFamily::LeastSquares:
      return 2.0;
    case LossFamily::Huber:
      return 1.0;
    case LossFamily::Logistic:
      return 1.0 / (4.0 * kLn2);
    case LossFamily::ClossR:
      return 1.0 / (sigma * sigma);
    case LossFamily::Closs:
      return detail::closs_scale(sigma) / (sigma * sigma);
    case LossFamily::Gloss:
      return gloss_bound(sigma);
    case LossFamily::Qloss:
      // max of t phi(t) is at t = 1
      return 2.0 * kInvSqrt2Pi * std::exp(-0.5) / (sigma * sigma);
  }
  return 0.0;
}

void check_finite(double u, const char* what) {
  if (!std::isfinite(u)) throw DomainError(std::string(what) + ": argument is not finite");
}

}  // namespace

LossSpec::LossSpec(LossFamily family, Task task, std::optional<double> sigma)
    : family_(family), task_(task), sigma_(sigma.value_or(default_sigma(family))) {
  if (native_task(family) != task) {
    throw ConfigError("loss '" + to_string(family) + "' does not support task " +
                      mmpen::to_string(task));
  }
  if (!std::isfinite(sigma_)) throw ConfigError("loss shape parameter must be finite");
  switch (family) {
    case LossFamily::Gloss:
      if (!(sigma_ > 1.0)) throw ConfigError("gloss requires sigma > 1");
      break;
    case LossFamily::LeastSquares:
    case LossFamily::Logistic:
      break;
    default:
      if (!(sigma_ > 0.0)) throw ConfigError("loss '" + to_string(family) + "' requires sigma > 0");
  }
  bound_ = closed_form_bound(family_, sigma_);
}

LossSpec LossSpec::from_name(const std::string& name, std::optional<double> sigma) {
  const LossFamily family = loss_family_from_string(name);
  return LossSpec(family, native_task(family), sigma);
}

double LossSpec::default_sigma(LossFamily family) {
  switch (family) {
    case LossFamily::Huber:
      return 1.345;
    case LossFamily::ClossR:
      return 1.0;
    case LossFamily::Closs:
      return 0.9;
    case LossFamily::Gloss:
      return 1.1;
    case LossFamily::Qloss:
      return 0.2;
    default:
      return 1.0;  // unused
  }
}

Task LossSpec::native_task(LossFamily family) {
  switch (family) {
    case LossFamily::LeastSquares:
    case LossFamily::Huber:
    case LossFamily::ClossR:
      return Task::Regression;
    default:
      return Task::Classification;
  }
}

bool LossSpec::convex() const noexcept {
  return family_ == LossFamily::LeastSquares || family_ == LossFamily::Huber ||
         family_ == LossFamily::Logistic;
}

std::string LossSpec::name() const { return to_string(family_); }

std::string to_string(LossFamily family) {
  switch (family) {
    case LossFamily::LeastSquares:
      return "ls";
    case LossFamily::Huber:
      return "huber";
    case LossFamily::Logistic:
      return "logistic";
    case LossFamily::ClossR:
      return "clossr";
    case LossFamily::Closs:
      return "closs";
    case LossFamily::Gloss:
      return "gloss";
    case LossFamily::Qloss:
      return "qloss";
  }
  return "?";
}

LossFamily loss_family_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "ls") return LossFamily::LeastSquares;
  if (s == "huber") return LossFamily::Huber;
  if (s == "logistic") return LossFamily::Logistic;
  if (s == "clossr") return LossFamily::ClossR;
  if (s == "closs") return LossFamily::Closs;
  if (s == "gloss") return LossFamily::Gloss;
  if (s == "qloss") return LossFamily::Qloss;
  throw ConfigError("unknown loss '" + name + "'");
}

double loss_value(const LossSpec& spec, double u) {
  check_finite(u, "loss_value");
  return detail::loss_value_impl<double>(spec.family(), spec.sigma(), u);
}

double loss_grad(const LossSpec& spec, double u) {
  check_finite(u, "loss_grad");
  const double s = spec.sigma();
  switch (spec.family()) {
    case LossFamily::LeastSquares:
      return 2.0 * u;
    case LossFamily::Huber:
      return std::clamp(u, -s, s);
    case LossFamily::Logistic:
      return -detail::sigmoid(-u) / kLn2;
    case LossFamily::ClossR:
      return u / (s * s) * std::exp(-u * u / (2.0 * s * s));
    case LossFamily::Closs: {
      const double m = 1.0 - u;
      return -detail::closs_scale(s) * m / (s * s) * std::exp(-m * m / (2.0 * s * s));
    }
    case LossFamily::Gloss:
      return -s * detail::loss_value_impl<double>(LossFamily::Gloss, s, u) * detail::sigmoid(u);
    case LossFamily::Qloss:
      return -2.0 * kInvSqrt2Pi / s * std::exp(-u * u / (2.0 * s * s));
  }
  return 0.0;
}

double curvature_bound(const LossSpec& spec) { return spec.curvature_bound(); }

double observation_gradient(const LossSpec& spec, double y, double f) {
  if (spec.task() == Task::Regression) return -loss_grad(spec, y - f);
  return y * loss_grad(spec, y * f);
}

double working_response(const LossSpec& spec, double y, double z, double bound) {
  if (!(bound > 0.0)) throw ConfigError("working_response: curvature bound must be positive");
  if (spec.task() == Task::Classification && y != 1.0 && y != -1.0) {
    throw InputError("working_response: classification label must be -1 or +1");
  }
  return z - observation_gradient(spec, y, z) / bound;
}

double empirical_loss_at(const LossSpec& spec, const Eigen::VectorXd& y, const Eigen::VectorXd& f) {
  double sum = 0.0;
  const bool regression = spec.task() == Task::Regression;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    sum += loss_value(spec, regression ? y[i] - f[i] : y[i] * f[i]);
  }
  return sum / static_cast<double>(y.size());
}

double empirical_loss(const LossSpec& spec, const Dataset& data, const Eigen::VectorXd& phi) {
  if (phi.size() != data.p() + 1) {
    throw InputError("empirical_loss: coefficient vector has length " + std::to_string(phi.size()) +
                     ", expected " + std::to_string(data.p() + 1));
  }
  return empirical_loss_at(spec, data.y, data.predict(phi));
}

}  // namespace mmpen
