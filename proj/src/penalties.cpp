#include "mmpen/penalties.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>

#include "mmpen/errors.hpp"

namespace mmpen {

namespace {

double soft(double z, double gamma) { return std::max(std::abs(z) - gamma, 0.0); }

struct Candidates {
  std::array<double, 6> theta{};
  int count = 0;
  void add(double t) { theta[count++] = t; }
};

// Minimize (d/2) t^2 - |z| t + alpha p(t) over t >= 0 by exhausting the
// quadratic pieces. Candidates are added in increasing order of t so the
// strict comparison resolves ties toward more shrinkage.
double enumerate_pieces(const PenaltySpec& spec, double az, double d, double lambda) {
  const double alpha = spec.alpha();
  const double a = spec.a();
  Candidates c;
  if (spec.family() == PenaltyFamily::Mcp) {
    const double c1 = d - alpha / a;
    const double b1 = az - alpha * lambda;
    c.add(0.0);
    if (c1 > 0.0) c.add(std::clamp(b1 / c1, 0.0, a * lambda));
    c.add(a * lambda);
    c.add(std::max(az / d, a * lambda));
  } else {
    c.add(0.0);
    c.add(std::clamp((az - alpha * lambda) / d, 0.0, lambda));
    const double c2 = d - alpha / (a - 1.0);
    const double b2 = az - alpha * a * lambda / (a - 1.0);
    c.add(lambda);
    if (c2 > 0.0) c.add(std::clamp(b2 / c2, lambda, a * lambda));
    c.add(a * lambda);
    c.add(std::max(az / d, a * lambda));
  }
  std::sort(c.theta.begin(), c.theta.begin() + c.count);
  double best_t = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < c.count; ++k) {
    const double t = c.theta[k];
    const double g = 0.5 * d * t * t - az * t + alpha * penalty_value(spec, lambda, t);
    if (g < best) {
      best = g;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace

PenaltySpec::PenaltySpec(PenaltyFamily family, std::optional<double> a, double alpha)
    : family_(family), a_(a.value_or(default_a(family))), alpha_(alpha) {
  if (!(alpha_ > 0.0 && alpha_ <= 1.0)) {
    throw ConfigError("penalty mixing alpha must lie in (0, 1]");
  }
  if (family_ == PenaltyFamily::Scad && !(a_ > 2.0)) throw ConfigError("SCAD requires a > 2");
  if (family_ == PenaltyFamily::Mcp && !(a_ > 1.0)) throw ConfigError("MCP requires a > 1");
  if (!std::isfinite(a_)) throw ConfigError("penalty parameter a must be finite");
}

PenaltySpec PenaltySpec::from_name(const std::string& name, std::optional<double> a,
                                   double alpha) {
  return PenaltySpec(penalty_family_from_string(name), a, alpha);
}

double PenaltySpec::default_a(PenaltyFamily family) {
  switch (family) {
    case PenaltyFamily::Scad:
      return 3.7;
    case PenaltyFamily::Mcp:
      return 3.0;
    case PenaltyFamily::Lasso:
      break;
  }
  return 0.0;  // unused
}

std::string PenaltySpec::name() const { return to_string(family_); }

std::string to_string(PenaltyFamily family) {
  switch (family) {
    case PenaltyFamily::Lasso:
      return "lasso";
    case PenaltyFamily::Scad:
      return "scad";
    case PenaltyFamily::Mcp:
      return "mcp";
  }
  return "?";
}

PenaltyFamily penalty_family_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "lasso") return PenaltyFamily::Lasso;
  if (s == "scad") return PenaltyFamily::Scad;
  if (s == "mcp") return PenaltyFamily::Mcp;
  throw ConfigError("unknown penalty '" + name + "'");
}

double penalty_value(const PenaltySpec& spec, double lambda, double theta) {
  if (!(lambda >= 0.0) || !(theta >= 0.0)) {
    throw InputError("penalty_value: lambda and theta must be nonnegative");
  }
  const double a = spec.a();
  switch (spec.family()) {
    case PenaltyFamily::Lasso:
      return lambda * theta;
    case PenaltyFamily::Mcp:
      if (theta <= a * lambda) return lambda * theta - theta * theta / (2.0 * a);
      return a * lambda * lambda / 2.0;
    case PenaltyFamily::Scad:
      if (theta <= lambda) return lambda * theta;
      if (theta <= a * lambda) {
        return (2.0 * a * lambda * theta - theta * theta - lambda * lambda) / (2.0 * (a - 1.0));
      }
      return lambda * lambda * (a + 1.0) / 2.0;
  }
  return 0.0;
}

double penalty_deriv(const PenaltySpec& spec, double lambda, double theta) {
  if (!(theta > 0.0)) throw InputError("penalty_deriv: theta must be positive");
  if (!(lambda >= 0.0)) throw InputError("penalty_deriv: lambda must be nonnegative");
  const double a = spec.a();
  switch (spec.family()) {
    case PenaltyFamily::Lasso:
      return lambda;
    case PenaltyFamily::Mcp:
      return theta <= a * lambda ? lambda - theta / a : 0.0;
    case PenaltyFamily::Scad:
      if (theta < lambda) return lambda;
      return std::max(a * lambda - theta, 0.0) / (a - 1.0);
  }
  return 0.0;
}

bool threshold_is_convex(const PenaltySpec& spec, double v, double lambda) {
  const double d = v + lambda * (1.0 - spec.alpha());
  switch (spec.family()) {
    case PenaltyFamily::Lasso:
      return d > 0.0;
    case PenaltyFamily::Mcp:
      return d - spec.alpha() / spec.a() > 0.0;
    case PenaltyFamily::Scad:
      return d - spec.alpha() / (spec.a() - 1.0) > 0.0;
  }
  return false;
}

double threshold_update(const PenaltySpec& spec, double z, double v, double lambda) {
  if (!(v > 0.0)) throw ConfigError("threshold_update: v must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("threshold_update: lambda must be nonnegative");
  const double alpha = spec.alpha();
  const double a = spec.a();
  const double d = v + lambda * (1.0 - alpha);
  const double az = std::abs(z);
  const double sign = z < 0.0 ? -1.0 : 1.0;
  double theta = 0.0;
  if (lambda == 0.0) {
    theta = az / d;
  } else if (spec.family() == PenaltyFamily::Lasso) {
    theta = soft(az, alpha * lambda) / d;
  } else if (!threshold_is_convex(spec, v, lambda)) {
    theta = enumerate_pieces(spec, az, d, lambda);
  } else if (spec.family() == PenaltyFamily::Mcp) {
    theta = az <= a * lambda * d ? soft(az, alpha * lambda) / (d - alpha / a) : az / d;
  } else {
    if (az <= lambda * (d + alpha)) {
      theta = soft(az, alpha * lambda) / d;
    } else if (az <= a * lambda * d) {
      theta = soft(az, alpha * a * lambda / (a - 1.0)) / (d - alpha / (a - 1.0));
    } else {
      theta = az / d;
    }
  }
  return sign * theta;
}

double penalty_term(const PenaltySpec& spec, double lambda, double beta) {
  return spec.alpha() * penalty_value(spec, lambda, std::abs(beta)) +
         0.5 * lambda * (1.0 - spec.alpha()) * beta * beta;
}

double penalty_total(const PenaltySpec& spec, double lambda, const Eigen::VectorXd& phi) {
  double sum = 0.0;
  for (Eigen::Index j = 1; j < phi.size(); ++j) sum += penalty_term(spec, lambda, phi[j]);
  return sum;
}

}  // namespace mmpen
