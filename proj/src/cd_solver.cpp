#include "mmpen/cd_solver.hpp"

#include <cmath>
#include <limits>

#include "mmpen/errors.hpp"

namespace mmpen {

Design::Design(const Eigen::MatrixXd& x, bool intercept, bool center)
    : work_(x), intercept_(intercept), centered_(intercept && center) {
  const Eigen::Index p = x.cols();
  const double n = static_cast<double>(x.rows());
  means_ = Eigen::VectorXd::Zero(p);
  if (centered_) {
    means_ = x.colwise().mean().transpose();
    work_.rowwise() -= means_.transpose();
  }
  sumsq_ = work_.colwise().squaredNorm().transpose();
  degenerate_.assign(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double scale = 1.0 + means_[j] * means_[j] + x.col(j).cwiseAbs().maxCoeff();
    degenerate_[static_cast<std::size_t>(j)] = sumsq_[j] <= 1e-24 * n * scale * scale;
  }
}

void CdConfig::validate() const {
  if (!(tol > 0.0)) throw ConfigError("coordinate descent tol must be positive");
  if (max_sweeps < 1) throw ConfigError("coordinate descent max_sweeps must be >= 1");
}

double pwls_objective(const PwlsProblem& prob, const Eigen::VectorXd& phi) {
  const Design& design = prob.design;
  if (phi.size() != design.p() + 1 || prob.h.size() != design.n()) {
    throw InputError("pwls_objective: dimension mismatch");
  }
  // work columns are x - mean, so x'phi = (b0 + mean'b) + work'b
  Eigen::VectorXd f = design.work() * phi.tail(design.p());
  if (design.intercept()) f.array() += phi[0] + design.means().dot(phi.tail(design.p()));
  const double n = static_cast<double>(design.n());
  return prob.bound / (2.0 * n) * (prob.h - f).squaredNorm() +
         penalty_total(prob.penalty, prob.lambda, phi);
}

namespace {

class CoordinateDescent {
 public:
  CoordinateDescent(const PwlsProblem& prob, const CdConfig& cfg, const std::vector<bool>* allowed)
      : prob_(prob), design_(prob.design), cfg_(cfg), allowed_(allowed) {
    const double n = static_cast<double>(design_.n());
    scale_ = prob.bound / n;
    v_ = scale_ * design_.sumsq();
  }

  PwlsResult run(const std::optional<Eigen::VectorXd>& warm) {
    const Eigen::Index p = design_.p();
    beta_ = Eigen::VectorXd::Zero(p);
    double b0 = 0.0;
    if (warm) {
      if (warm->size() != p + 1) throw InputError("solve_pwls: warm start has wrong length");
      for (Eigen::Index j = 0; j < p; ++j) {
        if (movable(j)) beta_[j] = (*warm)[j + 1];
      }
      b0 = design_.intercept() ? (*warm)[0] : 0.0;
    }
    intercept_ = design_.intercept() ? b0 + design_.means().dot(beta_) : 0.0;
    resid_ = prob_.h - design_.work() * beta_;
    resid_.array() -= intercept_;

    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (movable(j) && (!warm || beta_[j] != 0.0)) active.push_back(j);
    }
    std::vector<Eigen::Index> full;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (movable(j)) full.push_back(j);
    }

    PwlsResult out;
    double obj = objective();
    out.objective_trace.push_back(obj);
    const double floor = 1e-14 * std::max(1.0, std::abs(obj));
    auto small_change = [&](double before, double after) {
      return std::abs(before - after) <= cfg_.tol * std::max(std::abs(after), floor);
    };

    while (out.sweeps < cfg_.max_sweeps) {
      // converge on the current active set
      while (out.sweeps < cfg_.max_sweeps) {
        const double before = obj;
        sweep(active);
        obj = objective();
        out.objective_trace.push_back(obj);
        ++out.sweeps;
        if (small_change(before, obj)) break;
      }
      if (out.sweeps >= cfg_.max_sweeps) break;
      // one pass over every allowed coordinate
      const double before = obj;
      sweep(full);
      obj = objective();
      out.objective_trace.push_back(obj);
      ++out.sweeps;
      std::vector<Eigen::Index> next;
      for (Eigen::Index j : full) {
        if (beta_[j] != 0.0) next.push_back(j);
      }
      const bool stable = next == active;
      if (stable && small_change(before, obj)) {
        out.converged = true;
        break;
      }
      active = std::move(next);
    }

    out.phi.resize(p + 1);
    out.phi.tail(p) = beta_;
    out.phi[0] = design_.intercept() ? intercept_ - design_.means().dot(beta_) : 0.0;
    out.fitted = prob_.h - resid_;
    return out;
  }

 private:
  bool movable(Eigen::Index j) const {
    if (design_.degenerate(j)) return false;
    return allowed_ == nullptr || (*allowed_)[static_cast<std::size_t>(j)];
  }

  double objective() const {
    double pen = 0.0;
    for (Eigen::Index j = 0; j < beta_.size(); ++j) {
      if (beta_[j] != 0.0) pen += penalty_term(prob_.penalty, prob_.lambda, beta_[j]);
    }
    return 0.5 * scale_ * resid_.squaredNorm() + pen;
  }

  void sweep(const std::vector<Eigen::Index>& coords) {
    if (design_.intercept()) {
      const double shift = resid_.mean();
      intercept_ += shift;
      resid_.array() -= shift;
    }
    const Eigen::MatrixXd& w = design_.work();
    for (Eigen::Index j : coords) {
      const double old = beta_[j];
      const double z = scale_ * w.col(j).dot(resid_) + v_[j] * old;
      const double updated = threshold_update(prob_.penalty, z, v_[j], prob_.lambda);
      if (updated != old) {
        resid_.noalias() -= (updated - old) * w.col(j);
        beta_[j] = updated;
      }
    }
  }

  const PwlsProblem& prob_;
  const Design& design_;
  const CdConfig& cfg_;
  const std::vector<bool>* allowed_;
  double scale_ = 0.0;
  Eigen::VectorXd v_;
  Eigen::VectorXd beta_;
  Eigen::VectorXd resid_;
  double intercept_ = 0.0;
};

}  // namespace

PwlsResult solve_pwls_unchecked(const PwlsProblem& prob, const CdConfig& cfg,
                                const std::optional<Eigen::VectorXd>& warm,
                                const std::vector<bool>* allowed) {
  cfg.validate();
  if (prob.h.size() != prob.design.n()) throw InputError("solve_pwls: h has wrong length");
  if (!(prob.bound > 0.0)) throw ConfigError("solve_pwls: weight B must be positive");
  if (!(prob.lambda >= 0.0)) throw ConfigError("solve_pwls: lambda must be nonnegative");
  if (allowed != nullptr && static_cast<Eigen::Index>(allowed->size()) != prob.design.p()) {
    throw InputError("solve_pwls: allowed mask has wrong length");
  }
  CoordinateDescent cd(prob, cfg, allowed);
  return cd.run(warm);
}

PwlsResult solve_pwls(const PwlsProblem& prob, const CdConfig& cfg,
                      const std::optional<Eigen::VectorXd>& warm) {
  PwlsResult out = solve_pwls_unchecked(prob, cfg, warm);
  if (!out.converged) {
    throw ConvergenceError("coordinate descent did not converge within " +
                               std::to_string(cfg.max_sweeps) + " sweeps",
                           out.phi, out.objective_trace);
  }
  return out;
}

}  // namespace mmpen
