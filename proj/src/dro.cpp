#include "dorfl/dro.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dorfl {

namespace detail {

AscentResult ascend(const Vec& x0, const std::function<double(const Vec&)>& value_fn,
                    const std::function<Vec(const Vec&)>& grad_fn, double step,
                    double grad_tol, int max_iters) {
  AscentResult res;
  Vec x = x0;
  res.value = value_fn(x);
  res.x = x;
  int it = 0;
  for (; it < max_iters; ++it) {
    const Vec g = grad_fn(x);
    res.grad_norm = g.norm();
    if (res.grad_norm <= grad_tol) break;
    x += step * g;
    const double v = value_fn(x);
    if (v > res.value) {
      res.value = v;
      res.x = x;
    }
  }
  res.iterations = it;
  return res;
}

double logsumexp(const Vec& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;  // all -inf stays -inf
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) s += std::exp(v[i] - m);
  return m + std::log(s);
}

}  // namespace detail

double loss_curvature_bound(const Vec& theta, const OutlierScoreSpec& score) {
  double bound = theta.squaredNorm() / 4.0;
  if (score.variant == ScoreVariant::Quadratic) bound -= 2.0 * score.rho2;
  return bound;
}

InnerMaxResult inner_maximize(const Vec& theta, const Sample& zeta, const HyperParams& hp,
                              const OutlierScoreSpec& score) {
  hp.validate();
  score.validate(zeta.dim());
  const double curvature = loss_curvature_bound(theta, score);
  if (!(hp.rho > curvature)) {
    std::ostringstream msg;
    msg << "inner_maximize: rho=" << hp.rho
        << " does not exceed the loss curvature bound " << curvature
        << " (objective not strongly concave); increase rho or shrink theta";
    throw std::invalid_argument(msg.str());
  }
  const double mu = hp.rho - curvature;  // strong concavity modulus
  const double smoothness =
      hp.rho + theta.squaredNorm() / 4.0 +
      (score.variant == ScoreVariant::Quadratic ? 2.0 * score.rho2 : 0.0);

  const int label = zeta.y;
  auto value_fn = [&](const Vec& x) {
    Sample s{x, label};
    return adjusted_loss(theta, s, score) - hp.rho * 0.5 * (x - zeta.x).squaredNorm();
  };
  auto grad_fn = [&](const Vec& x) {
    Sample s{x, label};
    return Vec(adjusted_loss_grad_xi(theta, s, score) - hp.rho * (x - zeta.x));
  };

  const detail::AscentResult res = detail::ascend(zeta.x, value_fn, grad_fn, 1.0 / smoothness,
                                                  hp.inner_tol * mu, hp.inner_max_iters);
  InnerMaxResult out;
  out.maximizer = Sample{res.x, label};
  out.value = res.value;
  out.iterations = res.iterations;
  out.grad_norm_at_exit = res.grad_norm;
  return out;
}

double dual_objective_H(const Vec& theta, const Vec& lambda,
                        const std::vector<DiscreteDistribution>& clients,
                        const HyperParams& hp, const OutlierScoreSpec& score) {
  if (clients.empty()) throw std::invalid_argument("dual_objective_H: no clients");
  if (lambda.size() != static_cast<int>(clients.size())) {
    throw std::invalid_argument("dual_objective_H: lambda/client count mismatch");
  }
  const double rb = hp.rho * hp.beta;
  double total = 0.0;
  for (size_t i = 0; i < clients.size(); ++i) {
    if (lambda[static_cast<int>(i)] < 0) {
      throw std::invalid_argument("dual_objective_H: negative lambda entry");
    }
    if (lambda[static_cast<int>(i)] == 0) continue;
    clients[i].validate();
    double client_mean = 0.0;
    for (int j = 0; j < clients[i].size(); ++j) {
      if (clients[i].weights[j] == 0) continue;
      const InnerMaxResult inner = inner_maximize(theta, clients[i].atoms[j], hp, score);
      client_mean += clients[i].weights[j] * std::exp(inner.value / rb);
    }
    total += lambda[static_cast<int>(i)] * client_mean;
  }
  return total;
}

Vec grad_theta_estimate(const Vec& theta, const Sample& zeta, const HyperParams& hp,
                        const OutlierScoreSpec& score) {
  const InnerMaxResult inner = inner_maximize(theta, zeta, hp, score);
  const double rb = hp.rho * hp.beta;
  return (std::exp(inner.value / rb) / rb) * logistic_loss_grad_theta(theta, inner.maximizer);
}

double grad_lambda_estimate(const Vec& theta, const Sample& zeta, const HyperParams& hp,
                            const OutlierScoreSpec& score) {
  const InnerMaxResult inner = inner_maximize(theta, zeta, hp, score);
  return std::exp(inner.value / (hp.rho * hp.beta));
}

double primal_sup_on_grid(const Vec& theta, const DiscreteDistribution& p_hat,
                          const HyperParams& hp, const OutlierScoreSpec& score,
                          const std::vector<Sample>& grid, const GridSupOptions& opts) {
  if (grid.empty()) throw std::invalid_argument("primal_sup_on_grid: empty grid");
  p_hat.validate();
  hp.validate();
  const int n = static_cast<int>(grid.size());
  const int m = p_hat.size();
  const double rb = hp.rho * hp.beta;

  // Payoff of putting coupling mass on (grid atom i, reference atom j):
  // adjusted loss at the grid atom minus the transport penalty.
  Eigen::MatrixXd payoff(n, m);
  bool any_feasible = false;
  for (int i = 0; i < n; ++i) {
    const double loss_i = adjusted_loss(theta, grid[i], score);
    for (int j = 0; j < m; ++j) {
      const double c = transport_cost(grid[i], p_hat.atoms[j]);
      payoff(i, j) = std::isfinite(c) && p_hat.weights[j] > 0
                         ? loss_i - hp.rho * c
                         : -std::numeric_limits<double>::infinity();
      if (std::isfinite(payoff(i, j))) any_feasible = true;
    }
  }
  if (!any_feasible) {
    throw std::invalid_argument("primal_sup_on_grid: no grid atom shares a label with p_hat");
  }

  // Exponentiated-gradient ascent on the joint coupling, kept in log domain.
  // The objective sum gamma payoff - rho beta KL(colsum || q) is concave and
  // rho beta relatively smooth, so a constant step 1/(rho beta) converges.
  Eigen::MatrixXd log_gamma(n, m);
  int feasible_count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (std::isfinite(payoff(i, j))) ++feasible_count;
    }
  }
  const double init = -std::log(static_cast<double>(feasible_count));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      log_gamma(i, j) =
          std::isfinite(payoff(i, j)) ? init : -std::numeric_limits<double>::infinity();
    }
  }

  const double step = 1.0 / rb;
  double best = -std::numeric_limits<double>::infinity();
  Eigen::MatrixXd grad(n, m);
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    Vec nu = Vec::Zero(m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (std::isfinite(log_gamma(i, j))) nu[j] += std::exp(log_gamma(i, j));
      }
    }
    double value = 0.0;
    for (int j = 0; j < m; ++j) {
      if (nu[j] > 0) value -= rb * nu[j] * std::log(nu[j] / p_hat.weights[j]);
    }
    double inner_prod = 0.0;
    double grad_max = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (!std::isfinite(payoff(i, j))) {
          grad(i, j) = -std::numeric_limits<double>::infinity();
          continue;
        }
        const double g =
            payoff(i, j) - rb * (std::log(std::max(nu[j], 1e-300) / p_hat.weights[j]) + 1.0);
        grad(i, j) = g;
        const double mass = std::exp(log_gamma(i, j));
        value += mass * payoff(i, j);
        inner_prod += mass * g;
        grad_max = std::max(grad_max, g);
      }
    }
    best = std::max(best, value);
    if (grad_max - inner_prod <= opts.tol) break;

    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) {
        if (std::isfinite(log_gamma(i, j))) log_gamma(i, j) += step * grad(i, j);
      }
    }
    const double lse = detail::logsumexp(Eigen::Map<const Vec>(log_gamma.data(), n * m));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) log_gamma(i, j) -= lse;
    }
  }
  return best;
}

CertificateReport robustness_certificate(const Vec& theta, const Vec& lambda,
                                         const std::vector<DiscreteDistribution>& clients,
                                         const HyperParams& hp, const OutlierScoreSpec& score) {
  if (clients.empty()) throw std::invalid_argument("robustness_certificate: no clients");
  if (lambda.size() != static_cast<int>(clients.size())) {
    throw std::invalid_argument("robustness_certificate: lambda/client count mismatch");
  }
  const double rb = hp.rho * hp.beta;

  // Pool the mixture's atoms, dropping zero-weight ones.
  std::vector<Sample> zetas;
  std::vector<double> q;
  for (size_t i = 0; i < clients.size(); ++i) {
    const double li = lambda[static_cast<int>(i)];
    if (li < 0) throw std::invalid_argument("robustness_certificate: negative lambda entry");
    if (li == 0) continue;
    clients[i].validate();
    for (int j = 0; j < clients[i].size(); ++j) {
      const double w = li * clients[i].weights[j];
      if (w > 0) {
        zetas.push_back(clients[i].atoms[j]);
        q.push_back(w);
      }
    }
  }
  if (zetas.empty()) {
    throw std::invalid_argument("robustness_certificate: mixture carries no mass");
  }

  const int k = static_cast<int>(zetas.size());
  std::vector<Sample> maximizers(k);
  Vec f(k), cost(k), tilted_log(k);
  for (int j = 0; j < k; ++j) {
    const InnerMaxResult inner = inner_maximize(theta, zetas[j], hp, score);
    maximizers[j] = inner.maximizer;
    f[j] = inner.value;
    cost[j] = transport_cost(inner.maximizer, zetas[j]);
    tilted_log[j] = f[j] / rb + std::log(q[j]);
  }

  const double lse = detail::logsumexp(tilted_log);
  CertificateReport report;
  report.dual_value = rb * lse;

  Vec w(k);
  double radius = 0.0, robust = 0.0;
  for (int j = 0; j < k; ++j) {
    w[j] = std::exp(tilted_log[j] - lse);
    radius += w[j] * cost[j];                  // transport part of r_hat
    radius += hp.beta * w[j] * (f[j] / rb - lse);  // KL part: log(w_j / q_j)
    robust += w[j] * adjusted_loss(theta, maximizers[j], score);
  }
  if (radius < 0 && radius > -1e-12) radius = 0.0;

  report.worst_case = DiscreteDistribution(std::move(maximizers), w);
  report.induced_radius = radius;
  report.robust_value = robust;
  report.bound = hp.rho * radius + report.dual_value;

  const double tol = 1e-9 * std::max(1.0, std::abs(report.bound));
  if (std::abs(report.robust_value - report.bound) > tol) {
    std::ostringstream msg;
    msg << "robustness_certificate: equality violated (robust=" << report.robust_value
        << ", bound=" << report.bound << ")";
    throw std::runtime_error(msg.str());
  }
  return report;
}

}  // namespace dorfl
