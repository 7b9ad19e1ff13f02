#include "dorfl/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "dorfl/projections.hpp"

namespace dorfl {

namespace {

constexpr double kTinyMass = 1e-300;

struct UwProblem {
  Eigen::MatrixXd cost;                   // +inf where labels differ
  std::vector<std::vector<int>> allowed;  // feasible columns per row
};

UwProblem build_problem(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.dim() != q.dim()) {
    throw std::invalid_argument("uw_distance_discrete: atom dimensions differ");
  }
  const int n = p.size(), m = q.size();
  UwProblem prob;
  prob.cost.resize(n, m);
  prob.allowed.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      prob.cost(i, j) = transport_cost(p.atoms[i], q.atoms[j]);
      if (std::isfinite(prob.cost(i, j))) prob.allowed[i].push_back(j);
    }
    if (p.weights[i] > 0 && prob.allowed[i].empty()) {
      throw std::invalid_argument(
          "uw_distance_discrete: an atom of p has no same-label transport target in q");
    }
  }
  return prob;
}

bool atoms_identical(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  if (p.size() != q.size()) return false;
  for (int i = 0; i < p.size(); ++i) {
    if (p.atoms[i].y != q.atoms[i].y || p.atoms[i].x != q.atoms[i].x) return false;
  }
  return true;
}

double uw_objective(const Eigen::MatrixXd& gamma, const UwProblem& prob,
                    const Vec& q, double beta) {
  double total = 0.0;
  const int n = static_cast<int>(gamma.rows()), m = static_cast<int>(gamma.cols());
  Vec nu = Vec::Zero(m);
  for (int i = 0; i < n; ++i) {
    for (int j : prob.allowed[i]) {
      total += gamma(i, j) * prob.cost(i, j);
      nu[j] += gamma(i, j);
    }
  }
  for (int j = 0; j < m; ++j) {
    if (nu[j] > 0) total += beta * nu[j] * std::log(nu[j] / q[j]);
  }
  return total;
}

// Gradient over the allowed entries; masked entries are left untouched.
void uw_gradient(const Eigen::MatrixXd& gamma, const UwProblem& prob, const Vec& q,
                 double beta, Eigen::MatrixXd& grad) {
  const int m = static_cast<int>(gamma.cols());
  Vec nu = Vec::Zero(m);
  for (int i = 0; i < gamma.rows(); ++i) {
    for (int j : prob.allowed[i]) nu[j] += gamma(i, j);
  }
  for (int i = 0; i < gamma.rows(); ++i) {
    for (int j : prob.allowed[i]) {
      grad(i, j) = prob.cost(i, j) + beta * (std::log(std::max(nu[j], kTinyMass) / q[j]) + 1.0);
    }
  }
}

// Projection of one row onto {w >= 0, sum w = mass} restricted to the
// allowed columns.
void project_row(Eigen::MatrixXd& gamma, int i, const std::vector<int>& allowed,
                 double mass, const Vec& scratch) {
  const int k = static_cast<int>(allowed.size());
  Vec v(k);
  for (int a = 0; a < k; ++a) v[a] = scratch[a];
  Vec proj = project_simplex(v / mass) * mass;
  for (int a = 0; a < k; ++a) gamma(i, allowed[a]) = proj[a];
}

}  // namespace

UwResult uw_distance_discrete(const DiscreteDistribution& p, const DiscreteDistribution& q,
                              double beta, const UwOptions& opts) {
  p.validate();
  q.validate();
  if (!(beta > 0)) throw std::invalid_argument("uw_distance_discrete: beta must be positive");
  for (int j = 0; j < q.size(); ++j) {
    if (q.weights[j] <= 0) {
      throw std::invalid_argument(
          "uw_distance_discrete: q has a zero weight (KL reference must be strictly positive)");
    }
  }
  const UwProblem prob = build_problem(p, q);
  const int n = p.size(), m = q.size();

  Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, m);
  if (atoms_identical(p, q)) {
    for (int i = 0; i < n; ++i) gamma(i, i) = p.weights[i];
  } else {
    for (int i = 0; i < n; ++i) {
      if (p.weights[i] == 0) continue;
      double denom = 0.0;
      for (int j : prob.allowed[i]) denom += q.weights[j];
      for (int j : prob.allowed[i]) gamma(i, j) = p.weights[i] * q.weights[j] / denom;
    }
  }

  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, m);
  double value = uw_objective(gamma, prob, q.weights, beta);
  double step = 1.0;
  double fw_gap = std::numeric_limits<double>::infinity();
  int iter = 0;

  for (; iter < opts.max_iters; ++iter) {
    uw_gradient(gamma, prob, q.weights, beta, grad);

    // Frank-Wolfe gap: linear slack against the best vertex of the feasible
    // product of scaled simplices; upper-bounds the suboptimality.
    double inner = 0.0, best = 0.0;
    for (int i = 0; i < n; ++i) {
      if (p.weights[i] == 0) continue;
      double row_min = std::numeric_limits<double>::infinity();
      for (int j : prob.allowed[i]) {
        inner += gamma(i, j) * grad(i, j);
        row_min = std::min(row_min, grad(i, j));
      }
      best += p.weights[i] * row_min;
    }
    fw_gap = inner - best;
    if (fw_gap <= opts.tol) break;

    // Backtracking projected gradient step.
    step *= 2.0;
    Eigen::MatrixXd trial = gamma;
    for (int attempt = 0; attempt < 60; ++attempt) {
      for (int i = 0; i < n; ++i) {
        if (p.weights[i] == 0) continue;
        Vec scratch(static_cast<int>(prob.allowed[i].size()));
        for (size_t a = 0; a < prob.allowed[i].size(); ++a) {
          const int j = prob.allowed[i][a];
          scratch[static_cast<int>(a)] = gamma(i, j) - step * grad(i, j);
        }
        project_row(trial, i, prob.allowed[i], p.weights[i], scratch);
      }
      const double trial_value = uw_objective(trial, prob, q.weights, beta);
      double linear = 0.0, sqdist = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j : prob.allowed[i]) {
          const double d = trial(i, j) - gamma(i, j);
          linear += grad(i, j) * d;
          sqdist += d * d;
        }
      }
      if (trial_value <= value + linear + sqdist / (2.0 * step) + 1e-15) {
        gamma = trial;
        value = trial_value;
        break;
      }
      step *= 0.5;
    }
  }

  UwResult result;
  result.coupling = gamma;
  result.value = value;
  result.iterations = iter;
  result.fw_gap = fw_gap;
  Vec nu = Vec::Zero(m);
  for (int i = 0; i < n; ++i) {
    for (int j : prob.allowed[i]) nu[j] += gamma(i, j);
  }
  result.pbar = DiscreteDistribution(q.atoms, nu);
  return result;
}

double wasserstein_1d_exact(const DiscreteDistribution& p, const DiscreteDistribution& q) {
  p.validate();
  q.validate();
  if (p.dim() != 1 || q.dim() != 1) {
    throw std::invalid_argument("wasserstein_1d_exact: atoms must be one-dimensional");
  }
  const int label = p.atoms.front().y;
  for (const Sample& s : p.atoms) {
    if (s.y != label) throw std::invalid_argument("wasserstein_1d_exact: mixed labels in p");
  }
  for (const Sample& s : q.atoms) {
    if (s.y != label) throw std::invalid_argument("wasserstein_1d_exact: mixed labels in q");
  }

  auto sorted_order = [](const DiscreteDistribution& d) {
    std::vector<int> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return d.atoms[a].x[0] < d.atoms[b].x[0]; });
    return idx;
  };
  const std::vector<int> ip = sorted_order(p), iq = sorted_order(q);

  // Monotone coupling over the sorted atoms.
  double total = 0.0;
  size_t a = 0, b = 0;
  double wa = p.weights[ip[0]], wb = q.weights[iq[0]];
  while (a < ip.size() && b < iq.size()) {
    const double f = std::min(wa, wb);
    const double d = p.atoms[ip[a]].x[0] - q.atoms[iq[b]].x[0];
    total += f * 0.5 * d * d;
    wa -= f;
    wb -= f;
    if (wa <= 0) {
      ++a;
      if (a < ip.size()) wa = p.weights[ip[a]];
    }
    if (wb <= 0) {
      ++b;
      if (b < iq.size()) wb = q.weights[iq[b]];
    }
  }
  return total;
}

Lemma1Result lemma1_check(const DiscreteDistribution& p_star, const DiscreteDistribution& p_bar,
                          const DiscreteDistribution& p_hat, double beta) {
  if (!atoms_identical(p_bar, p_hat)) {
    throw std::invalid_argument(
        "lemma1_check: p_bar must share p_hat's atom list (absolute continuity)");
  }
  for (int j = 0; j < p_bar.size(); ++j) {
    if (p_bar.weights[j] > 0 && p_hat.weights[j] <= 0) {
      throw std::invalid_argument("lemma1_check: p_bar puts mass where p_hat has none");
    }
  }
  Lemma1Result out;
  out.lhs = uw_distance_discrete(p_star, p_hat, beta).value;
  out.rhs = wasserstein_1d_exact(p_star, p_bar) + beta * kl_divergence(p_bar.weights, p_hat.weights);
  return out;
}

}  // namespace dorfl
