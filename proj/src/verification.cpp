#include "dorfl/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dorfl/datasets.hpp"
#include "dorfl/federation.hpp"
#include "dorfl/projections.hpp"
#include "dorfl/rng.hpp"

namespace dorfl {

namespace {

Vec random_simplex_point(rng::Stream& stream, int n) {
  Vec w(n);
  for (int i = 0; i < n; ++i) w[i] = -std::log(std::max(stream.u01(), 1e-16));
  return w / w.sum();
}

DiscreteDistribution random_distribution(rng::Stream& stream, int n_atoms, int d, int label,
                                         double spread = 1.5) {
  std::vector<Sample> atoms;
  for (int j = 0; j < n_atoms; ++j) {
    Vec x(d);
    for (int k = 0; k < d; ++k) x[k] = spread * stream.normal();
    atoms.emplace_back(std::move(x), label);
  }
  return DiscreteDistribution(std::move(atoms), random_simplex_point(stream, n_atoms));
}

// theta drawn with norm comfortably below the strong-concavity wall 2 sqrt(rho).
Vec random_feasible_theta(rng::Stream& stream, int d, double rho) {
  Vec theta(d);
  for (int k = 0; k < d; ++k) theta[k] = stream.normal();
  const double target = 0.9 * 2.0 * std::sqrt(rho) * stream.u01();
  const double norm = theta.norm();
  return norm > 0 ? Vec(theta * (target / norm)) : theta;
}

}  // namespace

Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& x, double h) {
  Vec grad(x.size());
  Vec probe = x;
  for (int k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double up = fn(probe);
    probe[k] = x[k] - h;
    const double down = fn(probe);
    probe[k] = x[k];
    grad[k] = (up - down) / (2.0 * h);
  }
  return grad;
}

Vec simplex_qp_oracle(const Vec& v) {
  const int n = static_cast<int>(v.size());
  if (n > 20) throw std::invalid_argument("simplex_qp_oracle: too many coordinates");
  Vec best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    double sum = 0.0;
    int k = 0;
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        sum += v[i];
        ++k;
      }
    }
    const double tau = (sum - 1.0) / k;
    bool feasible = true;
    Vec candidate = Vec::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        candidate[i] = v[i] - tau;
        if (candidate[i] < -1e-12) feasible = false;
      } else if (v[i] - tau > 1e-12) {
        feasible = false;  // KKT: inactive coordinates must not want mass
      }
      if (!feasible) break;
    }
    if (!feasible) continue;
    for (int i = 0; i < n; ++i) candidate[i] = std::max(candidate[i], 0.0);
    const double dist = (candidate - v).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = candidate;
    }
  }
  return best;
}

Vec simplex_grid_oracle(const Vec& v, int resolution) {
  const int n = static_cast<int>(v.size());
  Vec best = Vec::Zero(n);
  double best_dist = std::numeric_limits<double>::infinity();
  std::vector<int> counts(n, 0);
  // Enumerate compositions of `resolution` into n parts.
  std::function<void(int, int)> recurse = [&](int idx, int remaining) {
    if (idx == n - 1) {
      counts[idx] = remaining;
      Vec point(n);
      for (int i = 0; i < n; ++i) point[i] = static_cast<double>(counts[i]) / resolution;
      const double dist = (point - v).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = point;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[idx] = c;
      recurse(idx + 1, remaining - c);
    }
  };
  recurse(0, resolution);
  return best;
}

double uw_grid_oracle_2x2(const DiscreteDistribution& p, const DiscreteDistribution& q,
                          double beta, double grid_step) {
  if (p.size() != 2 || q.size() != 2) {
    throw std::invalid_argument("uw_grid_oracle_2x2: expects 2x2 instances");
  }
  Eigen::Matrix2d cost;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) cost(i, j) = transport_cost(p.atoms[i], q.atoms[j]);
  }
  double best = std::numeric_limits<double>::infinity();
  // Fractions of each row's mass sent to column 0.
  for (double a = 0.0; a <= 1.0 + 1e-12; a += grid_step) {
    for (double b = 0.0; b <= 1.0 + 1e-12; b += grid_step) {
      const double g00 = p.weights[0] * a, g01 = p.weights[0] * (1 - a);
      const double g10 = p.weights[1] * b, g11 = p.weights[1] * (1 - b);
      double value = 0.0;
      bool ok = true;
      const double masses[4] = {g00, g01, g10, g11};
      const double costs[4] = {cost(0, 0), cost(0, 1), cost(1, 0), cost(1, 1)};
      for (int k = 0; k < 4; ++k) {
        if (masses[k] > 0 && !std::isfinite(costs[k])) {
          ok = false;
          break;
        }
        if (masses[k] > 0) value += masses[k] * costs[k];
      }
      if (!ok) continue;
      const double nu0 = g00 + g10, nu1 = g01 + g11;
      if (nu0 > 0) value += beta * nu0 * std::log(nu0 / q.weights[0]);
      if (nu1 > 0) value += beta * nu1 * std::log(nu1 / q.weights[1]);
      best = std::min(best, value);
    }
  }
  return best;
}

CheckResult check_certificate_exactness() {
  CheckResult res{"certificate exactness (50 random instances)", false, 0.0, 1e-9, ""};
  const double rhos[3] = {0.5, 1.0, 2.0};
  const double betas[3] = {0.5, 1.0, 2.0};
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    rng::Stream stream(rng::derive_seed(20250801, {static_cast<std::uint64_t>(i)}));
    const int d = 1 + i % 5;
    const int total_atoms = 2 + static_cast<int>(stream.uniform_int(9));  // <= 10
    const int n_clients =
        1 + static_cast<int>(stream.uniform_int(std::min(3, total_atoms - 1)));

    HyperParams hp;
    hp.rho = rhos[i % 3];
    hp.beta = betas[(i / 3) % 3];
    hp.inner_tol = 1e-12;
    hp.inner_max_iters = 20000;

    OutlierScoreSpec score = OutlierScoreSpec::none();
    if (i % 2 == 1) {
      Vec prior(d);
      for (int k = 0; k < d; ++k) prior[k] = stream.normal();
      score = OutlierScoreSpec::quadratic(0.05 + 0.1 * (i % 4), std::move(prior));
    }

    std::vector<DiscreteDistribution> clients;
    int remaining = total_atoms;
    for (int c = 0; c < n_clients; ++c) {
      const int slack = remaining - (n_clients - c - 1);  // >= 1 by the split invariant
      const int take = c + 1 == n_clients
                           ? remaining
                           : 1 + static_cast<int>(stream.uniform_int(
                                 static_cast<std::uint64_t>(slack)));
      remaining -= take;
      const int label = stream.u01() < 0.5 ? 1 : -1;
      clients.push_back(random_distribution(stream, take, d, label));
    }
    const Vec lambda = random_simplex_point(stream, n_clients);
    const Vec theta = random_feasible_theta(stream, d, hp.rho);

    const CertificateReport report = robustness_certificate(theta, lambda, clients, hp, score);
    const double err = std::abs(report.robust_value - report.bound) /
                       std::max(1.0, std::abs(report.bound));
    worst = std::max(worst, err);
  }
  res.observed = worst;
  res.pass = worst <= res.threshold;
  std::ostringstream ss;
  ss << "max relative certificate mismatch " << worst;
  res.detail = ss.str();
  return res;
}

CheckResult check_strong_duality() {
  CheckResult res{"strong duality on 1-D toys (201-point grid)", false, 0.0, 1e-3, ""};
  struct Toy {
    double theta, rho, beta;
    std::vector<double> atoms;
    std::vector<double> weights;
    int label;
    bool quadratic;
  };
  const std::vector<Toy> toys = {
      {0.8, 1.0, 1.0, {-1.0, 0.5, 1.2}, {0.5, 0.3, 0.2}, 1, false},
      {-0.6, 2.0, 0.5, {-0.5, 0.3}, {0.4, 0.6}, 1, true},
      {1.0, 1.0, 2.0, {0.0, 1.0}, {0.5, 0.5}, -1, false},
  };

  double worst_gap = 0.0, worst_violation = 0.0;
  for (const Toy& toy : toys) {
    std::vector<Sample> atoms;
    Vec w(static_cast<int>(toy.atoms.size()));
    for (size_t j = 0; j < toy.atoms.size(); ++j) {
      Vec x(1);
      x[0] = toy.atoms[j];
      atoms.emplace_back(std::move(x), toy.label);
      w[static_cast<int>(j)] = toy.weights[j];
    }
    const DiscreteDistribution p_hat(std::move(atoms), w);

    HyperParams hp;
    hp.rho = toy.rho;
    hp.beta = toy.beta;
    hp.inner_tol = 1e-12;
    hp.inner_max_iters = 20000;
    Vec theta(1);
    theta[0] = toy.theta;
    OutlierScoreSpec score = OutlierScoreSpec::none();
    if (toy.quadratic) {
      Vec prior(1);
      prior[0] = 0.2;
      score = OutlierScoreSpec::quadratic(0.3, std::move(prior));
    }

    std::vector<Sample> grid;
    for (int g = 0; g < 201; ++g) {
      Vec x(1);
      x[0] = -5.0 + 10.0 * g / 200.0;
      grid.emplace_back(std::move(x), toy.label);
    }

    Vec lambda(1);
    lambda[0] = 1.0;
    const double dual =
        hp.rho * hp.beta * std::log(dual_objective_H(theta, lambda, {p_hat}, hp, score));
    const double primal = primal_sup_on_grid(theta, p_hat, hp, score, grid);
    worst_gap = std::max(worst_gap, dual - primal);
    worst_violation = std::max(worst_violation, primal - dual);
  }
  res.observed = worst_gap;
  res.pass = worst_gap <= 1e-3 && worst_violation <= 1e-6;
  std::ostringstream ss;
  ss << "max dual-primal gap " << worst_gap << ", max weak-duality violation "
     << worst_violation;
  res.detail = ss.str();
  return res;
}

CheckResult check_lemma1_inequality() {
  CheckResult res{"lemma-1 inequality (100 random 1-D instances)", false, 0.0, 1e-6, ""};
  double worst_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    rng::Stream stream(rng::derive_seed(20250802, {static_cast<std::uint64_t>(i)}));
    const int label = 1;
    const int n_star = 1 + static_cast<int>(stream.uniform_int(4));
    const int n_hat = 1 + static_cast<int>(stream.uniform_int(4));
    const double beta = (i % 3 == 0) ? 0.5 : (i % 3 == 1 ? 1.0 : 2.0);

    const DiscreteDistribution p_star = random_distribution(stream, n_star, 1, label, 2.0);
    const DiscreteDistribution p_hat = random_distribution(stream, n_hat, 1, label, 2.0);
    const DiscreteDistribution p_bar(p_hat.atoms, random_simplex_point(stream, n_hat));

    const Lemma1Result check = lemma1_check(p_star, p_bar, p_hat, beta);
    worst_violation = std::max(worst_violation, check.lhs - check.rhs);
  }
  res.observed = worst_violation;
  res.pass = worst_violation <= res.threshold;
  std::ostringstream ss;
  ss << "max lhs-rhs slack " << worst_violation;
  res.detail = ss.str();
  return res;
}

CheckResult check_gradient_fidelity() {
  CheckResult res{"gradient estimators vs finite differences of H", false, 0.0, 1e-4, ""};
  double worst_theta = 0.0, worst_lambda = 0.0;
  for (int i = 0; i < 20; ++i) {
    rng::Stream stream(rng::derive_seed(20250803, {static_cast<std::uint64_t>(i)}));
    const int d = 1 + i % 3;
    const double rho = (i % 2 == 0) ? 1.0 : 2.0;
    HyperParams hp;
    hp.rho = rho;
    hp.beta = (i % 3 == 0) ? 0.5 : 1.0;
    hp.inner_tol = 1e-10;
    hp.inner_max_iters = 20000;

    OutlierScoreSpec score = OutlierScoreSpec::none();
    if (i % 2 == 1) {
      Vec prior(d);
      for (int k = 0; k < d; ++k) prior[k] = 0.5 * stream.normal();
      score = OutlierScoreSpec::quadratic(0.1, std::move(prior));
    }

    std::vector<DiscreteDistribution> clients;
    const int n_clients = 2;
    for (int c = 0; c < n_clients; ++c) {
      const int label = c % 2 == 0 ? 1 : -1;
      clients.push_back(
          random_distribution(stream, 2 + static_cast<int>(stream.uniform_int(4)), d, label));
    }
    Vec lambda = random_simplex_point(stream, n_clients);
    lambda = (lambda.array() + 0.2).matrix();  // keep strictly interior
    lambda /= lambda.sum();
    const Vec theta = random_feasible_theta(stream, d, rho);

    // Full-batch lambda-weighted mean of the per-sample estimators.
    Vec g_theta = Vec::Zero(d);
    Vec g_lambda(n_clients);
    for (int c = 0; c < n_clients; ++c) {
      Vec client_gt = Vec::Zero(d);
      double client_gl = 0.0;
      for (int j = 0; j < clients[c].size(); ++j) {
        client_gt +=
            clients[c].weights[j] * grad_theta_estimate(theta, clients[c].atoms[j], hp, score);
        client_gl +=
            clients[c].weights[j] * grad_lambda_estimate(theta, clients[c].atoms[j], hp, score);
      }
      g_theta += lambda[c] * client_gt;
      g_lambda[c] = client_gl;
    }

    const Vec fd_theta = fd_gradient(
        [&](const Vec& t) { return dual_objective_H(t, lambda, clients, hp, score); }, theta,
        1e-5);
    worst_theta =
        std::max(worst_theta, (g_theta - fd_theta).norm() / std::max(1e-12, fd_theta.norm()));

    const Vec fd_lambda = fd_gradient(
        [&](const Vec& l) { return dual_objective_H(theta, l, clients, hp, score); }, lambda,
        1e-3);
    worst_lambda =
        std::max(worst_lambda, (g_lambda - fd_lambda).norm() / std::max(1e-12, fd_lambda.norm()));
  }
  res.observed = std::max(worst_theta, worst_lambda * 1e2);  // scale to the theta threshold
  res.pass = worst_theta <= 1e-4 && worst_lambda <= 1e-6;
  std::ostringstream ss;
  ss << "theta rel err " << worst_theta << " (<=1e-4), lambda rel err " << worst_lambda
     << " (<=1e-6)";
  res.detail = ss.str();
  return res;
}

CheckResult check_simplex_projection() {
  CheckResult res{"simplex projection vs QP oracle (1000 vectors)", false, 0.0, 1e-6, ""};
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    rng::Stream stream(rng::derive_seed(20250804, {static_cast<std::uint64_t>(i)}));
    const int n = 2 + i % 7;  // N <= 8
    Vec v(n);
    for (int k = 0; k < n; ++k) v[k] = 1.5 * stream.normal() + 0.3;
    const Vec got = project_simplex(v);
    const Vec want = simplex_qp_oracle(v);
    worst = std::max(worst, (got - want).norm());
  }
  res.observed = worst;
  res.pass = worst <= res.threshold;
  std::ostringstream ss;
  ss << "max euclidean deviation " << worst;
  res.detail = ss.str();
  return res;
}

CheckResult check_convergence_trend() {
  CheckResult res{"duality-gap surrogate decay slope", false, 0.0, -0.35, ""};

  SyntheticConfig toy = SyntheticConfig::defaults();
  toy.sizes = {50, 50, 50};
  toy.test_size_per_client = 10;  // test split unused here
  toy.seed = 7;
  const FederatedDataset data = generate_synthetic(toy);

  HyperParams hp;
  hp.rho = 1.0;
  hp.beta = 1.0;
  hp.inner_tol = 1e-6;
  hp.batch_size = 1;

  OutlierScoreSpec score = OutlierScoreSpec::none();
  {
    // Same robust prior the experiment pipeline would resolve.
    std::vector<double> column;
    Vec median(toy.dim);
    for (int k = 0; k < toy.dim; ++k) {
      column.clear();
      for (const DiscreteDistribution& client : data.clients) {
        for (const Sample& s : client.atoms) column.push_back(s.x[k]);
      }
      std::sort(column.begin(), column.end());
      const size_t n = column.size();
      median[k] = n % 2 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
    }
    score = OutlierScoreSpec::quadratic(0.05, median);
  }

  const std::vector<int> horizons = {100, 215, 464, 1000, 2154, 4642, 10000};
  auto horizon_surrogates = [&](double inner_tol) {
    std::vector<double> values(horizons.size());
    for (size_t i = 0; i < horizons.size(); ++i) {
      HyperParams run_hp = hp;
      run_hp.inner_tol = inner_tol;
      run_hp.rounds = horizons[i];
      const TrainingTrace trace = run_training(data.clients, run_hp, score, 11);
      values[i] = duality_gap_surrogate(trace.theta_bar, data.clients, run_hp, score);
    }
    return values;
  };

  const std::vector<double> surrogate = horizon_surrogates(hp.inner_tol);
  // Epsilon floor: the reference rerun with a ten times tighter inner
  // tolerance; the gap is measured against the minimum it attains.
  const std::vector<double> reference = horizon_surrogates(hp.inner_tol / 10.0);
  double floor = *std::min_element(reference.begin(), reference.end());
  floor = std::min(floor, *std::min_element(surrogate.begin(), surrogate.end()));

  std::vector<double> log_t, log_gap;
  for (size_t i = 0; i < horizons.size(); ++i) {
    const double gap = surrogate[i] - floor;
    if (gap > 0) {
      log_t.push_back(std::log(static_cast<double>(horizons[i])));
      log_gap.push_back(std::log(gap));
    }
  }
  if (log_t.size() < 4) {
    res.detail = "too few positive gap points for a slope fit";
    return res;
  }
  double mt = 0, mg = 0;
  for (size_t i = 0; i < log_t.size(); ++i) {
    mt += log_t[i];
    mg += log_gap[i];
  }
  mt /= log_t.size();
  mg /= log_gap.size();
  double num = 0, den = 0;
  for (size_t i = 0; i < log_t.size(); ++i) {
    num += (log_t[i] - mt) * (log_gap[i] - mg);
    den += (log_t[i] - mt) * (log_t[i] - mt);
  }
  const double slope = num / den;

  res.observed = slope;
  res.pass = slope <= res.threshold;
  std::ostringstream ss;
  ss << "least-squares slope " << slope << " over " << log_t.size() << " horizons";
  res.detail = ss.str();
  return res;
}

std::vector<CheckResult> core_verification_suite() {
  return {check_certificate_exactness(), check_strong_duality(), check_lemma1_inequality(),
          check_gradient_fidelity(), check_simplex_projection()};
}

}  // namespace dorfl
