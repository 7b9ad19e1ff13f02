#include "dorfl/distribution.hpp"

#include <cmath>
#include <stdexcept>

namespace dorfl {

DiscreteDistribution::DiscreteDistribution(std::vector<Sample> a, Vec w)
    : atoms(std::move(a)), weights(std::move(w)) {
  validate();
}

DiscreteDistribution DiscreteDistribution::uniform(std::vector<Sample> a) {
  const int n = static_cast<int>(a.size());
  if (n == 0) throw std::invalid_argument("cannot build a distribution from zero atoms");
  return DiscreteDistribution(std::move(a), Vec::Constant(n, 1.0 / n));
}

void DiscreteDistribution::validate() const {
  if (atoms.empty()) throw std::invalid_argument("distribution has no atoms");
  if (static_cast<int>(atoms.size()) != weights.size()) {
    throw std::invalid_argument("distribution atom/weight count mismatch");
  }
  const int d = atoms.front().dim();
  for (const Sample& s : atoms) {
    if (s.dim() != d) throw std::invalid_argument("distribution atoms have mixed dimensions");
  }
  double sum = 0.0;
  for (int i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0 || !std::isfinite(weights[i])) {
      throw std::invalid_argument("distribution weights must be finite and nonnegative");
    }
    sum += weights[i];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::invalid_argument("distribution weights must sum to 1 within 1e-12");
  }
}

double kl_divergence(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
  double kl = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;  // 0 log 0 = 0
    if (q[i] <= 0.0) {
      throw std::invalid_argument("kl_divergence: p puts mass where q has none");
    }
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double HyperParams::resolved_eta_theta() const {
  return eta_theta > 0 ? eta_theta : 1.0 / std::sqrt(static_cast<double>(rounds));
}

double HyperParams::resolved_eta_lambda() const {
  return eta_lambda > 0 ? eta_lambda : 1.0 / std::sqrt(static_cast<double>(rounds));
}

void HyperParams::validate() const {
  if (!(rho > 0)) throw std::invalid_argument("rho must be positive");
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
  if (!(inner_tol > 0) || inner_tol > 1) {
    throw std::invalid_argument("inner_tol must lie in (0, 1]");
  }
  if (inner_max_iters <= 0) throw std::invalid_argument("inner_max_iters must be positive");
  if (rounds <= 0) throw std::invalid_argument("rounds must be positive");
  if (batch_size < 0) throw std::invalid_argument("batch_size must be nonnegative");
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
}

}  // namespace dorfl
