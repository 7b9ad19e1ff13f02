#ifndef DORFL_DISTRIBUTION_HPP
#define DORFL_DISTRIBUTION_HPP

#include <vector>

#include "dorfl/model.hpp"

namespace dorfl {

// Weighted atoms over samples. Represents empirical client distributions,
// reweighted references and worst-case distributions alike.
struct DiscreteDistribution {
  std::vector<Sample> atoms;
  Vec weights;

  DiscreteDistribution() = default;
  DiscreteDistribution(std::vector<Sample> a, Vec w);

  static DiscreteDistribution uniform(std::vector<Sample> a);

  int size() const { return static_cast<int>(atoms.size()); }
  int dim() const { return atoms.empty() ? 0 : atoms.front().dim(); }
  bool empty() const { return atoms.empty(); }

  // weights sum to 1 within 1e-12, all >= 0, lengths match, shared dim.
  void validate() const;
};

// KL divergence sum p_i log(p_i / q_i) with the 0 log 0 = 0 convention.
// Throws if p puts mass where q has none.
double kl_divergence(const Vec& p, const Vec& q);

// Penalty coefficient, KL weight, step sizes and loop controls shared by
// the training loop and the inner maximization.
struct HyperParams {
  double rho = 1.0;   // transport penalty coefficient
  double beta = 1.0;  // KL weight inside the UW distance
  // Step sizes; nonpositive values resolve to 1/sqrt(rounds).
  double eta_theta = 0.0;
  double eta_lambda = 0.0;
  double inner_tol = 1e-6;     // epsilon: distance bound for the inner maximizer
  int inner_max_iters = 5000;
  int rounds = 1000;           // T
  int batch_size = 1;          // B; 0 means deterministic full batch
  double radius = 1.9;         // Theta ball radius
  int trace_surrogate_every = 0;  // 0 = never record the gap surrogate in-loop

  double resolved_eta_theta() const;
  double resolved_eta_lambda() const;
  void validate() const;
};

}  // namespace dorfl

#endif
