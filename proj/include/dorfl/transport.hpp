#ifndef DORFL_TRANSPORT_HPP
#define DORFL_TRANSPORT_HPP

#include <Eigen/Core>

#include "dorfl/distribution.hpp"

namespace dorfl {

struct UwOptions {
  double tol = 1e-8;      // Frank-Wolfe gap certifying value accuracy
  int max_iters = 10000;
};

// Transport plan between p's atoms (rows) and the reference's atoms
// (columns). Row sums are pinned to p's weights; column sums form the
// reweighted reference.
struct UwResult {
  double value = 0.0;
  Eigen::MatrixXd coupling;
  DiscreteDistribution pbar;
  int iterations = 0;
  double fw_gap = 0.0;
};

// Discrete unbalanced Wasserstein distance
//   min_{gamma >= 0, rowsum = p} sum gamma_ij c_ij + beta KL(colsum || q)
// solved by projected gradient descent on the product of scaled simplices
// with a backtracking step and a Frank-Wolfe gap stopping rule. Mass across
// differing labels is forbidden. q must have strictly positive weights.
UwResult uw_distance_discrete(const DiscreteDistribution& p,
                              const DiscreteDistribution& q, double beta,
                              const UwOptions& opts = {});

// Exact Wasserstein distance between 1-D same-label discrete measures with
// cost |x - x'|^2 / 2, via the monotone (quantile) coupling.
double wasserstein_1d_exact(const DiscreteDistribution& p,
                            const DiscreteDistribution& q);

struct Lemma1Result {
  double lhs = 0.0;  // UW(p_star || p_hat)
  double rhs = 0.0;  // W(p_star, p_bar) + beta KL(p_bar || p_hat)
};

// Evaluates both sides of the bound UW(p*||p^) <= W(p*, pbar) + beta
// KL(pbar||p^) on 1-D same-label instances. p_bar must share p_hat's atom
// list (absolute continuity).
Lemma1Result lemma1_check(const DiscreteDistribution& p_star,
                          const DiscreteDistribution& p_bar,
                          const DiscreteDistribution& p_hat, double beta);

}  // namespace dorfl

#endif
