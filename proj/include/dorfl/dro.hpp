#ifndef DORFL_DRO_HPP
#define DORFL_DRO_HPP

#include <functional>
#include <vector>

#include "dorfl/distribution.hpp"
#include "dorfl/transport.hpp"

namespace dorfl {

struct InnerMaxResult {
  Sample maximizer;            // perturbed features, original label
  double value = 0.0;          // f(theta, zeta) = L(theta, z) - rho c(z, zeta)
  int iterations = 0;
  double grad_norm_at_exit = 0.0;
};

// Curvature bound of the adjusted loss in the feature argument; the inner
// objective is strongly concave iff rho exceeds it.
double loss_curvature_bound(const Vec& theta, const OutlierScoreSpec& score);

// Solves sup_xi L(theta, xi) - rho c(xi, zeta) by constant-step gradient
// ascent from zeta. Stops once the gradient norm certifies distance to the
// maximizer <= hp.inner_tol, or at hp.inner_max_iters.
InnerMaxResult inner_maximize(const Vec& theta, const Sample& zeta,
                              const HyperParams& hp, const OutlierScoreSpec& score);

// H(theta, lambda) = sum_i lambda_i E_{P_i}[ e^{f(theta, zeta)/(rho beta)} ].
// Linear in lambda; accepts any nonnegative weight vector.
double dual_objective_H(const Vec& theta, const Vec& lambda,
                        const std::vector<DiscreteDistribution>& clients,
                        const HyperParams& hp, const OutlierScoreSpec& score);

// Per-sample stochastic gradient estimators built from the inner maximizer:
// the exponentially tilted loss gradient and the tilt itself.
Vec grad_theta_estimate(const Vec& theta, const Sample& zeta, const HyperParams& hp,
                        const OutlierScoreSpec& score);
double grad_lambda_estimate(const Vec& theta, const Sample& zeta, const HyperParams& hp,
                            const OutlierScoreSpec& score);

struct GridSupOptions {
  double tol = 1e-6;       // supergradient gap target
  int max_iters = 200000;
};

// Lower bound on sup_P E_P[L] - rho UW(P || p_hat) over distributions P
// supported on the grid, computed by exponentiated-gradient ascent on the
// lifted coupling between grid atoms and p_hat's atoms. Independent of the
// dual route through inner_maximize.
double primal_sup_on_grid(const Vec& theta, const DiscreteDistribution& p_hat,
                          const HyperParams& hp, const OutlierScoreSpec& score,
                          const std::vector<Sample>& grid, const GridSupOptions& opts = {});

struct CertificateReport {
  DiscreteDistribution worst_case;
  double induced_radius = 0.0;  // r_hat = UW(P* || P_lambda)
  double dual_value = 0.0;      // rho beta log E[e^{f/(rho beta)}]
  double robust_value = 0.0;    // E_{P*}[L]
  double bound = 0.0;           // rho r_hat + dual_value
};

// Builds the worst-case distribution (inner maximizers, softmax-tilted
// weights) and checks the certificate equality robust_value = bound.
CertificateReport robustness_certificate(const Vec& theta, const Vec& lambda,
                                         const std::vector<DiscreteDistribution>& clients,
                                         const HyperParams& hp,
                                         const OutlierScoreSpec& score);

namespace detail {

struct AscentResult {
  Vec x;
  double value = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
};

// Constant-step gradient ascent with a gradient-norm stopping rule. The
// best value seen is returned, which for concave objectives coincides with
// the final iterate.
AscentResult ascend(const Vec& x0, const std::function<double(const Vec&)>& value_fn,
                    const std::function<Vec(const Vec&)>& grad_fn, double step,
                    double grad_tol, int max_iters);

double logsumexp(const Vec& v);

}  // namespace detail

}  // namespace dorfl

#endif
