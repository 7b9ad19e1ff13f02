#ifndef DORFL_VERIFICATION_HPP
#define DORFL_VERIFICATION_HPP

#include <functional>
#include <string>
#include <vector>

#include "dorfl/dro.hpp"

namespace dorfl {

struct CheckResult {
  std::string name;
  bool pass = false;
  double observed = 0.0;   // worst value seen
  double threshold = 0.0;  // pinned bound it is compared against
  std::string detail;
};

// Property/oracle suites over dro-engine and federation. Each check pins
// its tolerances internally; the observed/threshold pair reports the
// tightest margin.

// Certificate equality on 50 seeded random instances at inner_tol 1e-12.
CheckResult check_certificate_exactness();
// Primal grid value within 1e-3 below the dual on three 1-D toys, never
// more than 1e-6 above.
CheckResult check_strong_duality();
// UW(p*||p^) <= W(p*, pbar) + beta KL(pbar||p^) on 100 seeded instances.
CheckResult check_lemma1_inequality();
// Full-batch estimator means against finite differences of H.
CheckResult check_gradient_fidelity();
// Simplex projection against the brute-force QP oracle on 1000 vectors.
CheckResult check_simplex_projection();
// Log-log decay slope of the duality-gap surrogate on the synthetic toy.
CheckResult check_convergence_trend();

// The five fast suites (everything except the convergence trend).
std::vector<CheckResult> core_verification_suite();

// --- independent oracles, shared with the test suites ---

// Exact solution of min ||lambda - v||^2 over the simplex by brute-force
// enumeration of KKT support sets.
Vec simplex_qp_oracle(const Vec& v);

// Best point of the dense composition grid with `resolution` subdivisions.
Vec simplex_grid_oracle(const Vec& v, int resolution);

// Exhaustive grid search over the two free coupling parameters of a 2x2
// unbalanced transport instance.
double uw_grid_oracle_2x2(const DiscreteDistribution& p, const DiscreteDistribution& q,
                          double beta, double grid_step);

// Central finite differences.
Vec fd_gradient(const std::function<double(const Vec&)>& fn, const Vec& x, double h);

}  // namespace dorfl

#endif
