#ifndef DORFL_BASELINES_HPP
#define DORFL_BASELINES_HPP

#include "dorfl/federation.hpp"

namespace dorfl {

// Reference trainers sharing the federation loop with swapped estimator
// plugins:
//   erm  - fixed sample-size mixture, plain logistic loss, no perturbation
//   afl  - minimax over the mixture with plain losses
//   wafl - fixed mixture, penalized Wasserstein inner maximization (no
//          outlier score), untilted gradients
TrainingTrace run_baseline(Method kind, const std::vector<DiscreteDistribution>& client_data,
                           const HyperParams& hp, std::uint64_t seed);

}  // namespace dorfl

#endif
