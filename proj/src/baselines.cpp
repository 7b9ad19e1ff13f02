#include "dorfl/baselines.hpp"

#include <stdexcept>

namespace dorfl {

TrainingTrace run_baseline(Method kind, const std::vector<DiscreteDistribution>& client_data,
                           const HyperParams& hp, std::uint64_t seed) {
  if (kind == Method::Dorfl) {
    throw std::invalid_argument("run_baseline: use run_training for the dorfl method");
  }
  return detail::run_loop(client_data, hp, OutlierScoreSpec::none(), seed, kind);
}

}  // namespace dorfl
