#ifndef DORFL_FEDERATION_HPP
#define DORFL_FEDERATION_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dorfl/distribution.hpp"
#include "dorfl/dro.hpp"
#include "dorfl/projections.hpp"

namespace dorfl {

// A client in the simulated federation: its local data plus the seed its
// per-round sampling streams are derived from.
struct ClientState {
  int client_id = 0;
  DiscreteDistribution data;
  std::uint64_t seed_base = 0;
};

std::vector<ClientState> make_clients(const std::vector<DiscreteDistribution>& client_data,
                                      std::uint64_t global_seed);

// What a client sends back each round.
struct ClientUpdate {
  Vec theta_local;   // theta_t - eta_theta * minibatch theta-gradient
  double g_lambda = 0.0;
};

struct RoundRecord {
  Vec theta;             // iterate the round's gradients were computed at
  Vec lambda;
  Vec g_lambda;          // per-client, ascending client id
  double gap_surrogate;  // NaN when not recorded
  double seconds;
};

struct TrainingTrace {
  std::vector<RoundRecord> rounds;
  Vec theta_bar;    // arithmetic mean of the round iterates
  Vec theta_final;  // post-update parameter after the last round
  Vec lambda_final;
};

// One local round: draws a minibatch (batch_size 0 = deterministic full
// batch), runs the inner maximization per sample, averages the tilted
// estimators, and applies the local step. Pure function of
// (seed_base, round, inputs).
ClientUpdate client_round(const ClientState& cs, int round, const Vec& theta_t,
                          const Vec& lambda_t, const HyperParams& hp,
                          const OutlierScoreSpec& score);

// Server step: lambda-weighted average of local parameters projected onto
// the ball, and projected gradient ascent on lambda.
std::pair<Vec, Vec> server_aggregate(const std::vector<ClientUpdate>& updates,
                                     const Vec& lambda_t, const HyperParams& hp);

// Full synchronous training loop from theta = 0, lambda uniform.
TrainingTrace run_training(const std::vector<DiscreteDistribution>& client_data,
                           const HyperParams& hp, const OutlierScoreSpec& score,
                           std::uint64_t seed);

// max_lambda H(theta, lambda) computed exactly via linearity: the largest
// per-client full-batch mean of the exponential tilt.
double duality_gap_surrogate(const Vec& theta,
                             const std::vector<DiscreteDistribution>& client_data,
                             const HyperParams& hp, const OutlierScoreSpec& score);

// Trace serialization: one row per round. A nonempty method label prepends
// a method column.
void write_trace_csv(const TrainingTrace& trace, std::ostream& os,
                     const std::string& method_label = "");

enum class Method { Dorfl, Erm, Afl, Wafl };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

namespace detail {

// Shared loop behind run_training and the baselines; the method selects the
// estimator plugin set.
TrainingTrace run_loop(const std::vector<DiscreteDistribution>& client_data,
                       const HyperParams& hp, const OutlierScoreSpec& score,
                       std::uint64_t seed, Method method);

}  // namespace detail

}  // namespace dorfl

#endif
