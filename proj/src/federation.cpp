#include "dorfl/federation.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "dorfl/csv.hpp"
#include "dorfl/rng.hpp"

namespace dorfl {

namespace {

struct MethodTraits {
  bool inner_max;      // perturb the drawn sample adversarially
  bool tilt;           // exponential tilt on estimators
  bool lambda_ascent;  // server updates lambda; otherwise fixed proportions
  bool use_score;      // h participates in the inner objective
};

MethodTraits traits_for(Method m) {
  switch (m) {
    case Method::Dorfl: return {true, true, true, true};
    case Method::Erm:   return {false, false, false, false};
    case Method::Afl:   return {false, false, true, false};
    case Method::Wafl:  return {true, false, false, false};
  }
  throw std::invalid_argument("unknown method");
}

// Per-sample estimator pair (theta gradient contribution, lambda signal).
struct SampleEstimate {
  Vec g_theta;
  double g_lambda;
};

SampleEstimate estimate_for_sample(const MethodTraits& traits, const Vec& theta,
                                   const Sample& zeta, const HyperParams& hp,
                                   const OutlierScoreSpec& score) {
  static const OutlierScoreSpec no_score = OutlierScoreSpec::none();
  const OutlierScoreSpec& active = traits.use_score ? score : no_score;

  SampleEstimate est;
  if (traits.inner_max) {
    const InnerMaxResult inner = inner_maximize(theta, zeta, hp, active);
    if (traits.tilt) {
      const double rb = hp.rho * hp.beta;
      const double tilt = std::exp(inner.value / rb);
      est.g_theta = (tilt / rb) * logistic_loss_grad_theta(theta, inner.maximizer);
      est.g_lambda = tilt;
    } else {
      est.g_theta = logistic_loss_grad_theta(theta, inner.maximizer);
      est.g_lambda = logistic_loss(theta, inner.maximizer);
    }
  } else {
    est.g_theta = logistic_loss_grad_theta(theta, zeta);
    est.g_lambda = logistic_loss(theta, zeta);
  }
  return est;
}

ClientUpdate client_round_impl(const MethodTraits& traits, const ClientState& cs, int round,
                               const Vec& theta_t, const HyperParams& hp,
                               const OutlierScoreSpec& score) {
  if (cs.data.empty()) throw std::invalid_argument("client_round: empty client dataset");
  const int n = cs.data.size();
  Vec g_theta = Vec::Zero(theta_t.size());
  double g_lambda = 0.0;

  if (hp.batch_size == 0) {
    // Deterministic full-batch pass weighted by the empirical distribution.
    for (int j = 0; j < n; ++j) {
      if (cs.data.weights[j] == 0) continue;
      const SampleEstimate est =
          estimate_for_sample(traits, theta_t, cs.data.atoms[j], hp, score);
      g_theta += cs.data.weights[j] * est.g_theta;
      g_lambda += cs.data.weights[j] * est.g_lambda;
    }
  } else {
    rng::Stream stream(
        rng::derive_seed(cs.seed_base, {0xB417ull, static_cast<std::uint64_t>(round)}));
    for (int b = 0; b < hp.batch_size; ++b) {
      const int j = static_cast<int>(stream.uniform_int(static_cast<std::uint64_t>(n)));
      const SampleEstimate est =
          estimate_for_sample(traits, theta_t, cs.data.atoms[j], hp, score);
      g_theta += est.g_theta;
      g_lambda += est.g_lambda;
    }
    g_theta /= hp.batch_size;
    g_lambda /= hp.batch_size;
  }

  ClientUpdate update;
  update.theta_local = theta_t - hp.resolved_eta_theta() * g_theta;
  update.g_lambda = g_lambda;
  return update;
}

}  // namespace

std::vector<ClientState> make_clients(const std::vector<DiscreteDistribution>& client_data,
                                      std::uint64_t global_seed) {
  std::vector<ClientState> clients;
  clients.reserve(client_data.size());
  for (size_t i = 0; i < client_data.size(); ++i) {
    client_data[i].validate();
    ClientState cs;
    cs.client_id = static_cast<int>(i);
    cs.data = client_data[i];
    cs.seed_base = rng::derive_seed(global_seed, {0xC11Eull, static_cast<std::uint64_t>(i)});
    clients.push_back(std::move(cs));
  }
  return clients;
}

ClientUpdate client_round(const ClientState& cs, int round, const Vec& theta_t,
                          const Vec& lambda_t, const HyperParams& hp,
                          const OutlierScoreSpec& score) {
  (void)lambda_t;  // broadcast alongside theta; the local update does not use it
  return client_round_impl(traits_for(Method::Dorfl), cs, round, theta_t, hp, score);
}

std::pair<Vec, Vec> server_aggregate(const std::vector<ClientUpdate>& updates,
                                     const Vec& lambda_t, const HyperParams& hp) {
  const int n = static_cast<int>(updates.size());
  if (n == 0) throw std::invalid_argument("server_aggregate: no updates");
  if (lambda_t.size() != n) {
    throw std::invalid_argument("server_aggregate: update/lambda count mismatch");
  }
  Vec theta_avg = Vec::Zero(updates.front().theta_local.size());
  Vec g_lambda(n);
  for (int i = 0; i < n; ++i) {
    theta_avg += lambda_t[i] * updates[i].theta_local;
    g_lambda[i] = updates[i].g_lambda;
  }
  Vec theta_next = project_ball(theta_avg, hp.radius);
  Vec lambda_next = project_simplex(lambda_t + hp.resolved_eta_lambda() * g_lambda);
  return {std::move(theta_next), std::move(lambda_next)};
}

namespace detail {

TrainingTrace run_loop(const std::vector<DiscreteDistribution>& client_data,
                       const HyperParams& hp, const OutlierScoreSpec& score,
                       std::uint64_t seed, Method method) {
  hp.validate();
  if (client_data.empty()) throw std::invalid_argument("run_loop: need at least one client");
  const MethodTraits traits = traits_for(method);
  const std::vector<ClientState> clients = make_clients(client_data, seed);
  const int n = static_cast<int>(clients.size());
  const int dim = clients.front().data.dim();

  Vec lambda(n);
  if (traits.lambda_ascent) {
    lambda.setConstant(1.0 / n);
  } else {
    double total = 0.0;
    for (const ClientState& c : clients) total += c.data.size();
    for (int i = 0; i < n; ++i) lambda[i] = clients[i].data.size() / total;
  }

  Vec theta = Vec::Zero(dim);
  TrainingTrace trace;
  trace.rounds.reserve(hp.rounds);
  Vec theta_sum = Vec::Zero(dim);

  for (int t = 1; t <= hp.rounds; ++t) {
    const auto start = std::chrono::steady_clock::now();
    RoundRecord rec;
    rec.theta = theta;
    rec.lambda = lambda;
    rec.g_lambda.resize(n);

    std::vector<ClientUpdate> updates;
    updates.reserve(n);
    for (int i = 0; i < n; ++i) {
      updates.push_back(client_round_impl(traits, clients[i], t, theta, hp, score));
      rec.g_lambda[i] = updates.back().g_lambda;
    }

    auto [theta_next, lambda_next] = server_aggregate(updates, lambda, hp);
    theta = std::move(theta_next);
    if (traits.lambda_ascent) lambda = std::move(lambda_next);

    theta_sum += rec.theta;
    rec.gap_surrogate = std::numeric_limits<double>::quiet_NaN();
    if (hp.trace_surrogate_every > 0 &&
        (t % hp.trace_surrogate_every == 0 || t == hp.rounds)) {
      rec.gap_surrogate = duality_gap_surrogate(rec.theta, client_data, hp, score);
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    trace.rounds.push_back(std::move(rec));
  }

  trace.theta_bar = theta_sum / hp.rounds;
  trace.theta_final = theta;
  trace.lambda_final = lambda;
  return trace;
}

}  // namespace detail

TrainingTrace run_training(const std::vector<DiscreteDistribution>& client_data,
                           const HyperParams& hp, const OutlierScoreSpec& score,
                           std::uint64_t seed) {
  return detail::run_loop(client_data, hp, score, seed, Method::Dorfl);
}

double duality_gap_surrogate(const Vec& theta,
                             const std::vector<DiscreteDistribution>& client_data,
                             const HyperParams& hp, const OutlierScoreSpec& score) {
  if (client_data.empty()) throw std::invalid_argument("duality_gap_surrogate: no clients");
  const double rb = hp.rho * hp.beta;
  double best = -std::numeric_limits<double>::infinity();
  for (const DiscreteDistribution& data : client_data) {
    data.validate();
    double mean = 0.0;
    for (int j = 0; j < data.size(); ++j) {
      if (data.weights[j] == 0) continue;
      mean += data.weights[j] * std::exp(inner_maximize(theta, data.atoms[j], hp, score).value / rb);
    }
    best = std::max(best, mean);
  }
  return best;
}

void write_trace_csv(const TrainingTrace& trace, std::ostream& os,
                     const std::string& method_label) {
  const int n = trace.rounds.empty() ? 0 : static_cast<int>(trace.rounds.front().lambda.size());
  if (!method_label.empty()) os << "method,";
  os << "round,theta_norm";
  for (int i = 1; i <= n; ++i) os << ",lambda_" << i;
  os << ",gap_surrogate,seconds\n";
  for (size_t t = 0; t < trace.rounds.size(); ++t) {
    const RoundRecord& rec = trace.rounds[t];
    if (!method_label.empty()) os << method_label << ",";
    os << (t + 1) << "," << csv::fmt(rec.theta.norm());
    for (int i = 0; i < n; ++i) os << "," << csv::fmt(rec.lambda[i]);
    os << "," << csv::fmt(rec.gap_surrogate) << "," << csv::fmt(rec.seconds) << "\n";
  }
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Dorfl: return "dorfl";
    case Method::Erm: return "erm";
    case Method::Afl: return "afl";
    case Method::Wafl: return "wafl";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "dorfl") return Method::Dorfl;
  if (name == "erm") return Method::Erm;
  if (name == "afl") return Method::Afl;
  if (name == "wafl") return Method::Wafl;
  throw std::invalid_argument("unknown method '" + name + "'");
}

}  // namespace dorfl
