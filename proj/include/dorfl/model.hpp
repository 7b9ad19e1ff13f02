#ifndef DORFL_MODEL_HPP
#define DORFL_MODEL_HPP

#include <Eigen/Core>
#include <cmath>
#include <limits>

namespace dorfl {

using Vec = Eigen::VectorXd;

// One labeled observation; the unit the adversary is allowed to transport.
// Labels are +1 / -1 and never move.
struct Sample {
  Vec x;
  int y = 1;

  Sample() = default;
  Sample(Vec features, int label);
  int dim() const { return static_cast<int>(x.size()); }
};

// Shared logistic-regression parameter together with the radius of the
// ball it is constrained to.
struct ModelParams {
  Vec theta;
  double radius = 10.0;

  ModelParams() = default;
  ModelParams(Vec t, double r);
  void validate() const;
};

enum class ScoreVariant { None, Quadratic, SigmoidThreshold };

// Outlier score h: a prior-knowledge penalty subtracted from the base loss
// so that suspicious samples stop attaining the inner supremum.
struct OutlierScoreSpec {
  ScoreVariant variant = ScoreVariant::None;
  double rho2 = 0.0;     // penalty scale
  Vec prior_mean;        // quadratic variant only
  double threshold = 0;  // standardized threshold D (sigmoid variant)
  double softness = 1;   // s > 0 (sigmoid variant)
  int feature_index = 0; // index of the scored feature g

  static OutlierScoreSpec none();
  static OutlierScoreSpec quadratic(double rho2, Vec prior_mean);
  static OutlierScoreSpec sigmoid_threshold(double rho2, double threshold,
                                            double softness, int feature_index);
  void validate(int dim) const;
};

inline double sigmoid(double t) {
  return t >= 0 ? 1.0 / (1.0 + std::exp(-t))
                : std::exp(t) / (1.0 + std::exp(t));
}

// log(1 + exp(-y <theta,x>)), evaluated overflow-safe.
double logistic_loss(const Vec& theta, const Sample& s);

// Gradient of the logistic loss in theta: -y * sigmoid(-y<theta,x>) * x.
Vec logistic_loss_grad_theta(const Vec& theta, const Sample& s);

double outlier_score(const OutlierScoreSpec& spec, const Sample& s);

// Adjusted loss L = l - h and its gradient with respect to the feature
// vector (label held fixed).
double adjusted_loss(const Vec& theta, const Sample& s, const OutlierScoreSpec& spec);
Vec adjusted_loss_grad_xi(const Vec& theta, const Sample& s, const OutlierScoreSpec& spec);

// Half squared Euclidean distance on features when labels agree;
// kInfeasibleCost when they differ (labels are never transported).
inline constexpr double kInfeasibleCost = std::numeric_limits<double>::infinity();
double transport_cost(const Sample& a, const Sample& b);

}  // namespace dorfl

#endif
