#include "dorfl/model.hpp"

#include <sstream>
#include <stdexcept>

namespace dorfl {

namespace {

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains non-finite entries");
  }
}

void check_dims(const Vec& theta, const Sample& s, const char* op) {
  if (theta.size() != s.x.size()) {
    std::ostringstream msg;
    msg << op << ": dimension mismatch (theta has " << theta.size()
        << " entries, sample has " << s.x.size() << ")";
    throw std::invalid_argument(msg.str());
  }
}

// log(1 + exp(t)) without overflow for large |t|.
double log1p_exp(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace

Sample::Sample(Vec features, int label) : x(std::move(features)), y(label) {
  if (y != 1 && y != -1) {
    throw std::invalid_argument("sample label must be +1 or -1");
  }
  check_finite(x, "sample features");
}

ModelParams::ModelParams(Vec t, double r) : theta(std::move(t)), radius(r) {
  validate();
}

void ModelParams::validate() const {
  if (!(radius > 0)) throw std::invalid_argument("model radius must be positive");
  check_finite(theta, "theta");
  if (theta.norm() > radius * (1 + 1e-12)) {
    throw std::invalid_argument("theta lies outside its constraint ball");
  }
}

OutlierScoreSpec OutlierScoreSpec::none() { return {}; }

OutlierScoreSpec OutlierScoreSpec::quadratic(double rho2, Vec prior_mean) {
  OutlierScoreSpec spec;
  spec.variant = ScoreVariant::Quadratic;
  spec.rho2 = rho2;
  spec.prior_mean = std::move(prior_mean);
  return spec;
}

OutlierScoreSpec OutlierScoreSpec::sigmoid_threshold(double rho2, double threshold,
                                                     double softness, int feature_index) {
  OutlierScoreSpec spec;
  spec.variant = ScoreVariant::SigmoidThreshold;
  spec.rho2 = rho2;
  spec.threshold = threshold;
  spec.softness = softness;
  spec.feature_index = feature_index;
  return spec;
}

void OutlierScoreSpec::validate(int dim) const {
  if (rho2 < 0) throw std::invalid_argument("outlier score scale rho2 must be nonnegative");
  switch (variant) {
    case ScoreVariant::None:
      break;
    case ScoreVariant::Quadratic:
      if (prior_mean.size() != dim) {
        throw std::invalid_argument("quadratic score prior mean has wrong dimension");
      }
      break;
    case ScoreVariant::SigmoidThreshold:
      if (!(softness > 0)) throw std::invalid_argument("sigmoid score softness must be positive");
      if (feature_index < 0 || feature_index >= dim) {
        throw std::invalid_argument("sigmoid score feature index out of range");
      }
      break;
  }
}

double logistic_loss(const Vec& theta, const Sample& s) {
  check_dims(theta, s, "logistic_loss");
  return log1p_exp(-static_cast<double>(s.y) * theta.dot(s.x));
}

Vec logistic_loss_grad_theta(const Vec& theta, const Sample& s) {
  check_dims(theta, s, "logistic_loss_grad_theta");
  const double y = static_cast<double>(s.y);
  return (-y * sigmoid(-y * theta.dot(s.x))) * s.x;
}

double outlier_score(const OutlierScoreSpec& spec, const Sample& s) {
  spec.validate(s.dim());
  switch (spec.variant) {
    case ScoreVariant::None:
      return 0.0;
    case ScoreVariant::Quadratic:
      return spec.rho2 * (s.x - spec.prior_mean).squaredNorm();
    case ScoreVariant::SigmoidThreshold: {
      if (s.y != -1) return 0.0;
      const double g = s.x[spec.feature_index];
      return spec.rho2 * sigmoid((g - spec.threshold) / spec.softness);
    }
  }
  return 0.0;
}

double adjusted_loss(const Vec& theta, const Sample& s, const OutlierScoreSpec& spec) {
  return logistic_loss(theta, s) - outlier_score(spec, s);
}

Vec adjusted_loss_grad_xi(const Vec& theta, const Sample& s, const OutlierScoreSpec& spec) {
  check_dims(theta, s, "adjusted_loss_grad_xi");
  spec.validate(s.dim());
  const double y = static_cast<double>(s.y);
  // d/dx of log1p_exp(-y<theta,x>) = -y sigmoid(-y<theta,x>) theta
  Vec grad = (-y * sigmoid(-y * theta.dot(s.x))) * theta;
  switch (spec.variant) {
    case ScoreVariant::None:
      break;
    case ScoreVariant::Quadratic:
      grad -= 2.0 * spec.rho2 * (s.x - spec.prior_mean);
      break;
    case ScoreVariant::SigmoidThreshold: {
      if (s.y == -1) {
        const double u = (s.x[spec.feature_index] - spec.threshold) / spec.softness;
        const double sg = sigmoid(u);
        grad[spec.feature_index] -= spec.rho2 * sg * (1.0 - sg) / spec.softness;
      }
      break;
    }
  }
  return grad;
}

double transport_cost(const Sample& a, const Sample& b) {
  if (a.x.size() != b.x.size()) {
    throw std::invalid_argument("transport_cost: dimension mismatch");
  }
  if (a.y != b.y) return kInfeasibleCost;
  return 0.5 * (a.x - b.x).squaredNorm();
}

}  // namespace dorfl
