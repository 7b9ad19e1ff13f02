#ifndef DORFL_EXPERIMENT_HPP
#define DORFL_EXPERIMENT_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dorfl/baselines.hpp"
#include "dorfl/datasets.hpp"

namespace dorfl {

struct RunConfig {
  std::string dataset = "synthetic";  // synthetic | adult
  std::vector<Method> methods{Method::Dorfl};
  HyperParams hyper;

  // Outlier score; "auto" picks quadratic for synthetic and the sigmoid
  // threshold score for adult. NaN / negative sentinels resolve to
  // dataset-dependent defaults.
  std::string score_variant = "auto";  // auto | none | quadratic | sigmoid
  double score_rho2 = -1.0;
  double score_softness = -1.0;
  double score_threshold = std::numeric_limits<double>::quiet_NaN();
  int score_feature_index = -1;
  // Prior mean for the quadratic score: robust estimate from the pooled
  // training features, the config-declared clean mean, or an explicit vector.
  std::string prior_mean_mode = "median";  // median | clean_mean | explicit
  Vec prior_mean_explicit;

  SyntheticConfig synthetic = SyntheticConfig::defaults();
  AdultConfig adult;
  std::uint64_t seed = 1;
  std::string output_dir;
  bool force = false;
};

struct MetricsReport {
  std::string method;
  std::string dataset;
  double overall_accuracy = 0.0;
  std::vector<std::string> group_names;
  std::vector<double> group_accuracy;
  double worst_group_accuracy = 0.0;
  double excess_risk = 0.0;
  std::string dataset_checksum;
  int rounds = 0;
  double theta_bar_norm = 0.0;
  std::vector<double> lambda_final;
  std::map<std::string, std::string> config_echo;

  void validate() const;
};

FederatedDataset build_dataset(const RunConfig& cfg);

// Materializes the outlier score for one method against a built dataset.
// Baselines force the score off inside the loss.
OutlierScoreSpec resolve_score(const RunConfig& cfg, const FederatedDataset& data,
                               Method method);

// Clean-distribution reference parameter: full-batch gradient descent on
// the dataset's oracle training twin (2000 iterations, step 0.1).
Vec oracle_theta(const FederatedDataset& data);

// Accuracy (sign(0) counts as +1), per-group accuracy on the clean test
// slices and excess risk against the clean-distribution oracle.
MetricsReport evaluate(const Vec& theta, const FederatedDataset& data);
MetricsReport evaluate(const Vec& theta, const FederatedDataset& data,
                       const Vec& theta_oracle);

// Builds the dataset, trains every configured method, evaluates the
// averaged parameter and writes report/trace files under output_dir.
std::vector<MetricsReport> run_experiment(const RunConfig& cfg);

// Retrains with the quadratic score recentered at
// clean mean + offset * (unit vector of feature stddevs), one run per
// offset; returns (offset, overall accuracy) pairs and writes
// plotdata/sensitivity.csv.
std::vector<std::pair<double, double>> sensitivity_sweep(const RunConfig& cfg,
                                                         const std::vector<double>& offsets,
                                                         int jobs = 1);

// Writes report.csv per report plus a comparison table.md when several
// methods ran. Refuses to overwrite existing reports unless force is set.
void emit_report(const std::vector<MetricsReport>& reports, const std::string& dir,
                 bool force);

MetricsReport read_report(const std::string& path);

}  // namespace dorfl

#endif
