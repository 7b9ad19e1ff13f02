#ifndef DORFL_DATASETS_HPP
#define DORFL_DATASETS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dorfl/distribution.hpp"

namespace dorfl {

// Gaussian federated benchmark: per-client Gaussian features, logistic
// labels from theta_star, a contaminated fraction scaled to extreme values
// and a translation shift on the first coordinate of the clean remainder.
struct SyntheticConfig {
  int num_clients = 3;
  int dim = 5;
  std::vector<Vec> means;                       // defaults to the three benchmark means
  std::vector<int> sizes{100, 200, 500};
  std::vector<double> contamination_rates{0.1, 0.05, 0.1};
  std::vector<double> contamination_factors{7, 8, 9};
  std::vector<double> shift_magnitudes{1.0, -0.5, 0.6};  // applied to feature 0
  Vec theta_star;                               // defaults to (8,-8,4,4,-4)
  int test_size_per_client = 1000;
  std::uint64_t seed = 1;

  static SyntheticConfig defaults();
  void validate() const;
  Vec clean_mean() const;  // mean of the pooled nominal (test) distribution
};

struct AdultConfig {
  std::string train_path;
  std::string test_path;
  double capital_gain_threshold = 20000.0;  // dollars
  double rho2 = 2.0;      // sigmoid score scale
  double softness = 0.1;  // sigmoid score softness
};

struct FederatedDataset {
  std::vector<DiscreteDistribution> clients;
  std::vector<std::vector<bool>> contaminated;  // per client; empty for real data
  DiscreteDistribution clean_test;
  std::vector<int> test_group;   // client/group index per test atom
  DiscreteDistribution oracle_train;  // training twin of the clean test law
  std::vector<std::string> group_names;
  Vec feature_mean;  // standardization applied to the features
  Vec feature_std;
  double standardized_threshold = 0.0;  // D for the sigmoid score (adult)
  int score_feature_index = 0;          // standardized capital-gain position
  std::string source_checksum;
  std::vector<long> raw_group_counts;   // partition sizes before missing-row drops
};

FederatedDataset generate_synthetic(const SyntheticConfig& cfg);

// Ingests the canonical 15-column comma-separated files; drops rows with
// missing markers, one-hot encodes categoricals, z-standardizes the six
// numeric columns with training statistics and partitions training rows
// into White / Black / Other clients.
FederatedDataset load_adult(const AdultConfig& cfg);

// One row per training sample: client_id, contaminated flag, features, label.
void dump_synthetic_csv(const FederatedDataset& data, std::ostream& os);

std::string fnv1a64_hex(const std::string& bytes);

}  // namespace dorfl

#endif
