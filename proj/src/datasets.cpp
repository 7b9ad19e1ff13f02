#include "dorfl/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dorfl/csv.hpp"
#include "dorfl/rng.hpp"

namespace dorfl {

namespace {

Vec make_vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

int draw_label(rng::Stream& stream, const Vec& theta_star, const Vec& x) {
  return stream.u01() < sigmoid(theta_star.dot(x)) ? 1 : -1;
}

}  // namespace

SyntheticConfig SyntheticConfig::defaults() {
  SyntheticConfig cfg;
  cfg.means = {make_vec({0.0, 0.0, 0.0, 0.0, 0.0}),
               make_vec({1.0, 1.0, 0.0, 0.0, 0.0}),
               make_vec({2.0, 2.0, 0.5, 1.0, 2.0})};
  cfg.theta_star = make_vec({8.0, -8.0, 4.0, 4.0, -4.0});
  return cfg;
}

void SyntheticConfig::validate() const {
  if (num_clients <= 0) throw std::invalid_argument("synthetic: need at least one client");
  if (dim <= 0) throw std::invalid_argument("synthetic: dimension must be positive");
  auto check_len = [&](size_t got, const char* what) {
    if (got != static_cast<size_t>(num_clients)) {
      throw std::invalid_argument(std::string("synthetic: ") + what +
                                  " must have one entry per client");
    }
  };
  check_len(means.size(), "means");
  check_len(sizes.size(), "sizes");
  check_len(contamination_rates.size(), "contamination_rates");
  check_len(contamination_factors.size(), "contamination_factors");
  check_len(shift_magnitudes.size(), "shift_magnitudes");
  for (const Vec& mu : means) {
    if (mu.size() != dim) throw std::invalid_argument("synthetic: mean dimension mismatch");
  }
  if (theta_star.size() != dim) {
    throw std::invalid_argument("synthetic: theta_star dimension mismatch");
  }
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("synthetic: client sizes must be positive");
  }
  for (double r : contamination_rates) {
    if (r < 0 || r > 1) throw std::invalid_argument("synthetic: rates must lie in [0,1]");
  }
  if (test_size_per_client <= 0) {
    throw std::invalid_argument("synthetic: test size must be positive");
  }
}

Vec SyntheticConfig::clean_mean() const {
  Vec mean = Vec::Zero(dim);
  for (const Vec& mu : means) mean += mu;
  return mean / num_clients;
}

FederatedDataset generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  FederatedDataset out;
  out.feature_mean = Vec::Zero(cfg.dim);
  out.feature_std = Vec::Ones(cfg.dim);
  out.standardized_threshold = std::numeric_limits<double>::quiet_NaN();

  auto draw_clean = [&](rng::Stream& stream, int client) {
    Vec x(cfg.dim);
    for (int k = 0; k < cfg.dim; ++k) x[k] = cfg.means[client][k] + stream.normal();
    const int y = draw_label(stream, cfg.theta_star, x);
    return Sample{std::move(x), y};
  };

  for (int i = 0; i < cfg.num_clients; ++i) {
    const int n = cfg.sizes[i];
    rng::Stream train_stream(rng::derive_seed(cfg.seed, {0x5A17ull, static_cast<std::uint64_t>(i)}));
    std::vector<Sample> samples;
    samples.reserve(n);
    for (int k = 0; k < n; ++k) samples.push_back(draw_clean(train_stream, i));

    // Contaminated subset: the prefix of a seeded permutation.
    const int n_contaminated = static_cast<int>(std::floor(cfg.contamination_rates[i] * n));
    std::vector<int> perm(n);
    for (int k = 0; k < n; ++k) perm[k] = k;
    rng::Stream perm_stream(rng::derive_seed(cfg.seed, {0xC0DEull, static_cast<std::uint64_t>(i)}));
    for (int k = n - 1; k > 0; --k) {
      const int j = static_cast<int>(perm_stream.uniform_int(static_cast<std::uint64_t>(k) + 1));
      std::swap(perm[k], perm[j]);
    }
    std::vector<bool> flags(n, false);
    for (int k = 0; k < n_contaminated; ++k) flags[perm[k]] = true;

    // Corrupted rows: features blown up by the contamination factor and the
    // label replaced by a coin flip (the observation, not just the features,
    // is unreliable). The clean remainder receives the covariate shift.
    for (int k = 0; k < n; ++k) {
      if (flags[k]) {
        samples[k].x *= cfg.contamination_factors[i];
        samples[k].y = perm_stream.u01() < 0.5 ? 1 : -1;
      } else {
        samples[k].x[0] += cfg.shift_magnitudes[i];
      }
    }
    out.clients.push_back(DiscreteDistribution::uniform(std::move(samples)));
    out.contaminated.push_back(std::move(flags));
    out.group_names.push_back("client" + std::to_string(i + 1));
  }

  std::vector<Sample> test_atoms, oracle_atoms;
  for (int i = 0; i < cfg.num_clients; ++i) {
    rng::Stream test_stream(rng::derive_seed(cfg.seed, {0x7E57ull, static_cast<std::uint64_t>(i)}));
    rng::Stream oracle_stream(rng::derive_seed(cfg.seed, {0x0A11ull, static_cast<std::uint64_t>(i)}));
    for (int k = 0; k < cfg.test_size_per_client; ++k) {
      test_atoms.push_back(draw_clean(test_stream, i));
      out.test_group.push_back(i);
      oracle_atoms.push_back(draw_clean(oracle_stream, i));
    }
  }
  out.clean_test = DiscreteDistribution::uniform(std::move(test_atoms));
  out.oracle_train = DiscreteDistribution::uniform(std::move(oracle_atoms));
  return out;
}

namespace {

struct AdultRow {
  double numeric[6];
  std::string categorical[8];
  int label;
  int group;
};

constexpr int kNumericColumns[6] = {0, 2, 4, 10, 11, 12};
constexpr int kCategoricalColumns[8] = {1, 3, 5, 6, 7, 8, 9, 13};
constexpr int kRaceColumn = 8;
constexpr int kIncomeColumn = 14;
constexpr int kCapitalGainSlot = 3;  // position of capital-gain among the numerics

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

int parse_income(const std::string& raw, const std::string& path, long line) {
  std::string v = raw;
  if (!v.empty() && v.back() == '.') v.pop_back();  // test-split variant
  if (v == ">50K") return 1;
  if (v == "<=50K") return -1;
  std::ostringstream msg;
  msg << path << ":" << line << ": unrecognized income label '" << raw << "'";
  throw std::runtime_error(msg.str());
}

int group_for_race(const std::string& race) {
  if (race == "White") return 0;
  if (race == "Black") return 1;
  return 2;  // every other race pools into the third client
}

// Parses one split. Rows with a missing marker are dropped, but their race
// still counts toward raw_counts.
std::vector<AdultRow> parse_adult_file(const std::string& path, std::vector<long>* raw_counts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open adult data file: " + path);
  std::vector<AdultRow> rows;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '|') continue;

    std::vector<std::string> fields;
    std::stringstream ss(stripped);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (fields.size() != 15) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected 15 columns, found " << fields.size();
      throw std::runtime_error(msg.str());
    }

    if (raw_counts) ++(*raw_counts)[group_for_race(fields[kRaceColumn])];

    bool missing = false;
    for (const std::string& f : fields) {
      if (f == "?") { missing = true; break; }
    }
    if (missing) continue;

    AdultRow row;
    for (int k = 0; k < 6; ++k) {
      const std::string& f = fields[kNumericColumns[k]];
      char* end = nullptr;
      row.numeric[k] = std::strtod(f.c_str(), &end);
      if (end == f.c_str() || *end != '\0') {
        std::ostringstream msg;
        msg << path << ":" << line_no << ": cannot parse numeric field '" << f << "'";
        throw std::runtime_error(msg.str());
      }
    }
    for (int k = 0; k < 8; ++k) row.categorical[k] = fields[kCategoricalColumns[k]];
    row.label = parse_income(fields[kIncomeColumn], path, line_no);
    row.group = group_for_race(fields[kRaceColumn]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open adult data file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string fnv1a64_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FederatedDataset load_adult(const AdultConfig& cfg) {
  if (!(cfg.capital_gain_threshold > 0)) {
    throw std::invalid_argument("adult: capital gain threshold must be positive");
  }
  std::vector<long> raw_counts(3, 0);
  const std::vector<AdultRow> train_rows = parse_adult_file(cfg.train_path, &raw_counts);
  const std::vector<AdultRow> test_rows = parse_adult_file(cfg.test_path, nullptr);
  if (train_rows.empty()) throw std::runtime_error("adult: training split is empty");
  if (test_rows.empty()) throw std::runtime_error("adult: test split is empty");

  // Category vocabularies from the training split, lexicographic for a
  // deterministic layout. Unseen test categories encode as all-zero blocks.
  std::vector<std::vector<std::string>> vocab(8);
  for (int k = 0; k < 8; ++k) {
    std::map<std::string, int> seen;
    for (const AdultRow& r : train_rows) seen.emplace(r.categorical[k], 0);
    for (const auto& [cat, _] : seen) vocab[k].push_back(cat);
  }
  int dim = 6;
  for (const auto& v : vocab) dim += static_cast<int>(v.size());

  Vec mean = Vec::Zero(6), stddev = Vec::Zero(6);
  for (const AdultRow& r : train_rows) {
    for (int k = 0; k < 6; ++k) mean[k] += r.numeric[k];
  }
  mean /= static_cast<double>(train_rows.size());
  for (const AdultRow& r : train_rows) {
    for (int k = 0; k < 6; ++k) {
      const double d = r.numeric[k] - mean[k];
      stddev[k] += d * d;
    }
  }
  stddev = (stddev / static_cast<double>(train_rows.size())).cwiseSqrt();
  for (int k = 0; k < 6; ++k) {
    if (stddev[k] < 1e-12) stddev[k] = 1.0;
  }

  auto encode = [&](const AdultRow& r) {
    Vec x = Vec::Zero(dim);
    for (int k = 0; k < 6; ++k) x[k] = (r.numeric[k] - mean[k]) / stddev[k];
    int offset = 6;
    for (int k = 0; k < 8; ++k) {
      const auto it = std::lower_bound(vocab[k].begin(), vocab[k].end(), r.categorical[k]);
      if (it != vocab[k].end() && *it == r.categorical[k]) {
        x[offset + static_cast<int>(it - vocab[k].begin())] = 1.0;
      }
      offset += static_cast<int>(vocab[k].size());
    }
    return Sample{std::move(x), r.label};
  };

  FederatedDataset out;
  std::vector<std::vector<Sample>> client_samples(3);
  for (const AdultRow& r : train_rows) client_samples[r.group].push_back(encode(r));
  for (int g = 0; g < 3; ++g) {
    if (client_samples[g].empty()) {
      throw std::runtime_error("adult: a race partition received no training rows");
    }
    out.clients.push_back(DiscreteDistribution::uniform(std::move(client_samples[g])));
  }

  std::vector<Sample> test_atoms, oracle_atoms;
  for (const AdultRow& r : test_rows) {
    test_atoms.push_back(encode(r));
    out.test_group.push_back(r.group);
  }
  for (const AdultRow& r : train_rows) oracle_atoms.push_back(encode(r));
  out.clean_test = DiscreteDistribution::uniform(std::move(test_atoms));
  out.oracle_train = DiscreteDistribution::uniform(std::move(oracle_atoms));

  out.group_names = {"White", "Black", "Other"};
  out.feature_mean = mean;
  out.feature_std = stddev;
  out.standardized_threshold =
      (cfg.capital_gain_threshold - mean[kCapitalGainSlot]) / stddev[kCapitalGainSlot];
  out.score_feature_index = kCapitalGainSlot;
  out.raw_group_counts = raw_counts;
  out.source_checksum =
      fnv1a64_hex(read_file_bytes(cfg.train_path) + read_file_bytes(cfg.test_path));
  return out;
}

void dump_synthetic_csv(const FederatedDataset& data, std::ostream& os) {
  const int dim = data.clients.empty() ? 0 : data.clients.front().dim();
  os << "client_id,contaminated";
  for (int k = 0; k < dim; ++k) os << ",x" << k;
  os << ",label\n";
  for (size_t i = 0; i < data.clients.size(); ++i) {
    const DiscreteDistribution& client = data.clients[i];
    for (int j = 0; j < client.size(); ++j) {
      const bool flag =
          i < data.contaminated.size() && data.contaminated[i][static_cast<size_t>(j)];
      os << i << "," << (flag ? 1 : 0);
      for (int k = 0; k < dim; ++k) os << "," << csv::fmt(client.atoms[j].x[k]);
      os << "," << client.atoms[j].y << "\n";
    }
  }
}

}  // namespace dorfl
