#include "dorfl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dorfl/csv.hpp"
#include "dorfl/rng.hpp"

namespace fs = std::filesystem;

namespace dorfl {

namespace {

std::string join_numbers(const Vec& v) {
  std::ostringstream ss;
  for (int i = 0; i < v.size(); ++i) {
    if (i) ss << ' ';
    ss << csv::fmt(v[i]);
  }
  return ss.str();
}

Vec pooled_train_median(const FederatedDataset& data) {
  const int d = data.clients.front().dim();
  std::vector<double> column;
  Vec median(d);
  for (int k = 0; k < d; ++k) {
    column.clear();
    for (const DiscreteDistribution& client : data.clients) {
      for (const Sample& s : client.atoms) column.push_back(s.x[k]);
    }
    std::sort(column.begin(), column.end());
    const size_t n = column.size();
    median[k] = n % 2 ? column[n / 2] : 0.5 * (column[n / 2 - 1] + column[n / 2]);
  }
  return median;
}

double mean_logistic_loss(const Vec& theta, const DiscreteDistribution& data) {
  double total = 0.0;
  for (int j = 0; j < data.size(); ++j) {
    total += data.weights[j] * logistic_loss(theta, data.atoms[j]);
  }
  return total;
}

TrainingTrace train_method(Method method, const RunConfig& cfg, const FederatedDataset& data,
                           const OutlierScoreSpec& score) {
  if (method == Method::Dorfl) {
    return run_training(data.clients, cfg.hyper, score, cfg.seed);
  }
  return run_baseline(method, data.clients, cfg.hyper, cfg.seed);
}

void write_file_checked(const std::string& path, const std::string& contents, bool force) {
  if (!force && fs::exists(path)) {
    throw std::runtime_error("refusing to overwrite existing output '" + path +
                             "' (pass --force to allow)");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
  out << contents;
}

std::map<std::string, std::string> echo_config(const RunConfig& cfg, Method method,
                                               const OutlierScoreSpec& score) {
  std::map<std::string, std::string> echo;
  echo["run.dataset"] = cfg.dataset;
  echo["run.method"] = method_name(method);
  echo["run.seed"] = std::to_string(cfg.seed);
  echo["hyper.rho"] = csv::fmt(cfg.hyper.rho);
  echo["hyper.beta"] = csv::fmt(cfg.hyper.beta);
  echo["hyper.eta_theta"] = csv::fmt(cfg.hyper.resolved_eta_theta());
  echo["hyper.eta_lambda"] = csv::fmt(cfg.hyper.resolved_eta_lambda());
  echo["hyper.inner_tol"] = csv::fmt(cfg.hyper.inner_tol);
  echo["hyper.inner_max_iters"] = std::to_string(cfg.hyper.inner_max_iters);
  echo["hyper.rounds"] = std::to_string(cfg.hyper.rounds);
  echo["hyper.batch_size"] = std::to_string(cfg.hyper.batch_size);
  echo["hyper.radius"] = csv::fmt(cfg.hyper.radius);
  switch (score.variant) {
    case ScoreVariant::None:
      echo["score.variant"] = "none";
      break;
    case ScoreVariant::Quadratic:
      echo["score.variant"] = "quadratic";
      echo["score.rho2"] = csv::fmt(score.rho2);
      echo["score.prior_mean"] = join_numbers(score.prior_mean);
      break;
    case ScoreVariant::SigmoidThreshold:
      echo["score.variant"] = "sigmoid";
      echo["score.rho2"] = csv::fmt(score.rho2);
      echo["score.threshold"] = csv::fmt(score.threshold);
      echo["score.softness"] = csv::fmt(score.softness);
      echo["score.feature_index"] = std::to_string(score.feature_index);
      break;
  }
  if (cfg.dataset == "synthetic") {
    const SyntheticConfig& s = cfg.synthetic;
    echo["synthetic.seed"] = std::to_string(s.seed);
    echo["synthetic.theta_star"] = join_numbers(s.theta_star);
    std::ostringstream sizes, rates, factors, shifts;
    for (size_t i = 0; i < s.sizes.size(); ++i) {
      if (i) { sizes << ' '; rates << ' '; factors << ' '; shifts << ' '; }
      sizes << s.sizes[i];
      rates << csv::fmt(s.contamination_rates[i]);
      factors << csv::fmt(s.contamination_factors[i]);
      shifts << csv::fmt(s.shift_magnitudes[i]);
    }
    echo["synthetic.sizes"] = sizes.str();
    echo["synthetic.contamination_rates"] = rates.str();
    echo["synthetic.contamination_factors"] = factors.str();
    echo["synthetic.shift_magnitudes"] = shifts.str();
    echo["synthetic.test_size_per_client"] = std::to_string(s.test_size_per_client);
  } else {
    echo["adult.train_path"] = cfg.adult.train_path;
    echo["adult.test_path"] = cfg.adult.test_path;
    echo["adult.capital_gain_threshold"] = csv::fmt(cfg.adult.capital_gain_threshold);
  }
  return echo;
}

std::string render_report_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "key,value\n";
  os << "method," << r.method << "\n";
  os << "dataset," << r.dataset << "\n";
  os << "overall_accuracy," << csv::fmt(r.overall_accuracy) << "\n";
  for (size_t g = 0; g < r.group_names.size(); ++g) {
    os << "group_accuracy." << r.group_names[g] << "," << csv::fmt(r.group_accuracy[g]) << "\n";
  }
  os << "worst_group_accuracy," << csv::fmt(r.worst_group_accuracy) << "\n";
  os << "excess_risk," << csv::fmt(r.excess_risk) << "\n";
  os << "dataset_checksum," << r.dataset_checksum << "\n";
  os << "rounds," << r.rounds << "\n";
  os << "theta_bar_norm," << csv::fmt(r.theta_bar_norm) << "\n";
  for (size_t i = 0; i < r.lambda_final.size(); ++i) {
    os << "lambda_final_" << (i + 1) << "," << csv::fmt(r.lambda_final[i]) << "\n";
  }
  for (const auto& [k, v] : r.config_echo) os << "config." << k << "," << v << "\n";
  return os.str();
}

std::string render_table_md(const std::vector<MetricsReport>& reports) {
  std::ostringstream os;
  const bool synthetic = reports.front().dataset == "synthetic";
  if (synthetic) {
    os << "| Method | Overall |";
    for (const std::string& g : reports.front().group_names) os << " " << g << " |";
    os << "\n|---|---|";
    for (size_t i = 0; i < reports.front().group_names.size(); ++i) os << "---|";
    os << "\n";
    for (const MetricsReport& r : reports) {
      os << "| " << r.method << " | " << csv::fmt(r.overall_accuracy) << " |";
      for (double a : r.group_accuracy) os << " " << csv::fmt(a) << " |";
      os << "\n";
    }
  } else {
    os << "| Method | Accuracy | Excess risk |\n|---|---|---|\n";
    for (const MetricsReport& r : reports) {
      os << "| " << r.method << " | " << csv::fmt(r.overall_accuracy) << " | "
         << csv::fmt(r.excess_risk) << " |\n";
    }
  }
  return os.str();
}

}  // namespace

void MetricsReport::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(overall_accuracy)) throw std::runtime_error("report: accuracy out of [0,1]");
  for (double a : group_accuracy) {
    if (!in_unit(a)) throw std::runtime_error("report: group accuracy out of [0,1]");
  }
  if (group_accuracy.size() != group_names.size()) {
    throw std::runtime_error("report: group name/value mismatch");
  }
  if (!group_accuracy.empty() &&
      worst_group_accuracy != *std::min_element(group_accuracy.begin(), group_accuracy.end())) {
    throw std::runtime_error("report: worst group accuracy is not the minimum");
  }
  if (excess_risk < -1e-9) throw std::runtime_error("report: negative excess risk");
}

FederatedDataset build_dataset(const RunConfig& cfg) {
  if (cfg.dataset == "synthetic") return generate_synthetic(cfg.synthetic);
  if (cfg.dataset == "adult") return load_adult(cfg.adult);
  throw std::invalid_argument("unknown dataset '" + cfg.dataset + "'");
}

OutlierScoreSpec resolve_score(const RunConfig& cfg, const FederatedDataset& data,
                               Method method) {
  if (method != Method::Dorfl) return OutlierScoreSpec::none();

  std::string variant = cfg.score_variant;
  if (variant == "auto") variant = cfg.dataset == "synthetic" ? "quadratic" : "sigmoid";
  if (variant == "none") return OutlierScoreSpec::none();

  if (variant == "quadratic") {
    const double rho2 = cfg.score_rho2 >= 0 ? cfg.score_rho2 : 0.05;
    Vec prior;
    if (cfg.prior_mean_mode == "explicit") {
      prior = cfg.prior_mean_explicit;
    } else if (cfg.prior_mean_mode == "clean_mean") {
      if (cfg.dataset != "synthetic") {
        throw std::invalid_argument("clean_mean prior requires the synthetic dataset");
      }
      prior = cfg.synthetic.clean_mean();
    } else if (cfg.prior_mean_mode == "median") {
      prior = pooled_train_median(data);
    } else {
      throw std::invalid_argument("unknown prior_mean mode '" + cfg.prior_mean_mode + "'");
    }
    return OutlierScoreSpec::quadratic(rho2, std::move(prior));
  }
  if (variant == "sigmoid") {
    const double rho2 = cfg.score_rho2 >= 0 ? cfg.score_rho2 : cfg.adult.rho2;
    const double softness = cfg.score_softness > 0 ? cfg.score_softness : cfg.adult.softness;
    const double threshold = std::isnan(cfg.score_threshold) ? data.standardized_threshold
                                                             : cfg.score_threshold;
    const int index =
        cfg.score_feature_index >= 0 ? cfg.score_feature_index : data.score_feature_index;
    return OutlierScoreSpec::sigmoid_threshold(rho2, threshold, softness, index);
  }
  throw std::invalid_argument("unknown score variant '" + cfg.score_variant + "'");
}

Vec oracle_theta(const FederatedDataset& data) {
  const DiscreteDistribution& train = data.oracle_train;
  const int n = train.size(), d = train.dim();
  Eigen::MatrixXd features(n, d);
  Vec labels(n), weights(n);
  for (int j = 0; j < n; ++j) {
    features.row(j) = train.atoms[j].x;
    labels[j] = train.atoms[j].y;
    weights[j] = train.weights[j];
  }
  Vec theta = Vec::Zero(d);
  for (int iter = 0; iter < 2000; ++iter) {
    const Vec margins = labels.array() * (features * theta).array();
    Vec coeff(n);
    for (int j = 0; j < n; ++j) coeff[j] = -labels[j] * sigmoid(-margins[j]) * weights[j];
    theta -= 0.1 * (features.transpose() * coeff);
  }
  return theta;
}

MetricsReport evaluate(const Vec& theta, const FederatedDataset& data) {
  return evaluate(theta, data, oracle_theta(data));
}

MetricsReport evaluate(const Vec& theta, const FederatedDataset& data,
                       const Vec& theta_oracle) {
  if (data.clean_test.empty()) throw std::invalid_argument("evaluate: empty test set");
  MetricsReport report;
  report.group_names = data.group_names;
  const int groups = static_cast<int>(data.group_names.size());
  std::vector<long> correct(groups, 0), total(groups, 0);
  long correct_all = 0;
  for (int j = 0; j < data.clean_test.size(); ++j) {
    const Sample& s = data.clean_test.atoms[j];
    const int pred = theta.dot(s.x) >= 0 ? 1 : -1;  // sign(0) counts as +1
    const int g = data.test_group[static_cast<size_t>(j)];
    ++total[g];
    if (pred == s.y) {
      ++correct[g];
      ++correct_all;
    }
  }
  report.overall_accuracy = static_cast<double>(correct_all) / data.clean_test.size();
  report.group_accuracy.resize(groups);
  for (int g = 0; g < groups; ++g) {
    report.group_accuracy[g] = total[g] ? static_cast<double>(correct[g]) / total[g] : 0.0;
  }
  report.worst_group_accuracy =
      *std::min_element(report.group_accuracy.begin(), report.group_accuracy.end());

  const double risk = mean_logistic_loss(theta, data.clean_test);
  const double oracle_risk = mean_logistic_loss(theta_oracle, data.clean_test);
  report.excess_risk = risk - oracle_risk;
  report.dataset_checksum = data.source_checksum;
  return report;
}

std::vector<MetricsReport> run_experiment(const RunConfig& cfg) {
  if (cfg.methods.empty()) throw std::invalid_argument("run_experiment: no methods configured");
  const FederatedDataset data = build_dataset(cfg);
  const Vec theta_or = oracle_theta(data);

  std::vector<MetricsReport> reports;
  std::vector<TrainingTrace> traces;
  for (Method method : cfg.methods) {
    const OutlierScoreSpec score = resolve_score(cfg, data, method);
    TrainingTrace trace = train_method(method, cfg, data, score);
    MetricsReport report = evaluate(trace.theta_bar, data, theta_or);
    report.method = method_name(method);
    report.dataset = cfg.dataset;
    report.rounds = static_cast<int>(trace.rounds.size());
    report.theta_bar_norm = trace.theta_bar.norm();
    report.lambda_final.assign(trace.lambda_final.data(),
                               trace.lambda_final.data() + trace.lambda_final.size());
    report.config_echo = echo_config(cfg, method, score);
    report.validate();
    reports.push_back(std::move(report));
    traces.push_back(std::move(trace));
  }

  if (!cfg.output_dir.empty()) {
    fs::create_directories(cfg.output_dir);
    emit_report(reports, cfg.output_dir, cfg.force);
    for (size_t i = 0; i < traces.size(); ++i) {
      const std::string label = method_name(cfg.methods[i]);
      const fs::path dir = reports.size() > 1 ? fs::path(cfg.output_dir) / label
                                              : fs::path(cfg.output_dir);
      fs::create_directories(dir);
      std::ostringstream trace_csv;
      write_trace_csv(traces[i], trace_csv,
                      cfg.methods[i] == Method::Dorfl ? std::string() : label);
      write_file_checked((dir / "trace.csv").string(), trace_csv.str(), cfg.force);
    }
  }
  return reports;
}

std::vector<std::pair<double, double>> sensitivity_sweep(const RunConfig& cfg,
                                                         const std::vector<double>& offsets,
                                                         int jobs) {
  if (cfg.dataset != "synthetic") {
    throw std::invalid_argument("sensitivity_sweep: requires the synthetic dataset");
  }
  {
    std::string variant = cfg.score_variant;
    if (variant == "auto") variant = "quadratic";
    if (variant != "quadratic") {
      throw std::invalid_argument("sensitivity_sweep: requires the quadratic score");
    }
  }
  const int d = cfg.synthetic.dim;
  const Vec clean_mean = cfg.synthetic.clean_mean();
  // Component standard deviations are 1 by construction; the offset moves
  // the prior along the normalized stddev direction.
  const Vec direction = Vec::Ones(d) / std::sqrt(static_cast<double>(d));

  std::vector<std::pair<double, double>> out(offsets.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < offsets.size(); i = next.fetch_add(1)) {
      RunConfig local = cfg;
      local.methods = {Method::Dorfl};
      local.score_variant = "quadratic";
      local.prior_mean_mode = "explicit";
      local.prior_mean_explicit = clean_mean + offsets[i] * direction;
      if (!cfg.output_dir.empty()) {
        std::ostringstream sub;
        sub << cfg.output_dir << "/offset_" << csv::fmt(offsets[i]);
        local.output_dir = sub.str();
      }
      const std::vector<MetricsReport> reports = run_experiment(local);
      out[i] = {offsets[i], reports.front().overall_accuracy};
    }
  };

  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(offsets.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  if (!cfg.output_dir.empty()) {
    fs::create_directories(fs::path(cfg.output_dir) / "plotdata");
    std::ostringstream csv_out;
    csv_out << "offset,accuracy\n";
    for (const auto& [offset, accuracy] : out) {
      csv_out << csv::fmt(offset) << "," << csv::fmt(accuracy) << "\n";
    }
    write_file_checked((fs::path(cfg.output_dir) / "plotdata" / "sensitivity.csv").string(),
                       csv_out.str(), cfg.force);
  }
  return out;
}

void emit_report(const std::vector<MetricsReport>& reports, const std::string& dir,
                 bool force) {
  if (reports.empty()) throw std::invalid_argument("emit_report: nothing to write");
  fs::create_directories(dir);
  if (reports.size() == 1) {
    write_file_checked((fs::path(dir) / "report.csv").string(), render_report_csv(reports[0]),
                       force);
  } else {
    for (const MetricsReport& r : reports) {
      const fs::path sub = fs::path(dir) / r.method;
      fs::create_directories(sub);
      write_file_checked((sub / "report.csv").string(), render_report_csv(r), force);
    }
    write_file_checked((fs::path(dir) / "table.md").string(), render_table_md(reports), force);
  }
  fs::create_directories(fs::path(dir) / "plotdata");
  std::ostringstream group_csv;
  group_csv << "method,group,accuracy\n";
  for (const MetricsReport& r : reports) {
    for (size_t g = 0; g < r.group_names.size(); ++g) {
      group_csv << r.method << "," << r.group_names[g] << "," << csv::fmt(r.group_accuracy[g])
                << "\n";
    }
  }
  write_file_checked((fs::path(dir) / "plotdata" / "group_accuracy.csv").string(),
                     group_csv.str(), force);
}

MetricsReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report '" + path + "'");
  MetricsReport r;
  std::string line;
  std::getline(in, line);  // header
  std::map<int, double> lambda_entries;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("malformed report row: " + line);
    const std::string key = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    if (key == "method") r.method = value;
    else if (key == "dataset") r.dataset = value;
    else if (key == "overall_accuracy") r.overall_accuracy = std::stod(value);
    else if (key == "worst_group_accuracy") r.worst_group_accuracy = std::stod(value);
    else if (key == "excess_risk") r.excess_risk = std::stod(value);
    else if (key == "dataset_checksum") r.dataset_checksum = value;
    else if (key == "rounds") r.rounds = std::stoi(value);
    else if (key == "theta_bar_norm") r.theta_bar_norm = std::stod(value);
    else if (key.rfind("group_accuracy.", 0) == 0) {
      r.group_names.push_back(key.substr(15));
      r.group_accuracy.push_back(std::stod(value));
    } else if (key.rfind("lambda_final_", 0) == 0) {
      lambda_entries[std::stoi(key.substr(13))] = std::stod(value);
    } else if (key.rfind("config.", 0) == 0) {
      r.config_echo[key.substr(7)] = value;
    } else {
      throw std::runtime_error("unknown report key '" + key + "'");
    }
  }
  for (const auto& [idx, v] : lambda_entries) {
    (void)idx;
    r.lambda_final.push_back(v);
  }
  return r;
}

}  // namespace dorfl
