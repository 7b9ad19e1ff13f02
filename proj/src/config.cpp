#include "dorfl/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dorfl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("config key '" + key + "': cannot parse number '" + v + "'");
  }
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long out = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("config key '" + key + "': cannot parse integer '" + v + "'");
  }
  return out;
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(v);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(trim(part));
  return parts;
}

Vec to_vec(const std::string& key, const std::string& v) {
  const std::vector<std::string> parts = split(v, ',');
  Vec out(static_cast<int>(parts.size()));
  for (size_t i = 0; i < parts.size(); ++i) {
    out[static_cast<int>(i)] = to_double(key, parts[i]);
  }
  return out;
}

std::vector<double> to_double_list(const std::string& key, const std::string& v) {
  const std::vector<std::string> parts = split(v, ',');
  std::vector<double> out;
  for (const std::string& p : parts) out.push_back(to_double(key, p));
  return out;
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const std::string& p : split(v, ',')) out.push_back(static_cast<int>(to_long(key, p)));
  return out;
}

}  // namespace

ConfigMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  ConfigMap cfg;
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']') {
        std::ostringstream msg;
        msg << path << ":" << line_no << ": malformed section header";
        throw std::runtime_error(msg.str());
      }
      section = trim(stripped.substr(1, stripped.size() - 2));
      continue;
    }
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected key = value";
      throw std::runtime_error(msg.str());
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    cfg[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

void apply_overrides(ConfigMap& cfg, const std::vector<std::string>& sets) {
  for (const std::string& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    }
    cfg[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
}

RunConfig make_run_config(const ConfigMap& cfg) {
  RunConfig rc;
  bool synthetic_seed_set = false;

  for (const auto& [key, value] : cfg) {
    if (key == "run.dataset") {
      rc.dataset = value;
    } else if (key == "run.method") {
      rc.methods.clear();
      if (value == "all") {
        rc.methods = {Method::Dorfl, Method::Erm, Method::Afl, Method::Wafl};
      } else {
        for (const std::string& m : split(value, ',')) rc.methods.push_back(method_from_name(m));
      }
    } else if (key == "run.seed") {
      rc.seed = static_cast<std::uint64_t>(to_long(key, value));
    } else if (key == "run.out") {
      rc.output_dir = value;
    } else if (key == "hyper.rho") {
      rc.hyper.rho = to_double(key, value);
    } else if (key == "hyper.beta") {
      rc.hyper.beta = to_double(key, value);
    } else if (key == "hyper.eta_theta") {
      rc.hyper.eta_theta = to_double(key, value);
    } else if (key == "hyper.eta_lambda") {
      rc.hyper.eta_lambda = to_double(key, value);
    } else if (key == "hyper.inner_tol") {
      rc.hyper.inner_tol = to_double(key, value);
    } else if (key == "hyper.inner_max_iters") {
      rc.hyper.inner_max_iters = static_cast<int>(to_long(key, value));
    } else if (key == "hyper.rounds") {
      rc.hyper.rounds = static_cast<int>(to_long(key, value));
    } else if (key == "hyper.batch_size") {
      rc.hyper.batch_size = static_cast<int>(to_long(key, value));
    } else if (key == "hyper.radius") {
      rc.hyper.radius = to_double(key, value);
    } else if (key == "hyper.trace_surrogate_every") {
      rc.hyper.trace_surrogate_every = static_cast<int>(to_long(key, value));
    } else if (key == "score.variant") {
      rc.score_variant = value;
    } else if (key == "score.rho2") {
      rc.score_rho2 = to_double(key, value);
    } else if (key == "score.softness") {
      rc.score_softness = to_double(key, value);
    } else if (key == "score.threshold") {
      rc.score_threshold = to_double(key, value);
    } else if (key == "score.feature_index") {
      rc.score_feature_index = static_cast<int>(to_long(key, value));
    } else if (key == "score.prior_mean") {
      if (value == "median" || value == "clean_mean") {
        rc.prior_mean_mode = value;
      } else {
        rc.prior_mean_mode = "explicit";
        rc.prior_mean_explicit = to_vec(key, value);
      }
    } else if (key == "synthetic.seed") {
      rc.synthetic.seed = static_cast<std::uint64_t>(to_long(key, value));
      synthetic_seed_set = true;
    } else if (key == "synthetic.dim") {
      rc.synthetic.dim = static_cast<int>(to_long(key, value));
    } else if (key == "synthetic.num_clients") {
      rc.synthetic.num_clients = static_cast<int>(to_long(key, value));
    } else if (key == "synthetic.means") {
      rc.synthetic.means.clear();
      for (const std::string& row : split(value, ';')) {
        rc.synthetic.means.push_back(to_vec(key, row));
      }
    } else if (key == "synthetic.sizes") {
      rc.synthetic.sizes = to_int_list(key, value);
    } else if (key == "synthetic.contamination_rates") {
      rc.synthetic.contamination_rates = to_double_list(key, value);
    } else if (key == "synthetic.contamination_factors") {
      rc.synthetic.contamination_factors = to_double_list(key, value);
    } else if (key == "synthetic.shift_magnitudes") {
      rc.synthetic.shift_magnitudes = to_double_list(key, value);
    } else if (key == "synthetic.theta_star") {
      rc.synthetic.theta_star = to_vec(key, value);
    } else if (key == "synthetic.test_size_per_client") {
      rc.synthetic.test_size_per_client = static_cast<int>(to_long(key, value));
    } else if (key == "adult.train_path") {
      rc.adult.train_path = value;
    } else if (key == "adult.test_path") {
      rc.adult.test_path = value;
    } else if (key == "adult.capital_gain_threshold") {
      rc.adult.capital_gain_threshold = to_double(key, value);
    } else if (key == "adult.rho2") {
      rc.adult.rho2 = to_double(key, value);
    } else if (key == "adult.softness") {
      rc.adult.softness = to_double(key, value);
    } else {
      throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }

  if (!synthetic_seed_set) rc.synthetic.seed = rc.seed;

  if (rc.dataset == "adult") {
    const char* env = std::getenv("DORFL_ADULT_DIR");
    if (rc.adult.train_path.empty() && env) {
      rc.adult.train_path = std::string(env) + "/adult.data";
    }
    if (rc.adult.test_path.empty() && env) {
      rc.adult.test_path = std::string(env) + "/adult.test";
    }
  }
  return rc;
}

}  // namespace dorfl
