#include "dorfl/projections.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace dorfl {

Vec project_simplex(const Vec& v) {
  const int n = static_cast<int>(v.size());
  if (n == 0) throw std::invalid_argument("project_simplex: empty input");
  if (!v.allFinite()) throw std::invalid_argument("project_simplex: non-finite input");

  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());

  // Largest k with u_(k) - (sum_{j<=k} u_(j) - 1)/k > 0.
  double cumsum = 0.0;
  double tau = 0.0;
  for (int k = 1; k <= n; ++k) {
    cumsum += u[k - 1];
    const double candidate = (cumsum - 1.0) / k;
    if (u[k - 1] - candidate > 0) tau = candidate;
  }

  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = std::max(v[i] - tau, 0.0);
  return out;
}

Vec project_ball(const Vec& theta, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("project_ball: radius must be positive");
  const double norm = theta.norm();
  if (norm <= radius) return theta;
  return theta * (radius / norm);
}

}  // namespace dorfl
