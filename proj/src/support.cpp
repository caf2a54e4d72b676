#include "spade/support.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spade {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
}  // namespace

double unit_ball_volume(int dim) {
  if (dim < 0) throw ConfigError{"negative dimension"};
  double v = (dim % 2 == 0) ? 1.0 : 2.0;  // V_0 or V_1
  for (int d = (dim % 2 == 0) ? 2 : 3; d <= dim; d += 2) {
    v *= kTwoPi / d;
  }
  return v;
}

SupportIndex::SupportIndex(const Dataset& d, int k) : k_(k) {
  if (k < 1 || k > d.size()) {
    throw ConfigError{"neighbor count k=" + std::to_string(k) +
                      " outside [1, N=" + std::to_string(d.size()) + "]"};
  }
  points_ = d.normalized_designs();
  scores_ = d.normalized_scores();
  unit_ball_volume_ = spade::unit_ball_volume(d.dim());
}

double SupportIndex::log_density_constant() const {
  return -std::log(static_cast<double>(k_) /
                   (static_cast<double>(size()) * unit_ball_volume_));
}

SupportQuery SupportIndex::query(const Design& x) const {
  if (x.size() != points_.cols()) {
    throw DimError{"query has dimension " + std::to_string(x.size()) +
                   ", index expects " + std::to_string(points_.cols())};
  }
  const int n = size();
  std::vector<std::pair<double, int>> dist(n);
  for (int i = 0; i < n; ++i) {
    dist[i] = {(points_.row(i).transpose() - x).squaredNorm(), i};
  }
  std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());

  SupportQuery q;
  q.r_k = std::sqrt(dist[k_ - 1].first);
  double mean = 0.0;
  for (int i = 0; i < k_; ++i) mean += scores_[dist[i].second];
  q.neighbor_mean = mean / k_;

  const double r = std::max(q.r_k, kDistanceFloor);
  q.d = std::log(r);
  q.density = k_ / (n * unit_ball_volume_ * std::pow(r, dim()));
  return q;
}

double SupportIndex::kde_density(const Design& x, double h, Kernel kernel) const {
  if (h <= 0.0) throw ConfigError{"bandwidth must be positive"};
  if (x.size() != points_.cols()) {
    throw DimError{"query has dimension " + std::to_string(x.size()) +
                   ", index expects " + std::to_string(points_.cols())};
  }
  const int n = size();
  const int d = dim();
  double sum = 0.0;
  if (kernel == Kernel::uniform) {
    for (int i = 0; i < n; ++i) {
      const double u = std::sqrt((points_.row(i).transpose() - x).squaredNorm()) / h;
      if (u <= 1.0) sum += 1.0 / unit_ball_volume_;
    }
  } else {
    const double norm_const = std::pow(kTwoPi, -0.5 * d);
    for (int i = 0; i < n; ++i) {
      const double u2 = (points_.row(i).transpose() - x).squaredNorm() / (h * h);
      sum += norm_const * std::exp(-0.5 * u2);
    }
  }
  return sum / (n * std::pow(h, d));
}

double SupportIndex::log_density_linearity_check(const std::vector<Design>& xs) const {
  const double c0 = log_density_constant();
  double worst = 0.0;
  for (const auto& x : xs) {
    const SupportQuery q = query(x);
    const double residual = std::abs(-std::log(q.density) - (c0 + dim() * q.d));
    worst = std::max(worst, residual);
  }
  return worst;
}

}  // namespace spade
