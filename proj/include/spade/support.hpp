#ifndef SPADE_SUPPORT_HPP
#define SPADE_SUPPORT_HPP

#include <Eigen/Core>
#include <vector>

#include "spade/dataset.hpp"

namespace spade {

enum class Kernel { uniform, gaussian };

// Answer for one support query. r_k is the exact k-th nearest distance;
// d and density are computed from max(r_k, kDistanceFloor) so queries that
// coincide with a data point stay finite.
struct SupportQuery {
  double r_k = 0.0;            // exact k-th smallest Euclidean distance
  double d = 0.0;              // log of floored r_k
  double density = 0.0;        // k / (N * V_D * r^D)
  double neighbor_mean = 0.0;  // mean score of the k nearest rows
};

// Exact nearest-neighbor index over the normalized training designs.
// Neighbor search is a linear scan with partial selection; ties at the k-th
// distance resolve by (distance, row index) order. Immutable after build,
// safe for concurrent queries.
class SupportIndex {
 public:
  static constexpr double kDistanceFloor = 1e-6;

  SupportIndex(const Dataset& d, int k);

  int k() const { return k_; }
  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  double unit_ball_volume() const { return unit_ball_volume_; }
  // -log(k / (N * V_D)): the constant in -log p = C0 + D * d.
  double log_density_constant() const;

  const Eigen::MatrixXd& points() const { return points_; }
  const Eigen::VectorXd& scores() const { return scores_; }

  // x is expected in normalized design space.
  SupportQuery query(const Design& x) const;

  // Kernel density estimate at bandwidth h. The uniform kernel is 1/V_D on
  // the closed unit ball; the gaussian kernel is the standard normal density.
  double kde_density(const Design& x, double h, Kernel kernel) const;

  // Max over xs of |(-log density) - (C0 + D * d)|; callers should pass
  // queries whose r_k is above the distance floor.
  double log_density_linearity_check(const std::vector<Design>& xs) const;

 private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd scores_;
  int k_ = 0;
  double unit_ball_volume_ = 0.0;
};

// Volume of the D-dimensional unit ball, computed by the two-step recurrence
// V_D = V_{D-2} * 2*pi / D (exact to rounding; no Gamma evaluation).
double unit_ball_volume(int dim);

}  // namespace spade

#endif  // SPADE_SUPPORT_HPP
