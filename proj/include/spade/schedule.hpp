#ifndef SPADE_SCHEDULE_HPP
#define SPADE_SCHEDULE_HPP

#include <Eigen/Core>

#include "spade/errors.hpp"

namespace spade {

// Diffusion coefficients for timesteps t = 1..T (stored at index t-1).
// alpha_bar is the running product of alpha; posterior_var is the variance
// of one ancestral reverse step, with the t = 1 entry equal to zero (the
// final step adds no noise).
struct VarianceSchedule {
  int timesteps = 0;
  Eigen::VectorXd beta, alpha, alpha_bar, posterior_var;

  // alpha_bar at step t with the t = 0 convention alpha_bar = 1.
  double alpha_bar_at(int t) const {
    if (t < 0 || t > timesteps) throw StepError{"step out of range"};
    return t == 0 ? 1.0 : alpha_bar[t - 1];
  }
};

// Linear schedule: beta_t interpolates from beta_start to beta_end.
VarianceSchedule make_schedule(int timesteps, double beta_start, double beta_end);

// One draw from q(y_t | y_0): sqrt(abar_t) * y0 + sqrt(1 - abar_t) * eps.
double forward_noise(const VarianceSchedule& sched, double y0, int t, double eps);

}  // namespace spade

#endif  // SPADE_SCHEDULE_HPP
