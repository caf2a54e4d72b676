#include "spade/schedule.hpp"

#include <cmath>
#include <string>

namespace spade {

VarianceSchedule make_schedule(int timesteps, double beta_start, double beta_end) {
  if (timesteps < 1) throw ConfigError{"need at least one timestep"};
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0)) {
    throw ConfigError{"require 0 < beta_start <= beta_end < 1"};
  }

  VarianceSchedule s;
  s.timesteps = timesteps;
  s.beta.resize(timesteps);
  s.alpha.resize(timesteps);
  s.alpha_bar.resize(timesteps);
  s.posterior_var.resize(timesteps);

  double abar = 1.0;
  for (int t = 1; t <= timesteps; ++t) {
    const double frac = timesteps == 1 ? 0.0
                                       : static_cast<double>(t - 1) / (timesteps - 1);
    const double beta = beta_start + frac * (beta_end - beta_start);
    const double abar_prev = abar;
    abar *= 1.0 - beta;
    s.beta[t - 1] = beta;
    s.alpha[t - 1] = 1.0 - beta;
    s.alpha_bar[t - 1] = abar;
    s.posterior_var[t - 1] = (1.0 - abar_prev) / (1.0 - abar) * beta;
  }
  return s;
}

double forward_noise(const VarianceSchedule& sched, double y0, int t, double eps) {
  if (t < 1 || t > sched.timesteps) {
    throw StepError{"step " + std::to_string(t) + " outside [1, " +
                    std::to_string(sched.timesteps) + "]"};
  }
  const double abar = sched.alpha_bar[t - 1];
  return std::sqrt(abar) * y0 + std::sqrt(1.0 - abar) * eps;
}

}  // namespace spade
