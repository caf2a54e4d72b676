#include "spade/sampler.hpp"

#include <cmath>
#include <string>

namespace spade {

PredictiveStats stats_from_samples(const Eigen::VectorXd& samples) {
  if (samples.size() < 2) {
    throw ConfigError{"need at least 2 samples for the unbiased std"};
  }
  PredictiveStats s;
  s.samples = static_cast<int>(samples.size());
  s.mean = samples.mean();
  s.stddev = std::sqrt((samples.array() - s.mean).square().sum() / (s.samples - 1));
  return s;
}

std::vector<int> ddim_grid(int timesteps, int steps) {
  if (steps < 1 || steps > timesteps) {
    throw ConfigError{"ddim steps must lie in [1, T]"};
  }
  std::vector<int> grid;
  if (steps == 1) {
    grid.push_back(timesteps);
    return grid;
  }
  int prev = -1;
  for (int j = 0; j < steps; ++j) {
    const double frac = static_cast<double>(j) / (steps - 1);
    int t = static_cast<int>(std::lround(timesteps - frac * (timesteps - 1)));
    if (t == prev) continue;  // rounding collision when steps is close to T
    grid.push_back(t);
    prev = t;
  }
  return grid;
}

double reverse_step_mean(const VarianceSchedule& sched, const NoiseModel& net,
                         double y_t, int t, const Design& x) {
  if (t < 1 || t > sched.timesteps) {
    throw StepError{"step " + std::to_string(t) + " outside [1, " +
                    std::to_string(sched.timesteps) + "]"};
  }
  Eigen::MatrixXd in(1, x.size() + 3);
  in(0, 0) = y_t;
  in(0, 1) = static_cast<double>(t) / sched.timesteps;
  in(0, 2) = sched.alpha_bar[t - 1];
  in.row(0).tail(x.size()) = x.transpose();
  const double eps_hat = net.predict(in)[0];

  const double alpha = sched.alpha[t - 1];
  const double abar = sched.alpha_bar[t - 1];
  return (y_t - (1.0 - alpha) / std::sqrt(1.0 - abar) * eps_hat) / std::sqrt(alpha);
}

Eigen::MatrixXd chain_inputs(const Eigen::MatrixXd& designs, const Eigen::VectorXd& y,
                             int t, const VarianceSchedule& sched) {
  Eigen::MatrixXd in(designs.rows(), designs.cols() + 3);
  in.col(0) = y;
  in.col(1).setConstant(static_cast<double>(t) / sched.timesteps);
  in.col(2).setConstant(sched.alpha_bar[t - 1]);
  in.rightCols(designs.cols()) = designs;
  return in;
}

namespace {

// y_next = gain_y * y + gain_eps * eps_hat, where the clean estimate
// y0_hat = (y - sqrt(1-abar_t) * eps_hat) / sqrt(abar_t) is re-noised to the
// next grid time (abar = 1 past the end, so the last step emits y0_hat).
void step_gains(const VarianceSchedule& sched, int t_cur, int t_next,
                double& gain_y, double& gain_eps) {
  const double abar_cur = sched.alpha_bar_at(t_cur);
  const double abar_next = sched.alpha_bar_at(t_next);
  gain_y = std::sqrt(abar_next / abar_cur);
  gain_eps = std::sqrt(1.0 - abar_next) - gain_y * std::sqrt(1.0 - abar_cur);
}

}  // namespace

Eigen::VectorXd ddim_chain(const NoiseModel& net, const VarianceSchedule& sched,
                           const Eigen::MatrixXd& designs,
                           const std::vector<int>& grid, Eigen::VectorXd y) {
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const int t = grid[j];
    const int t_next = j + 1 < grid.size() ? grid[j + 1] : 0;
    const Eigen::VectorXd eps_hat = net.predict(chain_inputs(designs, y, t, sched));
    double gy, ge;
    step_gains(sched, t, t_next, gy, ge);
    y = gy * y + ge * eps_hat;
  }
  return y;
}

Eigen::VectorXd ddim_chain_grad(const MlpNoiseNet& net, const VarianceSchedule& sched,
                                const Eigen::MatrixXd& designs,
                                const std::vector<int>& grid, Eigen::VectorXd y,
                                ChainCache& cache) {
  const std::size_t steps = grid.size();
  cache.step_caches.resize(steps);
  cache.gain_y.resize(steps);
  cache.gain_eps.resize(steps);
  for (std::size_t j = 0; j < steps; ++j) {
    const int t = grid[j];
    const int t_next = j + 1 < steps ? grid[j + 1] : 0;
    const Eigen::VectorXd eps_hat =
        net.forward(chain_inputs(designs, y, t, sched), cache.step_caches[j]);
    step_gains(sched, t, t_next, cache.gain_y[j], cache.gain_eps[j]);
    y = cache.gain_y[j] * y + cache.gain_eps[j] * eps_hat;
  }
  return y;
}

void ddim_chain_backward(const MlpNoiseNet& net, const ChainCache& cache,
                         const Eigen::VectorXd& d_final, Eigen::VectorXd& param_grad) {
  Eigen::VectorXd g = d_final;
  for (int j = static_cast<int>(cache.step_caches.size()) - 1; j >= 0; --j) {
    const Eigen::VectorXd d_eps = cache.gain_eps[j] * g;
    const Eigen::MatrixXd d_in =
        net.backward(cache.step_caches[j], d_eps, param_grad);
    g = cache.gain_y[j] * g + d_in.col(0);
  }
}

}  // namespace spade
