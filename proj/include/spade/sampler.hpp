#ifndef SPADE_SAMPLER_HPP
#define SPADE_SAMPLER_HPP

#include <Eigen/Core>
#include <vector>

#include "spade/dataset.hpp"
#include "spade/network.hpp"
#include "spade/schedule.hpp"

namespace spade {

// Monte-Carlo summary of sampled scores. std uses the unbiased 1/(M-1)
// estimator, so at least two samples are required.
struct PredictiveStats {
  double mean = 0.0;
  double stddev = 0.0;
  int samples = 0;
};

PredictiveStats stats_from_samples(const Eigen::VectorXd& samples);

// Evenly spaced decreasing timestep grid from T down to 1 (both endpoints
// included when steps > 1; steps == 1 yields {T}).
std::vector<int> ddim_grid(int timesteps, int steps);

// Mean of one reverse step: (y_t - (1-alpha_t)/sqrt(1-abar_t) * eps_hat) / sqrt(alpha_t).
// An ancestral step would add sqrt(posterior_var[t]) * z for t > 1.
double reverse_step_mean(const VarianceSchedule& sched, const NoiseModel& net,
                         double y_t, int t, const Design& x);

// Recorded state of a batched chain, enough to backpropagate through every
// step. gain_y and gain_eps are the per-step linear coefficients of
//   y_next = gain_y * y + gain_eps * eps_hat(y, t, x).
struct ChainCache {
  std::vector<MlpCache> step_caches;
  std::vector<double> gain_y, gain_eps;
};

// Runs the deterministic eta = 0 update over `grid` for all rows in lockstep.
// designs: R x D (normalized space); y: R initial values (typically standard
// normal draws). Returns the final clean estimates.
Eigen::VectorXd ddim_chain(const NoiseModel& net, const VarianceSchedule& sched,
                           const Eigen::MatrixXd& designs,
                           const std::vector<int>& grid, Eigen::VectorXd y);

// Same chain, recording activations for ddim_chain_backward.
Eigen::VectorXd ddim_chain_grad(const MlpNoiseNet& net, const VarianceSchedule& sched,
                                const Eigen::MatrixXd& designs,
                                const std::vector<int>& grid, Eigen::VectorXd y,
                                ChainCache& cache);

// Accumulates d(loss)/d(params) into param_grad given d(loss)/d(final y).
// The chain is deterministic given its initial noise, so the whole sampling
// path is differentiable by ordinary reverse accumulation.
void ddim_chain_backward(const MlpNoiseNet& net, const ChainCache& cache,
                         const Eigen::VectorXd& d_final, Eigen::VectorXd& param_grad);

// Builds the R x (D+3) input block [y, t/T, abar_t, x] for one timestep.
Eigen::MatrixXd chain_inputs(const Eigen::MatrixXd& designs, const Eigen::VectorXd& y,
                             int t, const VarianceSchedule& sched);

}  // namespace spade

#endif  // SPADE_SAMPLER_HPP
