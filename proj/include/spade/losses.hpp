#ifndef SPADE_LOSSES_HPP
#define SPADE_LOSSES_HPP

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "spade/sampler.hpp"

namespace spade {

// Knobs shared by the calibration and proximity losses.
struct LossSettings {
  double rank_temperature = 1.0;  // s in the pairwise logistic term
  double prox_a = 0.02;           // mean-shrink margin slope
  double prox_a0 = 0.02;          // variance floor intercept
  double prox_a1 = 0.005;         // variance floor slope
  int mc_samples = 8;             // short-run samples per design
  int ddim_steps = 10;
};

// All random draws for one optimization step, fixed up front so every loss
// is a deterministic function of the parameters (which is what makes both
// finite-difference checks and bitwise-reproducible training possible).
struct StepPlan {
  std::vector<int> rows;                       // dataset row index per batch row
  std::vector<int> t;                          // timestep per batch row
  Eigen::VectorXd eps;                         // forward noise per batch row
  Eigen::MatrixXd mc_noise;                    // B x M initial chain noise
  std::vector<std::pair<int, int>> pairs;      // batch-local (i, j) with y_i > y_j
};

// Draws timesteps, noises, and up to `rank_pairs` distinct unordered index
// pairs (kept only when strictly ordered, oriented so y_i > y_j).
StepPlan make_step_plan(const std::vector<int>& batch_rows,
                        const Eigen::VectorXd& yn_all, int timesteps,
                        int mc_samples, int rank_pairs, std::uint64_t noise_seed,
                        std::uint64_t mc_seed, std::uint64_t pair_seed);

struct LossParts {
  double diff = 0.0;
  double calib = 0.0;
  double prox = 0.0;
  double total(double lambda1, double lambda2) const {
    return diff + lambda1 * calib + lambda2 * prox;
  }
};

// Scalar assemblers, exposed separately so they can be tested against hand
// values without running any sampler.
double calib_moment_term(const Eigen::VectorXd& mu, const Eigen::VectorXd& y);
double calib_rank_term(const Eigen::VectorXd& mu,
                       const std::vector<std::pair<int, int>>& pairs, double s);
double prox_hinge_term(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                       const Eigen::VectorXd& d, const Eigen::VectorXd& mu_nn,
                       double a, double a0, double a1);

// Forward-only evaluation on a fixed plan. Xn/yn are the gathered batch in
// normalized space; d/mu_nn are the per-row support query results (ignored
// unless want_prox). Parts not requested are returned as zero.
LossParts eval_losses(const NoiseModel& net, const VarianceSchedule& sched,
                      const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                      const Eigen::VectorXd& d, const Eigen::VectorXd& mu_nn,
                      const StepPlan& plan, const LossSettings& cfg,
                      bool want_diff, bool want_calib, bool want_prox);

// Weighted evaluation with reverse-mode gradients accumulated into `grad`
// (length net.arch().param_count()). Gradients of the calibration and
// proximity terms flow through the full sampling chain. Parts with zero
// weight are skipped.
LossParts eval_losses_grad(const MlpNoiseNet& net, const VarianceSchedule& sched,
                           const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                           const Eigen::VectorXd& d, const Eigen::VectorXd& mu_nn,
                           const StepPlan& plan, const LossSettings& cfg,
                           double w_diff, double w_calib, double w_prox,
                           Eigen::VectorXd& grad);

// Batched short-run sampling: one row of samples per design row.
Eigen::MatrixXd mc_sample_matrix(const NoiseModel& net, const VarianceSchedule& sched,
                                 const Eigen::MatrixXd& designs,
                                 const std::vector<int>& grid,
                                 const Eigen::MatrixXd& initial_noise);

// Denoising score-matching objective on the plan's fixed (t, eps) draws.
double loss_diff(const NoiseModel& net, const VarianceSchedule& sched,
                 const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                 const StepPlan& plan);

// Moment matching plus pairwise rank consistency of the short-run means.
double loss_calib(const NoiseModel& net, const VarianceSchedule& sched,
                  const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                  const StepPlan& plan, const LossSettings& cfg);

// Mean-shrink and variance-floor hinges against the support queries.
double loss_prox(const NoiseModel& net, const VarianceSchedule& sched,
                 const Eigen::MatrixXd& Xn, const Eigen::VectorXd& d,
                 const Eigen::VectorXd& mu_nn, const StepPlan& plan,
                 const LossSettings& cfg);

}  // namespace spade

#endif  // SPADE_LOSSES_HPP
