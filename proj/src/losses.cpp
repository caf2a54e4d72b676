#include "spade/losses.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "spade/rng.hpp"

namespace spade {

namespace {

inline double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

inline double sigmoid(double u) {
  return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u));
}

Eigen::MatrixXd diff_inputs(const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                            const StepPlan& plan, const VarianceSchedule& sched) {
  const Eigen::Index b = Xn.rows();
  Eigen::MatrixXd in(b, Xn.cols() + 3);
  for (Eigen::Index i = 0; i < b; ++i) {
    const int t = plan.t[static_cast<std::size_t>(i)];
    const double abar = sched.alpha_bar[t - 1];
    in(i, 0) = std::sqrt(abar) * yn[i] + std::sqrt(1.0 - abar) * plan.eps[i];
    in(i, 1) = static_cast<double>(t) / sched.timesteps;
    in(i, 2) = abar;
  }
  in.rightCols(Xn.cols()) = Xn;
  return in;
}

Eigen::MatrixXd expand_designs(const Eigen::MatrixXd& designs, int mc_samples) {
  Eigen::MatrixXd expanded(designs.rows() * mc_samples, designs.cols());
  for (Eigen::Index i = 0; i < designs.rows(); ++i) {
    for (int m = 0; m < mc_samples; ++m) {
      expanded.row(i * mc_samples + m) = designs.row(i);
    }
  }
  return expanded;
}

Eigen::VectorXd flatten_noise(const Eigen::MatrixXd& noise) {
  Eigen::VectorXd y(noise.rows() * noise.cols());
  for (Eigen::Index i = 0; i < noise.rows(); ++i) {
    for (Eigen::Index m = 0; m < noise.cols(); ++m) y[i * noise.cols() + m] = noise(i, m);
  }
  return y;
}

void row_stats(const Eigen::MatrixXd& samples, Eigen::VectorXd& mu, Eigen::VectorXd& sigma) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index m = samples.cols();
  mu = samples.rowwise().mean();
  sigma.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sigma[i] = std::sqrt((samples.row(i).array() - mu[i]).square().sum() / (m - 1));
  }
}

}  // namespace

StepPlan make_step_plan(const std::vector<int>& batch_rows,
                        const Eigen::VectorXd& yn_all, int timesteps,
                        int mc_samples, int rank_pairs, std::uint64_t noise_seed,
                        std::uint64_t mc_seed, std::uint64_t pair_seed) {
  const int b = static_cast<int>(batch_rows.size());
  StepPlan plan;
  plan.rows = batch_rows;
  plan.t.resize(b);
  plan.eps.resize(b);
  plan.mc_noise.resize(b, mc_samples);

  Rng noise(noise_seed);
  for (int i = 0; i < b; ++i) {
    plan.t[i] = 1 + noise.index(timesteps);
    plan.eps[i] = noise.normal();
  }
  Rng mc(mc_seed);
  for (int i = 0; i < b; ++i) {
    for (int m = 0; m < mc_samples; ++m) plan.mc_noise(i, m) = mc.normal();
  }

  // Distinct unordered pairs; only strictly ordered ones survive, oriented
  // so the first index carries the larger score.
  if (b >= 2 && rank_pairs > 0) {
    const long long available = static_cast<long long>(b) * (b - 1) / 2;
    Rng pr(pair_seed);
    std::set<std::pair<int, int>> chosen;
    if (available <= rank_pairs) {
      for (int i = 0; i < b; ++i) {
        for (int j = i + 1; j < b; ++j) chosen.insert({i, j});
      }
    } else {
      while (static_cast<long long>(chosen.size()) < rank_pairs) {
        int i = pr.index(b);
        int j = pr.index(b);
        if (i == j) continue;
        chosen.insert({std::min(i, j), std::max(i, j)});
      }
    }
    for (const auto& [i, j] : chosen) {
      const double yi = yn_all[batch_rows[i]];
      const double yj = yn_all[batch_rows[j]];
      if (yi == yj) continue;
      plan.pairs.emplace_back(yi > yj ? i : j, yi > yj ? j : i);
    }
  }
  return plan;
}

double calib_moment_term(const Eigen::VectorXd& mu, const Eigen::VectorXd& y) {
  return (mu - y).squaredNorm() / static_cast<double>(mu.size());
}

double calib_rank_term(const Eigen::VectorXd& mu,
                       const std::vector<std::pair<int, int>>& pairs, double s) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [i, j] : pairs) sum += softplus(-s * (mu[i] - mu[j]));
  return sum / static_cast<double>(pairs.size());
}

double prox_hinge_term(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma,
                       const Eigen::VectorXd& d, const Eigen::VectorXd& mu_nn,
                       double a, double a0, double a1) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    sum += std::max(0.0, mu[i] - mu_nn[i] - a * d[i]);
    sum += std::max(0.0, (a0 + a1 * d[i]) - sigma[i]);
  }
  return sum / static_cast<double>(mu.size());
}

Eigen::MatrixXd mc_sample_matrix(const NoiseModel& net, const VarianceSchedule& sched,
                                 const Eigen::MatrixXd& designs,
                                 const std::vector<int>& grid,
                                 const Eigen::MatrixXd& initial_noise) {
  const int m = static_cast<int>(initial_noise.cols());
  const Eigen::VectorXd out = ddim_chain(net, sched, expand_designs(designs, m), grid,
                                         flatten_noise(initial_noise));
  Eigen::MatrixXd samples(designs.rows(), m);
  for (Eigen::Index i = 0; i < designs.rows(); ++i) {
    for (int k = 0; k < m; ++k) samples(i, k) = out[i * m + k];
  }
  return samples;
}

LossParts eval_losses(const NoiseModel& net, const VarianceSchedule& sched,
                      const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                      const Eigen::VectorXd& d, const Eigen::VectorXd& mu_nn,
                      const StepPlan& plan, const LossSettings& cfg,
                      bool want_diff, bool want_calib, bool want_prox) {
  LossParts parts;
  if (want_diff) {
    const Eigen::MatrixXd in = diff_inputs(Xn, yn, plan, sched);
    const Eigen::VectorXd eps_hat = net.predict(in);
    parts.diff = (plan.eps - eps_hat).squaredNorm() / static_cast<double>(Xn.rows());
  }
  if (want_calib || want_prox) {
    const auto grid = ddim_grid(sched.timesteps, cfg.ddim_steps);
    const Eigen::MatrixXd samples =
        mc_sample_matrix(net, sched, Xn, grid, plan.mc_noise);
    Eigen::VectorXd mu, sigma;
    row_stats(samples, mu, sigma);
    if (want_calib) {
      parts.calib = calib_moment_term(mu, yn) +
                    calib_rank_term(mu, plan.pairs, cfg.rank_temperature);
    }
    if (want_prox) {
      parts.prox = prox_hinge_term(mu, sigma, d, mu_nn, cfg.prox_a, cfg.prox_a0,
                                   cfg.prox_a1);
    }
  }
  return parts;
}

LossParts eval_losses_grad(const MlpNoiseNet& net, const VarianceSchedule& sched,
                           const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                           const Eigen::VectorXd& d, const Eigen::VectorXd& mu_nn,
                           const StepPlan& plan, const LossSettings& cfg,
                           double w_diff, double w_calib, double w_prox,
                           Eigen::VectorXd& grad) {
  LossParts parts;
  const Eigen::Index b = Xn.rows();

  if (w_diff != 0.0) {
    MlpCache cache;
    const Eigen::MatrixXd in = diff_inputs(Xn, yn, plan, sched);
    const Eigen::VectorXd eps_hat = net.forward(in, cache);
    const Eigen::VectorXd residual = plan.eps - eps_hat;
    parts.diff = residual.squaredNorm() / static_cast<double>(b);
    const Eigen::VectorXd d_eps_hat = (-2.0 * w_diff / static_cast<double>(b)) * residual;
    net.backward(cache, d_eps_hat, grad);
  }

  if (w_calib != 0.0 || w_prox != 0.0) {
    const int m = cfg.mc_samples;
    const auto grid = ddim_grid(sched.timesteps, cfg.ddim_steps);
    ChainCache chain;
    const Eigen::VectorXd out = ddim_chain_grad(
        net, sched, expand_designs(Xn, m), grid, flatten_noise(plan.mc_noise), chain);

    Eigen::MatrixXd samples(b, m);
    for (Eigen::Index i = 0; i < b; ++i) {
      for (int k = 0; k < m; ++k) samples(i, k) = out[i * m + k];
    }
    Eigen::VectorXd mu, sigma;
    row_stats(samples, mu, sigma);

    Eigen::VectorXd g_mu = Eigen::VectorXd::Zero(b);
    Eigen::VectorXd g_sigma = Eigen::VectorXd::Zero(b);

    if (w_calib != 0.0) {
      parts.calib = calib_moment_term(mu, yn) +
                    calib_rank_term(mu, plan.pairs, cfg.rank_temperature);
      g_mu += (2.0 * w_calib / static_cast<double>(b)) * (mu - yn);
      if (!plan.pairs.empty()) {
        const double s = cfg.rank_temperature;
        const double scale = w_calib / static_cast<double>(plan.pairs.size());
        for (const auto& [i, j] : plan.pairs) {
          const double g = -s * sigmoid(-s * (mu[i] - mu[j])) * scale;
          g_mu[i] += g;
          g_mu[j] -= g;
        }
      }
    }

    if (w_prox != 0.0) {
      parts.prox = prox_hinge_term(mu, sigma, d, mu_nn, cfg.prox_a, cfg.prox_a0,
                                   cfg.prox_a1);
      const double scale = w_prox / static_cast<double>(b);
      for (Eigen::Index i = 0; i < b; ++i) {
        if (mu[i] - mu_nn[i] - cfg.prox_a * d[i] > 0.0) g_mu[i] += scale;
        if ((cfg.prox_a0 + cfg.prox_a1 * d[i]) - sigma[i] > 0.0) g_sigma[i] -= scale;
      }
    }

    // d(mu)/d(sample) = 1/M; d(sigma)/d(sample) = (sample - mu) / ((M-1) sigma).
    Eigen::VectorXd d_final(b * m);
    for (Eigen::Index i = 0; i < b; ++i) {
      for (int k = 0; k < m; ++k) {
        double g = g_mu[i] / m;
        if (g_sigma[i] != 0.0 && sigma[i] > 0.0) {
          g += g_sigma[i] * (samples(i, k) - mu[i]) / ((m - 1) * sigma[i]);
        }
        d_final[i * m + k] = g;
      }
    }
    ddim_chain_backward(net, chain, d_final, grad);
  }

  return parts;
}

double loss_diff(const NoiseModel& net, const VarianceSchedule& sched,
                 const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                 const StepPlan& plan) {
  return eval_losses(net, sched, Xn, yn, {}, {}, plan, {}, true, false, false).diff;
}

double loss_calib(const NoiseModel& net, const VarianceSchedule& sched,
                  const Eigen::MatrixXd& Xn, const Eigen::VectorXd& yn,
                  const StepPlan& plan, const LossSettings& cfg) {
  return eval_losses(net, sched, Xn, yn, {}, {}, plan, cfg, false, true, false).calib;
}

double loss_prox(const NoiseModel& net, const VarianceSchedule& sched,
                 const Eigen::MatrixXd& Xn, const Eigen::VectorXd& d,
                 const Eigen::VectorXd& mu_nn, const StepPlan& plan,
                 const LossSettings& cfg) {
  const Eigen::VectorXd dummy_y = Eigen::VectorXd::Zero(Xn.rows());
  return eval_losses(net, sched, Xn, dummy_y, d, mu_nn, plan, cfg, false, false, true).prox;
}

}  // namespace spade
