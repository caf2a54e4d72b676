#include "spade/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "spade/rng.hpp"

namespace spade {

AdamOptimizer::AdamOptimizer(int param_count, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(Eigen::VectorXd::Zero(param_count)),
      v_(Eigen::VectorXd::Zero(param_count)) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  ++steps_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  params.array() -=
      lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

TrainResult train(const Dataset& data, const SupportIndex& index,
                  const TrainConfig& cfg) {
  if (index.size() != data.size() || index.dim() != data.dim()) {
    throw ConfigError{"support index does not match the dataset"};
  }
  if (cfg.batch_size < 1) throw ConfigError{"batch size must be positive"};
  if (cfg.epochs < 1) throw ConfigError{"epoch count must be positive"};
  if (cfg.mc_samples < 2) throw ConfigError{"mc_samples must be at least 2"};

  const auto sched = make_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end);
  MlpArch arch{data.dim(), cfg.hidden_width, cfg.hidden_layers};
  MlpNoiseNet net(arch, derive_seed(cfg.seed, "init"));

  const Eigen::MatrixXd Xn = data.normalized_designs();
  const Eigen::VectorXd yn = data.normalized_scores();
  const int n = data.size();

  // Support queries of training rows never change; fetch them once.
  Eigen::VectorXd d_all(n), mu_nn_all(n);
  const bool need_prox = cfg.lambda2 != 0.0;
  if (need_prox) {
    for (int i = 0; i < n; ++i) {
      const SupportQuery q = index.query(Xn.row(i).transpose());
      d_all[i] = q.d;
      mu_nn_all[i] = q.neighbor_mean;
    }
  }

  const LossSettings settings = cfg.loss_settings();
  AdamOptimizer adam(arch.param_count(), cfg.learning_rate);
  Eigen::VectorXd grad(arch.param_count());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result{Surrogate{sched, net, data.norm()}, {}};
  MlpNoiseNet& live = result.surrogate.net();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng shuffle_rng(derive_seed(cfg.seed, "shuffle", {static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(order);

    LossParts epoch_sum;
    int batches = 0;
    for (int begin = 0; begin < n; begin += cfg.batch_size) {
      const int size = std::min(cfg.batch_size, n - begin);
      std::vector<int> rows(order.begin() + begin, order.begin() + begin + size);

      Eigen::MatrixXd bx(size, data.dim());
      Eigen::VectorXd by(size), bd(size), bmu(size);
      for (int i = 0; i < size; ++i) {
        bx.row(i) = Xn.row(rows[i]);
        by[i] = yn[rows[i]];
        bd[i] = need_prox ? d_all[rows[i]] : 0.0;
        bmu[i] = need_prox ? mu_nn_all[rows[i]] : 0.0;
      }

      const auto e = static_cast<std::uint64_t>(epoch);
      const auto s = static_cast<std::uint64_t>(batches);
      const StepPlan plan = make_step_plan(
          rows, yn, cfg.timesteps, cfg.mc_samples, cfg.rank_pairs,
          derive_seed(cfg.seed, "noise", {e, s}), derive_seed(cfg.seed, "mc", {e, s}),
          derive_seed(cfg.seed, "pairs", {e, s}));

      grad.setZero();
      const LossParts parts =
          eval_losses_grad(live, sched, bx, by, bd, bmu, plan, settings, 1.0,
                           cfg.lambda1, cfg.lambda2, grad);
      const double total = parts.total(cfg.lambda1, cfg.lambda2);
      if (!std::isfinite(total)) {
        throw TrainingDiverged(epoch, "non-finite loss at epoch " +
                                          std::to_string(epoch) + " (diff=" +
                                          std::to_string(parts.diff) + ")");
      }

      adam.step(live.params(), grad);
      epoch_sum.diff += parts.diff;
      epoch_sum.calib += parts.calib;
      epoch_sum.prox += parts.prox;
      ++batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.diff = epoch_sum.diff / batches;
    stats.calib = epoch_sum.calib / batches;
    stats.prox = epoch_sum.prox / batches;
    stats.total = stats.diff + cfg.lambda1 * stats.calib + cfg.lambda2 * stats.prox;
    stats.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(stats);
  }

  return result;
}

}  // namespace spade
