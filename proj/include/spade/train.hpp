#ifndef SPADE_TRAIN_HPP
#define SPADE_TRAIN_HPP

#include <cstdint>
#include <vector>

#include "spade/losses.hpp"
#include "spade/support.hpp"
#include "spade/surrogate.hpp"

namespace spade {

struct TrainConfig {
  double lambda1 = 0.4;  // calibration weight
  double lambda2 = 1.0;  // proximity weight

  int rank_pairs = 32;
  double rank_temperature = 1.0;
  double prox_a = 0.02, prox_a0 = 0.02, prox_a1 = 0.005;
  int mc_samples = 8;
  int ddim_steps = 10;

  int epochs = 100;
  int batch_size = 64;
  double learning_rate = 1e-3;

  int timesteps = 100;
  double beta_start = 1e-4;
  double beta_end = 2e-2;

  int hidden_width = 256;
  int hidden_layers = 3;

  std::uint64_t seed = 0;

  LossSettings loss_settings() const {
    return {rank_temperature, prox_a, prox_a0, prox_a1, mc_samples, ddim_steps};
  }
};

struct EpochStats {
  int epoch = 0;
  double diff = 0.0, calib = 0.0, prox = 0.0, total = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  Surrogate surrogate;
  std::vector<EpochStats> log;
};

// Adam with the usual 0.9/0.999 decay rates and bias correction.
class AdamOptimizer {
 public:
  AdamOptimizer(int param_count, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);
  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  long steps_ = 0;
  Eigen::VectorXd m_, v_;
};

// Mini-batch training of the total objective
//   L = L_diff + lambda1 * L_calib + lambda2 * L_prox.
// The index must be built over the same dataset. The per-row support
// queries are precomputed once since the index is immutable. Throws
// TrainingDiverged when any loss turns non-finite.
TrainResult train(const Dataset& data, const SupportIndex& index,
                  const TrainConfig& cfg);

}  // namespace spade

#endif  // SPADE_TRAIN_HPP
