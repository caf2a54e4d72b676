#ifndef SPADE_SURROGATE_HPP
#define SPADE_SURROGATE_HPP

#include <cstdint>
#include <string>

#include "spade/dataset.hpp"
#include "spade/network.hpp"
#include "spade/sampler.hpp"
#include "spade/schedule.hpp"

namespace spade {

// A trained conditional score model: noise network plus the schedule and
// normalization statistics it was fitted under. This is the checkpoint unit.
class Surrogate {
 public:
  Surrogate(VarianceSchedule sched, MlpNoiseNet net, NormStats norm)
      : sched_(std::move(sched)), net_(std::move(net)), norm_(std::move(norm)) {}

  const VarianceSchedule& schedule() const { return sched_; }
  const MlpNoiseNet& net() const { return net_; }
  MlpNoiseNet& net() { return net_; }
  const NormStats& norm() const { return norm_; }
  int design_dim() const { return net_.design_dim(); }

  Design normalize_x(const Design& x) const;
  double denormalize_y(double y) const { return y * norm_.y_std + norm_.y_mean; }

  // One deterministic sample of the predictive distribution for a raw-space
  // design; the initial noise comes from the seeded stream, the output is
  // mapped back to raw score units.
  double ddim_sample(const Design& x_raw, int steps, std::uint64_t noise_seed) const;

  // Mean and unbiased std of M independent samples (raw score units).
  PredictiveStats predictive_stats(const Design& x_raw, int mc_samples, int steps,
                                   std::uint64_t seed) const;

  // Batched normalized-space sampling used by the trainer and the search:
  // every design gets `mc_samples` chains run in lockstep; row-major blocks
  // of the returned matrix hold the samples of one design.
  Eigen::MatrixXd sample_matrix_normalized(const Eigen::MatrixXd& designs_normalized,
                                           int mc_samples, int steps,
                                           const Eigen::MatrixXd& initial_noise) const;

  PredictiveStats stats_normalized(const Design& x_normalized, int mc_samples,
                                   int steps, std::uint64_t seed) const;

 private:
  VarianceSchedule sched_;
  MlpNoiseNet net_;
  NormStats norm_;
};

// Versioned JSON checkpoint with architecture, normalization, schedule
// parameters, and the flat parameter vector. train_seconds is carried as
// metadata so downstream reports can echo the phase timing.
void save_surrogate(const Surrogate& s, const std::string& path,
                    double train_seconds = 0.0);

struct LoadedSurrogate {
  Surrogate surrogate;
  double train_seconds = 0.0;
};

LoadedSurrogate load_surrogate(const std::string& path);

}  // namespace spade

#endif  // SPADE_SURROGATE_HPP
