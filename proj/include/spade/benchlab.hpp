#ifndef SPADE_BENCHLAB_HPP
#define SPADE_BENCHLAB_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spade/dataset.hpp"
#include "spade/search.hpp"
#include "spade/surrogate.hpp"
#include "spade/train.hpp"

namespace spade {

// Raw benchmark surfaces in their standard minimization form.
double beale(const Design& x);
double zakharov(const Design& x);

struct TaskParams {
  int dim = 2;               // continuous dimension (zakharov)
  int length = 8;            // discrete positions
  int vocab = 4;             // discrete alphabet size
  std::uint64_t task_seed = 0;  // seeds the discrete weight matrix
};

// A synthetic ground-truth task. The oracle maximizes: continuous surfaces
// are negated, discrete designs are decoded and scored against a fixed
// position-weight matrix. `raw` is the pre-negation surface value and is
// only set for continuous tasks.
struct Task {
  std::string name;
  bool discrete = false;
  int dim = 0;
  std::optional<DiscreteCodec> codec;
  Eigen::VectorXd lower, upper;  // search box (continuous tasks)
  std::function<double(const Design&)> oracle;
  std::function<double(const Design&)> raw;
  Eigen::MatrixXd weights;  // position-weight matrix (discrete tasks)
};

// Known names: beale, zakharov, toy-discrete.
Task make_task(const std::string& name, const TaskParams& params = {});

double toy_discrete_oracle(const std::vector<int>& tokens, const Eigen::MatrixXd& weights);

// Best oracle value over all vocab^length sequences (enumeration is capped
// at 65536 sequences).
double toy_discrete_optimum(const Task& task);

// Uniform designs scored by the oracle, with the top q-quantile by score
// dropped so the optimum lies outside the data. Deterministic per seed.
Dataset gen_offline_dataset(const Task& task, int n, std::uint64_t seed,
                            double exclusion_q);

// (y - y_min) / (y_max - y_min); values above 1 mean the design beats
// everything in the dataset.
double normalized_score(double y, double y_min, double y_max);

struct EvalReport {
  std::string task;
  std::uint64_t seed = 0;
  int budget = 0;
  double max_norm_score = 0.0;
  double median_norm_score = 0.0;
  double d_best = 0.0;  // normalized score of the best training design
  std::vector<double> raw_scores, norm_scores;
  int unique_proposals = 0;
  double train_seconds = 0.0, optimize_seconds = 0.0;
};

EvalReport evaluate(const Task& task, const std::vector<Design>& proposals,
                    const Dataset& data);

// One full pipeline pass: generate data, train, search, evaluate.
struct PipelineConfig {
  TaskParams task_params;
  int data_n = 500;
  double exclusion_q = 0.2;
  int knn_k = 10;
  TrainConfig train;
  AcquisitionConfig acquisition;
  GAConfig ga;
  int budget = 128;
};

EvalReport run_pipeline(const Task& task, const PipelineConfig& cfg, std::uint64_t seed);

struct AblationRow {
  std::string variant;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::vector<double> scores;
  std::vector<std::uint64_t> seeds;
};

// The four-variant matrix (base, no_prox, no_calib, full) over paired seeds:
// within one seed everything except (lambda1, lambda2) is identical.
std::vector<AblationRow> ablation_run(const Task& task, const PipelineConfig& cfg,
                                      const std::vector<std::uint64_t>& seeds,
                                      int threads = 0);

// G x G grid over a 2D continuous task's box with columns
// x1,x2,true,mu,sigma,d. `true` is the pre-negation surface value; mu and
// sigma are reported in raw score units.
void surface_grid(const Task& task, const Surrogate& surrogate,
                  const SupportIndex& index, int resolution, int mc_samples,
                  int ddim_steps, std::uint64_t seed, const std::string& path);

}  // namespace spade

#endif  // SPADE_BENCHLAB_HPP
