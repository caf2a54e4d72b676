#include "spade/benchlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include "spade/num_io.hpp"
#include "spade/rng.hpp"

namespace spade {

double beale(const Design& x) {
  if (x.size() != 2) throw DimError{"beale expects a 2-vector"};
  const double x1 = x[0], x2 = x[1];
  const double t1 = 1.5 - x1 + x1 * x2;
  const double t2 = 2.25 - x1 + x1 * x2 * x2;
  const double t3 = 2.625 - x1 + x1 * x2 * x2 * x2;
  return t1 * t1 + t2 * t2 + t3 * t3;
}

double zakharov(const Design& x) {
  double sq = 0.0, lin = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sq += x[i] * x[i];
    lin += 0.5 * static_cast<double>(i + 1) * x[i];
  }
  return sq + lin * lin + lin * lin * lin * lin;
}

double toy_discrete_oracle(const std::vector<int>& tokens, const Eigen::MatrixXd& weights) {
  if (static_cast<Eigen::Index>(tokens.size()) != weights.rows()) {
    throw CodecError{"token count does not match the weight matrix"};
  }
  double score = 0.0;
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const int tok = tokens[pos];
    if (tok < 0 || tok >= weights.cols()) {
      throw CodecError{"token " + std::to_string(tok) + " out of range"};
    }
    score += weights(static_cast<Eigen::Index>(pos), tok);
  }
  return score;
}

Task make_task(const std::string& name, const TaskParams& params) {
  Task task;
  task.name = name;
  if (name == "beale") {
    task.dim = 2;
    task.lower = Eigen::VectorXd::Constant(2, -4.5);
    task.upper = Eigen::VectorXd::Constant(2, 4.5);
    task.raw = beale;
    task.oracle = [](const Design& x) { return -beale(x); };
  } else if (name == "zakharov") {
    if (params.dim < 1) throw ConfigError{"zakharov needs dim >= 1"};
    task.dim = params.dim;
    task.lower = Eigen::VectorXd::Constant(params.dim, -5.0);
    task.upper = Eigen::VectorXd::Constant(params.dim, 10.0);
    task.raw = zakharov;
    task.oracle = [](const Design& x) { return -zakharov(x); };
  } else if (name == "toy-discrete") {
    if (params.length < 1 || params.vocab < 2) {
      throw ConfigError{"toy-discrete needs length >= 1 and vocab >= 2"};
    }
    task.discrete = true;
    task.codec = DiscreteCodec{params.vocab, params.length};
    task.dim = task.codec->dim();
    Rng rng(derive_seed(params.task_seed, "toy-weights"));
    Eigen::MatrixXd w(params.length, params.vocab);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = rng.uniform();
    }
    task.weights = w;
    const DiscreteCodec codec = *task.codec;
    task.oracle = [w, codec](const Design& x) {
      return toy_discrete_oracle(codec.decode(x), w);
    };
  } else {
    throw ConfigError{"unknown task '" + name +
                      "' (known tasks: beale, zakharov, toy-discrete)"};
  }
  return task;
}

double toy_discrete_optimum(const Task& task) {
  if (!task.discrete) throw Unsupported{"optimum enumeration is for discrete tasks"};
  const int length = task.codec->length;
  const int vocab = task.codec->vocab;
  double count = std::pow(static_cast<double>(vocab), length);
  if (count > 65536.0) throw ConfigError{"sequence space too large to enumerate"};

  std::vector<int> tokens(length, 0);
  double best = -std::numeric_limits<double>::infinity();
  while (true) {
    best = std::max(best, toy_discrete_oracle(tokens, task.weights));
    int pos = 0;
    while (pos < length && ++tokens[pos] == vocab) tokens[pos++] = 0;
    if (pos == length) break;
  }
  return best;
}

Dataset gen_offline_dataset(const Task& task, int n, std::uint64_t seed,
                            double exclusion_q) {
  if (n < 2) throw ConfigError{"need at least 2 samples"};
  if (exclusion_q < 0.0 || exclusion_q >= 1.0) {
    throw ConfigError{"exclusion quantile must lie in [0, 1)"};
  }

  Rng rng(derive_seed(seed, "gen-data"));
  Eigen::MatrixXd designs(n, task.dim);
  Eigen::VectorXd scores(n);
  for (int i = 0; i < n; ++i) {
    Design x(task.dim);
    if (task.discrete) {
      std::vector<int> tokens(task.codec->length);
      for (auto& t : tokens) t = rng.index(task.codec->vocab);
      x = task.codec->encode(tokens);
    } else {
      for (int j = 0; j < task.dim; ++j) x[j] = rng.uniform(task.lower[j], task.upper[j]);
    }
    designs.row(i) = x.transpose();
    scores[i] = task.oracle(x);
  }

  const int drop = static_cast<int>(std::floor(exclusion_q * n + 1e-12));
  if (drop == 0) return Dataset::from_rows(std::move(designs), std::move(scores));

  std::vector<double> sorted(scores.data(), scores.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double threshold = sorted[drop - 1];  // smallest dropped score

  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    if (scores[i] < threshold) keep.push_back(i);
  }
  if (keep.size() < 2) throw ConfigError{"exclusion left fewer than 2 rows"};

  Eigen::MatrixXd kept_x(keep.size(), task.dim);
  Eigen::VectorXd kept_y(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    kept_x.row(static_cast<Eigen::Index>(i)) = designs.row(keep[i]);
    kept_y[static_cast<Eigen::Index>(i)] = scores[keep[i]];
  }
  return Dataset::from_rows(std::move(kept_x), std::move(kept_y));
}

double normalized_score(double y, double y_min, double y_max) {
  if (!(y_max > y_min)) throw MetricError{"undefined metric: y_max <= y_min"};
  return (y - y_min) / (y_max - y_min);
}

EvalReport evaluate(const Task& task, const std::vector<Design>& proposals,
                    const Dataset& data) {
  if (proposals.empty()) throw ConfigError{"no proposals to evaluate"};

  EvalReport report;
  report.task = task.name;
  report.budget = static_cast<int>(proposals.size());
  report.d_best = normalized_score(data.y_max(), data.y_min(), data.y_max());
  for (const auto& x : proposals) {
    const double y = task.oracle(x);
    report.raw_scores.push_back(y);
    report.norm_scores.push_back(normalized_score(y, data.y_min(), data.y_max()));
  }

  std::vector<double> sorted = report.norm_scores;
  std::sort(sorted.begin(), sorted.end());
  report.max_norm_score = sorted.back();
  const std::size_t n = sorted.size();
  report.median_norm_score = n % 2 == 1
                                 ? sorted[n / 2]
                                 : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return report;
}

EvalReport run_pipeline(const Task& task, const PipelineConfig& cfg, std::uint64_t seed) {
  const Dataset data = gen_offline_dataset(task, cfg.data_n, seed, cfg.exclusion_q);
  const SupportIndex index(data, cfg.knn_k);

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = derive_seed(seed, "train");

  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult trained = train(data, index, train_cfg);
  const auto t1 = std::chrono::steady_clock::now();

  AcquisitionConfig acq_cfg = cfg.acquisition;
  acq_cfg.y_best = data.normalize_y(data.y_max());
  GAConfig ga_cfg = cfg.ga;
  ga_cfg.seed = derive_seed(seed, "search");

  int unique = 0;
  const auto proposals =
      propose(trained.surrogate, index, acq_cfg, ga_cfg, data, cfg.budget,
              task.discrete ? &*task.codec : nullptr, &unique);
  const auto t2 = std::chrono::steady_clock::now();

  EvalReport report = evaluate(task, proposals, data);
  report.seed = seed;
  report.unique_proposals = unique;
  report.train_seconds = std::chrono::duration<double>(t1 - t0).count();
  report.optimize_seconds = std::chrono::duration<double>(t2 - t1).count();
  return report;
}

std::vector<AblationRow> ablation_run(const Task& task, const PipelineConfig& cfg,
                                      const std::vector<std::uint64_t>& seeds,
                                      int threads) {
  if (seeds.size() < 2) throw ConfigError{"ablation needs at least 2 seeds"};

  struct Variant {
    const char* name;
    double lambda1, lambda2;
  };
  const std::vector<Variant> variants = {
      {"base", 0.0, 0.0},
      {"no_prox", cfg.train.lambda1, 0.0},
      {"no_calib", 0.0, cfg.train.lambda2},
      {"full", cfg.train.lambda1, cfg.train.lambda2},
  };

  struct Job {
    int variant, seed_idx;
  };
  std::vector<Job> jobs;
  for (int v = 0; v < static_cast<int>(variants.size()); ++v) {
    for (int s = 0; s < static_cast<int>(seeds.size()); ++s) jobs.push_back({v, s});
  }

  std::vector<std::vector<double>> scores(variants.size(),
                                          std::vector<double>(seeds.size(), 0.0));
  std::mutex next_mutex;
  std::size_t next_job = 0;
  auto worker = [&]() {
    while (true) {
      std::size_t mine;
      {
        std::lock_guard<std::mutex> lock(next_mutex);
        if (next_job == jobs.size()) return;
        mine = next_job++;
      }
      const Job job = jobs[mine];
      PipelineConfig run_cfg = cfg;
      run_cfg.train.lambda1 = variants[job.variant].lambda1;
      run_cfg.train.lambda2 = variants[job.variant].lambda2;
      const EvalReport report = run_pipeline(task, run_cfg, seeds[job.seed_idx]);
      scores[job.variant][job.seed_idx] = report.max_norm_score;
    }
  };

  int worker_count = threads > 0 ? threads
                                 : static_cast<int>(std::thread::hardware_concurrency());
  worker_count = std::max(1, std::min<int>(worker_count, static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int i = 0; i < worker_count; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<AblationRow> rows;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    AblationRow row;
    row.variant = variants[v].name;
    row.scores = scores[v];
    row.seeds = seeds;
    const double n = static_cast<double>(seeds.size());
    double mean = 0.0;
    for (double s : row.scores) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : row.scores) var += (s - mean) * (s - mean);
    var /= (n - 1.0);
    row.mean = mean;
    row.stderr_ = std::sqrt(var / n);
    rows.push_back(std::move(row));
  }
  return rows;
}

void surface_grid(const Task& task, const Surrogate& surrogate,
                  const SupportIndex& index, int resolution, int mc_samples,
                  int ddim_steps, std::uint64_t seed, const std::string& path) {
  if (task.discrete || task.dim != 2) {
    throw Unsupported{"surface export needs a 2D continuous task"};
  }
  if (resolution < 2) throw ConfigError{"grid resolution must be at least 2"};

  std::ofstream out(path);
  if (!out) throw IoError{"cannot write " + path};
  out << "x1,x2,true,mu,sigma,d\n";

  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      Design x(2);
      x[0] = task.lower[0] + (task.upper[0] - task.lower[0]) * i / (resolution - 1);
      x[1] = task.lower[1] + (task.upper[1] - task.lower[1]) * j / (resolution - 1);

      const Design xn = surrogate.normalize_x(x);
      const PredictiveStats stats = surrogate.stats_normalized(
          xn, mc_samples, ddim_steps,
          derive_seed(seed, "surface", {static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j)}));
      const SupportQuery q = index.query(xn);

      out << format_g17(x[0]) << ',' << format_g17(x[1]) << ','
          << format_g17(task.raw(x)) << ','
          << format_g17(surrogate.denormalize_y(stats.mean)) << ','
          << format_g17(stats.stddev * surrogate.norm().y_std) << ','
          << format_g17(q.d) << '\n';
    }
  }
  if (!out) throw IoError{"failed writing " + path};
}

}  // namespace spade
