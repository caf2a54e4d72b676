#include "spade/search.hpp"

#include "spade/losses.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "spade/rng.hpp"

namespace spade {

std::vector<Design> init_population(const Dataset& data, int size, std::uint64_t seed) {
  (void)seed;  // selection is deterministic; the signature mirrors the other ops
  if (size < 1 || size > data.size()) {
    throw ConfigError{"population size " + std::to_string(size) +
                      " outside [1, N=" + std::to_string(data.size()) + "]"};
  }
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return data.scores()[a] > data.scores()[b];
  });
  std::vector<Design> out;
  out.reserve(size);
  for (int i = 0; i < size; ++i) out.push_back(data.designs().row(order[i]).transpose());
  return out;
}

double mutation_sigma(const GAConfig& cfg, int gen) {
  if (gen < 0 || gen >= cfg.generations) {
    throw ConfigError{"generation index out of range"};
  }
  if (cfg.generations == 1) return cfg.mutation_start;
  const double frac = static_cast<double>(gen) / (cfg.generations - 1);
  return cfg.mutation_start + frac * (cfg.mutation_end - cfg.mutation_start);
}

std::vector<int> stable_rank_desc(const std::vector<double>& values) {
  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return values[a] > values[b]; });
  return order;
}

namespace {

void validate_ga(const GAConfig& cfg, const Dataset& data) {
  if (cfg.population < 1 || cfg.population > data.size()) {
    throw ConfigError{"population must lie in [1, N]"};
  }
  if (cfg.elites < 1 || cfg.elites > cfg.population) {
    throw ConfigError{"elites must lie in [1, population]"};
  }
  if (cfg.generations < 1) throw ConfigError{"need at least one generation"};
  if (!(cfg.mutation_start >= cfg.mutation_end) || cfg.mutation_end < 0.0) {
    throw ConfigError{"mutation scale must decay and stay nonnegative"};
  }
}

// Canonical normalized representation used for surrogate evaluation: for
// discrete designs the logits are decoded to tokens and re-encoded, so the
// model only ever sees the encoding it was trained on.
Design canonical_normalized(const Design& xn, const Dataset& data,
                            const DiscreteCodec* codec) {
  if (codec == nullptr) return xn;
  const Design raw = data.denormalize_x(xn);
  return data.normalize_x(codec->encode(codec->decode(raw)));
}

}  // namespace

std::vector<Candidate> evolve(const NoiseModel& net, const VarianceSchedule& sched,
                              const SupportIndex& index,
                              const AcquisitionConfig& acq_cfg, const GAConfig& ga_cfg,
                              const Dataset& data, const DiscreteCodec* codec,
                              EvolveTrace* trace) {
  validate_ga(ga_cfg, data);
  if (acq_cfg.mc_samples < 2) throw ConfigError{"mc_samples must be at least 2"};

  const int pop_size = ga_cfg.population;
  std::vector<Design> population;
  population.reserve(pop_size);
  for (const auto& x : init_population(data, pop_size, ga_cfg.seed)) {
    population.push_back(data.normalize_x(x));
  }

  const auto grid = ddim_grid(sched.timesteps, acq_cfg.ddim_steps);
  std::vector<PredictiveStats> stats(pop_size);
  std::vector<double> acq(pop_size);
  std::vector<Design> canon(pop_size);
  std::vector<int> order;

  if (trace != nullptr) trace->best_acq.clear();

  for (int gen = 0; gen < ga_cfg.generations; ++gen) {
    // Score every member with its own derived noise stream.
    Eigen::MatrixXd designs(pop_size, data.dim());
    Eigen::MatrixXd noise(pop_size, acq_cfg.mc_samples);
    for (int i = 0; i < pop_size; ++i) {
      canon[i] = canonical_normalized(population[i], data, codec);
      designs.row(i) = canon[i].transpose();
      Rng rng(derive_seed(ga_cfg.seed, "ga-score",
                          {static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(i)}));
      for (int m = 0; m < acq_cfg.mc_samples; ++m) noise(i, m) = rng.normal();
    }
    const Eigen::MatrixXd samples = mc_sample_matrix(net, sched, designs, grid, noise);

    for (int i = 0; i < pop_size; ++i) {
      stats[i] = stats_from_samples(samples.row(i).transpose());
      if (acq_cfg.use_support_transform) {
        stats[i] = apply_support_transform(stats[i], index.query(canon[i]), acq_cfg);
      }
      acq[i] = acquisition_value(stats[i], acq_cfg);
    }

    order = stable_rank_desc(acq);
    if (trace != nullptr) trace->best_acq.push_back(acq[order[0]]);

    if (gen + 1 == ga_cfg.generations) break;

    // Elites survive unchanged; the rest are mutated copies of random elites.
    std::vector<Design> next(pop_size);
    for (int slot = 0; slot < ga_cfg.elites; ++slot) next[slot] = population[order[slot]];
    const double sigma = mutation_sigma(ga_cfg, gen);
    for (int slot = ga_cfg.elites; slot < pop_size; ++slot) {
      Rng rng(derive_seed(ga_cfg.seed, "ga-mutate",
                          {static_cast<std::uint64_t>(gen), static_cast<std::uint64_t>(slot)}));
      Design child = next[rng.index(ga_cfg.elites)];
      for (Eigen::Index j = 0; j < child.size(); ++j) child[j] += sigma * rng.normal();
      next[slot] = std::move(child);
    }
    population = std::move(next);
  }

  std::vector<Candidate> ranked;
  ranked.reserve(pop_size);
  for (int rank = 0; rank < pop_size; ++rank) {
    const int i = order[rank];
    Candidate c;
    c.design = data.denormalize_x(canon[i]);
    if (codec != nullptr) c.design = codec->encode(codec->decode(c.design));
    c.acq = acq[i];
    c.stats = stats[i];
    ranked.push_back(std::move(c));
  }
  return ranked;
}

std::vector<Candidate> evolve(const Surrogate& surrogate, const SupportIndex& index,
                              const AcquisitionConfig& acq_cfg, const GAConfig& ga_cfg,
                              const Dataset& data, const DiscreteCodec* codec,
                              EvolveTrace* trace) {
  return evolve(surrogate.net(), surrogate.schedule(), index, acq_cfg, ga_cfg, data,
                codec, trace);
}

std::vector<int> select_proposal_indices(const std::vector<Candidate>& ranked,
                                         int budget, int* unique_found) {
  if (budget < 1 || budget > static_cast<int>(ranked.size())) {
    throw ConfigError{"budget must lie in [1, population]"};
  }
  std::vector<int> out;
  out.reserve(budget);
  for (int i = 0; i < static_cast<int>(ranked.size()); ++i) {
    const Design& x = ranked[i].design;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](int kept) {
      const Design& d = ranked[kept].design;
      return d.size() == x.size() && d == x;
    });
    if (duplicate) continue;
    out.push_back(i);
    if (static_cast<int>(out.size()) == budget) break;
  }
  if (unique_found != nullptr) *unique_found = static_cast<int>(out.size());
  return out;
}

std::vector<Design> select_proposals(const std::vector<Candidate>& ranked, int budget,
                                     int* unique_found) {
  std::vector<Design> out;
  for (int i : select_proposal_indices(ranked, budget, unique_found)) {
    out.push_back(ranked[i].design);
  }
  return out;
}

std::vector<Design> propose(const Surrogate& surrogate, const SupportIndex& index,
                            const AcquisitionConfig& acq_cfg, const GAConfig& ga_cfg,
                            const Dataset& data, int budget, const DiscreteCodec* codec,
                            int* unique_found) {
  if (budget > ga_cfg.population) {
    throw ConfigError{"budget exceeds the population size"};
  }
  return select_proposals(evolve(surrogate, index, acq_cfg, ga_cfg, data, codec), budget,
                          unique_found);
}

}  // namespace spade
