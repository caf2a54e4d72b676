#ifndef SPADE_SEARCH_HPP
#define SPADE_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "spade/acquisition.hpp"
#include "spade/support.hpp"
#include "spade/surrogate.hpp"

namespace spade {

struct GAConfig {
  int population = 128;
  int elites = 64;
  int generations = 100;
  double mutation_start = 0.12;
  double mutation_end = 0.02;
  std::uint64_t seed = 0;
};

// A scored member of the final population. The design is reported in raw
// space (canonically re-encoded for discrete tasks); stats are in normalized
// score units, and acq is the configured acquisition applied to stats.
struct Candidate {
  Design design;
  double acq = 0.0;
  PredictiveStats stats;
};

// The `size` highest-scoring dataset designs, ties broken by row index.
std::vector<Design> init_population(const Dataset& data, int size, std::uint64_t seed);

// Indices sorted by value descending; equal values keep their insertion order.
std::vector<int> stable_rank_desc(const std::vector<double>& values);

// Optional per-generation telemetry filled by evolve.
struct EvolveTrace {
  std::vector<double> best_acq;
};

// Linear decay from mutation_start to mutation_end across generations.
double mutation_sigma(const GAConfig& cfg, int gen);

// Mutation-only elitist search maximizing the acquisition, Candidates are
// scored with fresh Monte-Carlo noise each generation from per-slot streams,
// so serial and parallel scoring agree bit for bit. Mutation acts in
// normalized design space; discrete designs are decoded and re-encoded
// before every surrogate evaluation. Returns the final population sorted by
// acquisition (stable, so ties keep insertion order).
std::vector<Candidate> evolve(const Surrogate& surrogate, const SupportIndex& index,
                              const AcquisitionConfig& acq_cfg, const GAConfig& ga_cfg,
                              const Dataset& data, const DiscreteCodec* codec = nullptr,
                              EvolveTrace* trace = nullptr);

// Same search against a bare noise model and schedule (the surrogate variant
// delegates here); scores stay in the normalized space of `data`.
std::vector<Candidate> evolve(const NoiseModel& net, const VarianceSchedule& sched,
                              const SupportIndex& index,
                              const AcquisitionConfig& acq_cfg, const GAConfig& ga_cfg,
                              const Dataset& data, const DiscreteCodec* codec = nullptr,
                              EvolveTrace* trace = nullptr);

// Top `budget` designs from a ranked population with exact duplicates
// removed; later ranks backfill. unique_found (if given) reports how many
// distinct designs were available.
std::vector<int> select_proposal_indices(const std::vector<Candidate>& ranked,
                                         int budget, int* unique_found = nullptr);

std::vector<Design> select_proposals(const std::vector<Candidate>& ranked, int budget,
                                     int* unique_found = nullptr);

// evolve + select_proposals.
std::vector<Design> propose(const Surrogate& surrogate, const SupportIndex& index,
                            const AcquisitionConfig& acq_cfg, const GAConfig& ga_cfg,
                            const Dataset& data, int budget,
                            const DiscreteCodec* codec = nullptr,
                            int* unique_found = nullptr);

}  // namespace spade

#endif  // SPADE_SEARCH_HPP
