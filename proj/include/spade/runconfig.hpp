#ifndef SPADE_RUNCONFIG_HPP
#define SPADE_RUNCONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "spade/benchlab.hpp"

namespace spade {

// Whole-run configuration: one JSON object per module section. Every field
// has a default, so an empty file (or no file) is a valid run; unknown keys
// are rejected to catch typos. CLI flags override the file.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = ".";

  std::string task_name = "beale";
  TaskParams task_params;

  std::string data_path;    // defaults to <out>/dataset.csv
  std::string data_format = "csv";
  int data_n = 500;
  double exclusion_q = 0.2;

  int knn_k = 10;

  TrainConfig train;
  std::string checkpoint_path;  // defaults to <out>/checkpoint.json

  AcquisitionConfig acquisition;
  GAConfig ga;
  int budget = 128;

  int ablate_seeds = 8;
  int ablate_threads = 0;  // 0 = hardware concurrency

  int surface_resolution = 64;
  int surface_mc_samples = 64;

  std::string resolved_data_path() const;
  std::string resolved_checkpoint_path() const;

  FileFormat file_format() const;
  PipelineConfig pipeline_config() const;
};

RunConfig load_run_config(const std::string& path);  // ConfigError on unknown keys
RunConfig run_config_from_json_text(const std::string& text, const std::string& origin);
std::string run_config_to_json(const RunConfig& cfg);

}  // namespace spade

#endif  // SPADE_RUNCONFIG_HPP
