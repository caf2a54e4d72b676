// Command-line front end: config-driven data generation, surrogate training,
// acquisition search, ablation matrix, and surface export. One master seed
// derives every random stream, so reruns reproduce outputs byte for byte
// (wall-clock timings are kept in sidecar files for exactly that reason).

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "spade/benchlab.hpp"
#include "spade/num_io.hpp"
#include "spade/rng.hpp"
#include "spade/runconfig.hpp"

namespace {

using nlohmann::json;
using namespace spade;

std::string join_out(const RunConfig& cfg, const std::string& file) {
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError{"cannot write " + path};
  out << text;
  if (!out) throw IoError{"failed writing " + path};
}

json report_json(const EvalReport& r) {
  return json{{"task", r.task},
              {"seed", r.seed},
              {"budget", r.budget},
              {"d_best", r.d_best},
              {"max_norm_score", r.max_norm_score},
              {"median_norm_score", r.median_norm_score},
              {"unique_proposals", r.unique_proposals},
              {"raw_scores", r.raw_scores},
              {"norm_scores", r.norm_scores}};
}

Task task_from_config(const RunConfig& cfg) {
  return make_task(cfg.task_name, cfg.task_params);
}

void cmd_gen_data(const RunConfig& cfg) {
  const Task task = task_from_config(cfg);
  const Dataset data = gen_offline_dataset(task, cfg.data_n, cfg.seed, cfg.exclusion_q);
  write_dataset_csv(data.designs(), data.scores(), cfg.resolved_data_path());

  const json meta = {{"task", cfg.task_name}, {"seed", cfg.seed},
                     {"n", cfg.data_n},      {"exclusion_q", cfg.exclusion_q},
                     {"rows", data.size()},  {"dim", data.dim()}};
  write_text(join_out(cfg, "dataset_meta.json"), meta.dump(2) + "\n");
  std::cout << "wrote " << data.size() << " rows to " << cfg.resolved_data_path() << "\n";
}

void cmd_train(const RunConfig& cfg) {
  const Dataset data = load_dataset(cfg.resolved_data_path(), cfg.file_format());
  const SupportIndex index(data, cfg.knn_k);

  TrainConfig train_cfg = cfg.train;
  train_cfg.seed = derive_seed(cfg.seed, "train");

  const auto start = std::chrono::steady_clock::now();
  const TrainResult result = train(data, index, train_cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  save_surrogate(result.surrogate, cfg.resolved_checkpoint_path(), seconds);

  std::ofstream log(join_out(cfg, "train_log.jsonl"));
  if (!log) throw IoError{"cannot write train log"};
  for (const auto& e : result.log) {
    log << json{{"epoch", e.epoch}, {"diff", e.diff},   {"calib", e.calib},
                {"prox", e.prox},   {"total", e.total}, {"seconds", e.seconds}}
               .dump()
        << "\n";
  }
  std::cout << "trained " << train_cfg.epochs << " epochs in " << seconds
            << " s; checkpoint at " << cfg.resolved_checkpoint_path() << "\n";
}

void cmd_optimize(const RunConfig& cfg) {
  const Task task = task_from_config(cfg);
  const Dataset data = load_dataset(cfg.resolved_data_path(), cfg.file_format());
  const LoadedSurrogate loaded = load_surrogate(cfg.resolved_checkpoint_path());
  if (loaded.surrogate.design_dim() != data.dim()) {
    throw CheckpointError{"checkpoint dimension " +
                          std::to_string(loaded.surrogate.design_dim()) +
                          " does not match dataset dimension " +
                          std::to_string(data.dim())};
  }
  const SupportIndex index(data, cfg.knn_k);

  AcquisitionConfig acq_cfg = cfg.acquisition;
  acq_cfg.y_best = data.normalize_y(data.y_max());
  GAConfig ga_cfg = cfg.ga;
  ga_cfg.seed = derive_seed(cfg.seed, "search");

  const auto start = std::chrono::steady_clock::now();
  const auto ranked = evolve(loaded.surrogate, index, acq_cfg, ga_cfg, data,
                             task.discrete ? &*task.codec : nullptr);
  int unique = 0;
  const auto chosen = select_proposal_indices(ranked, cfg.budget, &unique);

  std::vector<Design> proposals;
  for (int i : chosen) proposals.push_back(ranked[i].design);
  EvalReport report = evaluate(task, proposals, data);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  report.seed = cfg.seed;
  report.unique_proposals = unique;
  report.train_seconds = loaded.train_seconds;
  report.optimize_seconds = seconds;

  std::ofstream prop(join_out(cfg, "proposals.csv"));
  if (!prop) throw IoError{"cannot write proposals"};
  for (int j = 0; j < data.dim(); ++j) prop << 'x' << j << ',';
  prop << "acq,mu,sigma\n";
  for (int i : chosen) {
    const Candidate& c = ranked[i];
    for (Eigen::Index j = 0; j < c.design.size(); ++j) {
      prop << format_g17(c.design[j]) << ',';
    }
    prop << format_g17(c.acq) << ',' << format_g17(c.stats.mean) << ','
         << format_g17(c.stats.stddev) << '\n';
  }

  write_text(join_out(cfg, "report.json"), report_json(report).dump(2) + "\n");
  write_text(join_out(cfg, "timings.json"),
             json{{"train_seconds", report.train_seconds},
                  {"optimize_seconds", report.optimize_seconds}}
                     .dump(2) +
                 "\n");
  std::cout << "max_norm_score " << report.max_norm_score << " (d_best "
            << report.d_best << ") over " << report.budget << " proposals\n";
}

void cmd_ablate(const RunConfig& cfg) {
  if (cfg.ablate_seeds < 2) throw ConfigError{"ablation needs at least 2 seeds"};
  const Task task = task_from_config(cfg);

  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < cfg.ablate_seeds; ++i) seeds.push_back(cfg.seed + i);

  const auto rows = ablation_run(task, cfg.pipeline_config(), seeds, cfg.ablate_threads);

  json table = json::array();
  for (const auto& row : rows) {
    table.push_back({{"variant", row.variant},
                     {"mean", row.mean},
                     {"stderr", row.stderr_},
                     {"seeds", row.seeds},
                     {"scores", row.scores}});
  }
  write_text(join_out(cfg, "ablation.json"), table.dump(2) + "\n");
  for (const auto& row : rows) {
    std::cout << row.variant << ": " << row.mean << " +- " << row.stderr_ << "\n";
  }
}

void cmd_surface(const RunConfig& cfg) {
  const Task task = task_from_config(cfg);
  const Dataset data = load_dataset(cfg.resolved_data_path(), cfg.file_format());
  const LoadedSurrogate loaded = load_surrogate(cfg.resolved_checkpoint_path());
  if (loaded.surrogate.design_dim() != data.dim()) {
    throw CheckpointError{"checkpoint does not match the dataset dimension"};
  }
  const SupportIndex index(data, cfg.knn_k);
  surface_grid(task, loaded.surrogate, index, cfg.surface_resolution,
               cfg.surface_mc_samples, cfg.acquisition.ddim_steps,
               derive_seed(cfg.seed, "surface"), join_out(cfg, "surface.csv"));
  std::cout << "wrote " << cfg.surface_resolution << "x" << cfg.surface_resolution
            << " grid to " << join_out(cfg, "surface.csv") << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Offline black-box optimization with a diffusion surrogate"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out_override;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed", seed_override, "master seed (overrides config)");
  app.add_option("--out", out_override, "output directory (overrides config)");

  auto* gen = app.add_subcommand("gen-data", "generate an offline dataset");
  auto* tr = app.add_subcommand("train", "train the surrogate");
  auto* opt = app.add_subcommand("optimize", "search and evaluate proposals");
  auto* abl = app.add_subcommand("ablate", "run the four-variant ablation matrix");
  auto* surf = app.add_subcommand("surface", "export a surrogate surface grid");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed_override) cfg.seed = *seed_override;
    if (out_override) cfg.out_dir = *out_override;
    if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

    if (gen->parsed()) cmd_gen_data(cfg);
    if (tr->parsed()) cmd_train(cfg);
    if (opt->parsed()) cmd_optimize(cfg);
    if (abl->parsed()) cmd_ablate(cfg);
    if (surf->parsed()) cmd_surface(cfg);
  } catch (const spade::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
