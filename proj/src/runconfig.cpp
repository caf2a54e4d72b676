#include "spade/runconfig.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace spade {

namespace {

using nlohmann::json;

// Pulls a field if present, enforcing that every consumed key is known.
class Section {
 public:
  Section(const json& doc, const std::string& name) : name_(name) {
    if (doc.contains(name)) {
      if (!doc.at(name).is_object()) {
        throw ConfigError{"config section '" + name + "' must be an object"};
      }
      obj_ = doc.at(name);
    }
  }

  template <typename T>
  void get(const char* key, T& target) {
    seen_.insert(key);
    if (obj_.contains(key)) {
      try {
        target = obj_.at(key).get<T>();
      } catch (const json::exception&) {
        throw ConfigError{"config key '" + name_ + "." + key + "' has the wrong type"};
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) {
        throw ConfigError{"unknown config key '" + name_ + "." + key + "'"};
      }
    }
  }

 private:
  std::string name_;
  json obj_ = json::object();
  std::set<std::string> seen_;
};

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || dir == ".") return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

}  // namespace

std::string RunConfig::resolved_data_path() const {
  return data_path.empty() ? join_path(out_dir, "dataset.csv") : data_path;
}

std::string RunConfig::resolved_checkpoint_path() const {
  return checkpoint_path.empty() ? join_path(out_dir, "checkpoint.json") : checkpoint_path;
}

FileFormat RunConfig::file_format() const {
  if (data_format == "csv") return FileFormat::csv;
  if (data_format == "json") return FileFormat::json;
  throw ConfigError{"unknown data format '" + data_format + "'"};
}

PipelineConfig RunConfig::pipeline_config() const {
  PipelineConfig p;
  p.task_params = task_params;
  p.data_n = data_n;
  p.exclusion_q = exclusion_q;
  p.knn_k = knn_k;
  p.train = train;
  p.acquisition = acquisition;
  p.ga = ga;
  p.budget = budget;
  return p;
}

RunConfig run_config_from_json_text(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError{origin + ": " + e.what()};
  }
  if (!doc.is_object()) throw ConfigError{origin + ": config must be a JSON object"};

  static const std::set<std::string> known_sections = {
      "seed", "out",     "task", "data",    "support",
      "train", "acquisition", "ga",   "eval", "ablate", "surface"};
  for (const auto& [key, value] : doc.items()) {
    if (!known_sections.contains(key)) {
      throw ConfigError{"unknown config section '" + key + "'"};
    }
  }

  RunConfig cfg;
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("out")) cfg.out_dir = doc.at("out").get<std::string>();

  Section task(doc, "task");
  task.get("name", cfg.task_name);
  task.get("dim", cfg.task_params.dim);
  task.get("length", cfg.task_params.length);
  task.get("vocab", cfg.task_params.vocab);
  task.get("task_seed", cfg.task_params.task_seed);
  task.finish();

  Section data(doc, "data");
  data.get("path", cfg.data_path);
  data.get("format", cfg.data_format);
  data.get("n", cfg.data_n);
  data.get("exclusion_q", cfg.exclusion_q);
  data.finish();

  Section support(doc, "support");
  support.get("k", cfg.knn_k);
  support.finish();

  Section train(doc, "train");
  train.get("lambda1", cfg.train.lambda1);
  train.get("lambda2", cfg.train.lambda2);
  train.get("rank_pairs", cfg.train.rank_pairs);
  train.get("rank_temperature", cfg.train.rank_temperature);
  train.get("prox_a", cfg.train.prox_a);
  train.get("prox_a0", cfg.train.prox_a0);
  train.get("prox_a1", cfg.train.prox_a1);
  train.get("mc_samples", cfg.train.mc_samples);
  train.get("ddim_steps", cfg.train.ddim_steps);
  train.get("epochs", cfg.train.epochs);
  train.get("batch_size", cfg.train.batch_size);
  train.get("learning_rate", cfg.train.learning_rate);
  train.get("timesteps", cfg.train.timesteps);
  train.get("beta_start", cfg.train.beta_start);
  train.get("beta_end", cfg.train.beta_end);
  train.get("hidden_width", cfg.train.hidden_width);
  train.get("hidden_layers", cfg.train.hidden_layers);
  train.get("checkpoint", cfg.checkpoint_path);
  train.finish();

  std::string acq_kind = to_string(cfg.acquisition.kind);
  Section acq(doc, "acquisition");
  acq.get("kind", acq_kind);
  acq.get("beta", cfg.acquisition.beta);
  acq.get("mc_samples", cfg.acquisition.mc_samples);
  acq.get("ddim_steps", cfg.acquisition.ddim_steps);
  acq.get("prox_a", cfg.acquisition.prox_a);
  acq.get("prox_a0", cfg.acquisition.prox_a0);
  acq.get("prox_a1", cfg.acquisition.prox_a1);
  acq.get("support_transform", cfg.acquisition.use_support_transform);
  acq.finish();
  cfg.acquisition.kind = acquisition_kind_from_string(acq_kind);

  Section ga(doc, "ga");
  ga.get("population", cfg.ga.population);
  ga.get("elites", cfg.ga.elites);
  ga.get("generations", cfg.ga.generations);
  ga.get("mutation_start", cfg.ga.mutation_start);
  ga.get("mutation_end", cfg.ga.mutation_end);
  ga.finish();

  Section eval(doc, "eval");
  eval.get("budget", cfg.budget);
  eval.finish();

  Section ablate(doc, "ablate");
  ablate.get("n_seeds", cfg.ablate_seeds);
  ablate.get("threads", cfg.ablate_threads);
  ablate.finish();

  Section surface(doc, "surface");
  surface.get("resolution", cfg.surface_resolution);
  surface.get("mc_samples", cfg.surface_mc_samples);
  surface.finish();

  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError{"cannot open config " + path};
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return run_config_from_json_text(text, path);
}

std::string run_config_to_json(const RunConfig& cfg) {
  json doc;
  doc["seed"] = cfg.seed;
  doc["out"] = cfg.out_dir;
  doc["task"] = {{"name", cfg.task_name},
                 {"dim", cfg.task_params.dim},
                 {"length", cfg.task_params.length},
                 {"vocab", cfg.task_params.vocab},
                 {"task_seed", cfg.task_params.task_seed}};
  doc["data"] = {{"path", cfg.data_path},
                 {"format", cfg.data_format},
                 {"n", cfg.data_n},
                 {"exclusion_q", cfg.exclusion_q}};
  doc["support"] = {{"k", cfg.knn_k}};
  doc["train"] = {{"lambda1", cfg.train.lambda1},
                  {"lambda2", cfg.train.lambda2},
                  {"rank_pairs", cfg.train.rank_pairs},
                  {"rank_temperature", cfg.train.rank_temperature},
                  {"prox_a", cfg.train.prox_a},
                  {"prox_a0", cfg.train.prox_a0},
                  {"prox_a1", cfg.train.prox_a1},
                  {"mc_samples", cfg.train.mc_samples},
                  {"ddim_steps", cfg.train.ddim_steps},
                  {"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"learning_rate", cfg.train.learning_rate},
                  {"timesteps", cfg.train.timesteps},
                  {"beta_start", cfg.train.beta_start},
                  {"beta_end", cfg.train.beta_end},
                  {"hidden_width", cfg.train.hidden_width},
                  {"hidden_layers", cfg.train.hidden_layers},
                  {"checkpoint", cfg.checkpoint_path}};
  doc["acquisition"] = {{"kind", to_string(cfg.acquisition.kind)},
                        {"beta", cfg.acquisition.beta},
                        {"mc_samples", cfg.acquisition.mc_samples},
                        {"ddim_steps", cfg.acquisition.ddim_steps},
                        {"prox_a", cfg.acquisition.prox_a},
                        {"prox_a0", cfg.acquisition.prox_a0},
                        {"prox_a1", cfg.acquisition.prox_a1},
                        {"support_transform", cfg.acquisition.use_support_transform}};
  doc["ga"] = {{"population", cfg.ga.population},
               {"elites", cfg.ga.elites},
               {"generations", cfg.ga.generations},
               {"mutation_start", cfg.ga.mutation_start},
               {"mutation_end", cfg.ga.mutation_end}};
  doc["eval"] = {{"budget", cfg.budget}};
  doc["ablate"] = {{"n_seeds", cfg.ablate_seeds}, {"threads", cfg.ablate_threads}};
  doc["surface"] = {{"resolution", cfg.surface_resolution},
                    {"mc_samples", cfg.surface_mc_samples}};
  return doc.dump(2);
}

}  // namespace spade
