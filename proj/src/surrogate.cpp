#include "spade/surrogate.hpp"

#include <fstream>

#include <json.hpp>

#include "spade/losses.hpp"
#include "spade/rng.hpp"

namespace spade {

Design Surrogate::normalize_x(const Design& x) const {
  if (x.size() != norm_.x_mean.size()) {
    throw DimError{"design has dimension " + std::to_string(x.size()) +
                   ", surrogate expects " + std::to_string(norm_.x_mean.size())};
  }
  return (x - norm_.x_mean).cwiseQuotient(norm_.x_std);
}

double Surrogate::ddim_sample(const Design& x_raw, int steps,
                              std::uint64_t noise_seed) const {
  const Design xn = normalize_x(x_raw);
  Rng rng(noise_seed);
  Eigen::VectorXd y(1);
  y[0] = rng.normal();
  const auto grid = ddim_grid(sched_.timesteps, steps);
  const double yn = ddim_chain(net_, sched_, xn.transpose(), grid, std::move(y))[0];
  return denormalize_y(yn);
}

PredictiveStats Surrogate::predictive_stats(const Design& x_raw, int mc_samples,
                                            int steps, std::uint64_t seed) const {
  if (mc_samples < 2) throw ConfigError{"predictive stats need at least 2 samples"};
  Eigen::VectorXd samples(mc_samples);
  for (int m = 0; m < mc_samples; ++m) {
    samples[m] = ddim_sample(x_raw, steps, derive_seed(seed, "mc-sample", {static_cast<std::uint64_t>(m)}));
  }
  return stats_from_samples(samples);
}

Eigen::MatrixXd Surrogate::sample_matrix_normalized(
    const Eigen::MatrixXd& designs_normalized, int mc_samples, int steps,
    const Eigen::MatrixXd& initial_noise) const {
  if (initial_noise.rows() != designs_normalized.rows() ||
      initial_noise.cols() != mc_samples) {
    throw ConfigError{"initial noise must be one row per design, one column per sample"};
  }
  const auto grid = ddim_grid(sched_.timesteps, steps);
  return mc_sample_matrix(net_, sched_, designs_normalized, grid, initial_noise);
}

PredictiveStats Surrogate::stats_normalized(const Design& x_normalized, int mc_samples,
                                            int steps, std::uint64_t seed) const {
  if (mc_samples < 2) throw ConfigError{"predictive stats need at least 2 samples"};
  Rng rng(seed);
  Eigen::MatrixXd noise(1, mc_samples);
  for (int m = 0; m < mc_samples; ++m) noise(0, m) = rng.normal();
  const Eigen::MatrixXd samples =
      sample_matrix_normalized(x_normalized.transpose(), mc_samples, steps, noise);
  return stats_from_samples(samples.row(0).transpose());
}

namespace {
constexpr const char* kFormat = "diffusion-surrogate-checkpoint";
constexpr int kVersion = 1;
}  // namespace

void save_surrogate(const Surrogate& s, const std::string& path, double train_seconds) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["arch"] = {{"design_dim", s.net().arch().design_dim},
                 {"hidden_width", s.net().arch().hidden_width},
                 {"hidden_layers", s.net().arch().hidden_layers}};
  doc["schedule"] = {{"timesteps", s.schedule().timesteps},
                     {"beta_start", s.schedule().beta[0]},
                     {"beta_end", s.schedule().beta[s.schedule().timesteps - 1]}};
  doc["norm"] = {
      {"x_mean", std::vector<double>(s.norm().x_mean.data(),
                                     s.norm().x_mean.data() + s.norm().x_mean.size())},
      {"x_std", std::vector<double>(s.norm().x_std.data(),
                                    s.norm().x_std.data() + s.norm().x_std.size())},
      {"y_mean", s.norm().y_mean},
      {"y_std", s.norm().y_std}};
  doc["params"] = std::vector<double>(s.net().params().data(),
                                      s.net().params().data() + s.net().params().size());
  doc["train_seconds"] = train_seconds;

  std::ofstream out(path);
  if (!out) throw IoError{"cannot write " + path};
  out << doc.dump(2) << '\n';
  if (!out) throw IoError{"failed writing " + path};
}

LoadedSurrogate load_surrogate(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError{"cannot open checkpoint " + path};
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError{path + ": " + e.what()};
  }

  if (!doc.contains("format") || doc["format"] != kFormat) {
    throw CheckpointError{path + ": not a surrogate checkpoint"};
  }
  if (!doc.contains("version") || doc["version"].get<int>() != kVersion) {
    throw CheckpointError{path + ": unsupported checkpoint version"};
  }

  try {
    MlpArch arch;
    arch.design_dim = doc["arch"]["design_dim"].get<int>();
    arch.hidden_width = doc["arch"]["hidden_width"].get<int>();
    arch.hidden_layers = doc["arch"]["hidden_layers"].get<int>();

    const auto sched = make_schedule(doc["schedule"]["timesteps"].get<int>(),
                                     doc["schedule"]["beta_start"].get<double>(),
                                     doc["schedule"]["beta_end"].get<double>());

    NormStats norm;
    const auto xm = doc["norm"]["x_mean"].get<std::vector<double>>();
    const auto xs = doc["norm"]["x_std"].get<std::vector<double>>();
    norm.x_mean = Eigen::Map<const Eigen::VectorXd>(xm.data(), xm.size());
    norm.x_std = Eigen::Map<const Eigen::VectorXd>(xs.data(), xs.size());
    norm.y_mean = doc["norm"]["y_mean"].get<double>();
    norm.y_std = doc["norm"]["y_std"].get<double>();
    if (norm.x_mean.size() != arch.design_dim || norm.x_std.size() != arch.design_dim) {
      throw CheckpointError{path + ": normalization does not match architecture"};
    }

    const auto raw = doc["params"].get<std::vector<double>>();
    if (static_cast<int>(raw.size()) != arch.param_count()) {
      throw CheckpointError{path + ": parameter count does not match architecture"};
    }
    Eigen::VectorXd params = Eigen::Map<const Eigen::VectorXd>(raw.data(), raw.size());

    LoadedSurrogate out{Surrogate{sched, MlpNoiseNet{arch, std::move(params)}, std::move(norm)},
                        doc.value("train_seconds", 0.0)};
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError{path + ": malformed checkpoint (" + std::string(e.what()) + ")"};
  }
}

}  // namespace spade
