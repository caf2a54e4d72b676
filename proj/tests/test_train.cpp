#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "helpers.hpp"
#include "spade/rng.hpp"
#include "spade/train.hpp"

using namespace spade;

namespace {

Dataset tiny_dataset(std::uint64_t seed, int n = 16) {
  Rng rng(seed);
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = rng.uniform(-2, 2);
    x(i, 1) = rng.uniform(-2, 2);
    y[i] = -(x(i, 0) * x(i, 0) + x(i, 1) * x(i, 1)) + 0.1 * rng.normal();
  }
  return Dataset::from_rows(x, y);
}

TrainConfig tiny_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.learning_rate = 3e-3;
  cfg.batch_size = 8;
  cfg.hidden_width = 8;
  cfg.hidden_layers = 2;
  cfg.timesteps = 30;
  cfg.mc_samples = 4;
  cfg.ddim_steps = 5;
  cfg.rank_pairs = 8;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("adam takes a descent step on a quadratic") {
  Eigen::VectorXd p(2);
  p << 5.0, -3.0;
  AdamOptimizer adam(2, 0.1);
  for (int i = 0; i < 500; ++i) {
    const Eigen::VectorXd grad = 2.0 * p;  // f = |p|^2
    adam.step(p, grad);
  }
  CHECK(p.cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("training reduces the denoising loss on tiny instances") {
  double first = 0.0, last = 0.0;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Dataset data = tiny_dataset(100 + seed);
    const SupportIndex index(data, 4);
    const TrainResult result = train(data, index, tiny_config(seed));
    REQUIRE(result.log.size() == 40);
    first += result.log.front().diff;
    last += result.log.back().diff;
  }
  // direction, not magnitude: the mean final L_diff across seeds drops
  CHECK(last / 8.0 < first / 8.0);
}

TEST_CASE("training is deterministic under a fixed seed") {
  const Dataset data = tiny_dataset(7);
  const SupportIndex index(data, 4);
  const TrainResult a = train(data, index, tiny_config(3));
  const TrainResult b = train(data, index, tiny_config(3));
  CHECK(a.log.back().total == b.log.back().total);
  CHECK((a.surrogate.net().params() - b.surrogate.net().params()).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("lambda flags gate the regularizers") {
  const Dataset data = tiny_dataset(9);
  const SupportIndex index(data, 4);
  TrainConfig cfg = tiny_config(5);
  cfg.epochs = 2;
  cfg.lambda1 = 0.0;
  cfg.lambda2 = 0.0;
  const TrainResult base = train(data, index, cfg);
  for (const auto& e : base.log) {
    CHECK(e.calib == 0.0);
    CHECK(e.prox == 0.0);
    CHECK(e.total == doctest::Approx(e.diff));
  }
}

TEST_CASE("mismatched index is rejected") {
  const Dataset data = tiny_dataset(1);
  const Dataset other = tiny_dataset(2, 20);
  const SupportIndex index(other, 4);
  CHECK_THROWS_AS(train(data, index, tiny_config(0)), ConfigError);
}

TEST_CASE("checkpoint round-trips the surrogate") {
  const Dataset data = tiny_dataset(21);
  const SupportIndex index(data, 4);
  const TrainResult result = train(data, index, tiny_config(4));

  const std::string path = "/tmp/ckpt_roundtrip.json";
  save_surrogate(result.surrogate, path, 1.5);
  const LoadedSurrogate loaded = load_surrogate(path);

  CHECK(loaded.train_seconds == 1.5);
  CHECK(loaded.surrogate.net().arch() == result.surrogate.net().arch());
  CHECK((loaded.surrogate.net().params() - result.surrogate.net().params())
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK(loaded.surrogate.norm().y_mean == result.surrogate.norm().y_mean);

  // identical predictions after reload
  const Design x = data.designs().row(3).transpose();
  CHECK(loaded.surrogate.ddim_sample(x, 5, 99) ==
        result.surrogate.ddim_sample(x, 5, 99));
}

TEST_CASE("checkpoint loading rejects mismatches") {
  const Dataset data = tiny_dataset(22);
  const SupportIndex index(data, 4);
  TrainConfig cfg = tiny_config(6);
  cfg.epochs = 1;
  const TrainResult result = train(data, index, cfg);
  const std::string path = "/tmp/ckpt_bad.json";

  SUBCASE("wrong format marker") {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"format\": \"something-else\", \"version\": 1}", f);
    std::fclose(f);
    CHECK_THROWS_AS(load_surrogate(path), CheckpointError);
  }
  SUBCASE("wrong version") {
    std::FILE* f = std::fopen(path.c_str(), "w");
    std::fputs("{\"format\": \"diffusion-surrogate-checkpoint\", \"version\": 999}", f);
    std::fclose(f);
    CHECK_THROWS_AS(load_surrogate(path), CheckpointError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_surrogate("/tmp/nope.json"), CheckpointError); }
  SUBCASE("truncated params") {
    save_surrogate(result.surrogate, path, 0.0);
    // corrupt by rewriting with a shorter parameter list
    std::ifstream in(path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    const auto pos = text.find("\"params\"");
    REQUIRE(pos != std::string::npos);
    std::string corrupted = text.substr(0, pos) + "\"params\": [1.0, 2.0],\n";
    corrupted += "\"unused\": " + text.substr(text.find('[', pos));
    std::ofstream out(path);
    out << corrupted;
    out.close();
    CHECK_THROWS_AS(load_surrogate(path), CheckpointError);
  }
}

TEST_CASE("sampling api") {
  const Dataset data = tiny_dataset(30);
  const SupportIndex index(data, 4);
  TrainConfig cfg = tiny_config(8);
  cfg.epochs = 2;
  const TrainResult result = train(data, index, cfg);
  const Surrogate& s = result.surrogate;
  const Design x = data.designs().row(0).transpose();

  SUBCASE("same seed, same sample") {
    CHECK(s.ddim_sample(x, 5, 1234) == s.ddim_sample(x, 5, 1234));
    CHECK(s.ddim_sample(x, 5, 1234) != s.ddim_sample(x, 5, 1235));
  }
  SUBCASE("predictive stats need two samples") {
    CHECK_THROWS_AS(s.predictive_stats(x, 1, 5, 0), ConfigError);
    const PredictiveStats st = s.predictive_stats(x, 8, 5, 0);
    CHECK(std::isfinite(st.mean));
    CHECK(st.stddev >= 0.0);
    CHECK(st.samples == 8);
  }
  SUBCASE("raw stats are the denormalized normalized stats") {
    const PredictiveStats raw = s.predictive_stats(x, 6, 5, 42);
    // same chain draws in normalized space
    Rng check(derive_seed(42, "mc-sample", {0}));
    (void)check;
    const Design xn = s.normalize_x(x);
    Eigen::VectorXd samples(6);
    for (int m = 0; m < 6; ++m) {
      Rng rng(derive_seed(42, "mc-sample", {static_cast<std::uint64_t>(m)}));
      Eigen::VectorXd y(1);
      y[0] = rng.normal();
      samples[m] = ddim_chain(s.net(), s.schedule(), xn.transpose(),
                              ddim_grid(s.schedule().timesteps, 5), y)[0];
    }
    const PredictiveStats norm_stats = stats_from_samples(samples);
    CHECK(raw.mean ==
          doctest::Approx(s.denormalize_y(norm_stats.mean)).epsilon(1e-12));
    CHECK(raw.stddev ==
          doctest::Approx(norm_stats.stddev * s.norm().y_std).epsilon(1e-12));
  }
}

TEST_CASE("divergence guard") {
  const Dataset data = tiny_dataset(40);
  const SupportIndex index(data, 4);
  TrainConfig cfg = tiny_config(10);
  cfg.learning_rate = 1e18;  // blows up immediately
  cfg.epochs = 50;
  CHECK_THROWS_AS(train(data, index, cfg), TrainingDiverged);
}
