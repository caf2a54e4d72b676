#include "spade/acquisition.hpp"

#include <cmath>

namespace spade {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }
double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }
}  // namespace

AcquisitionKind acquisition_kind_from_string(const std::string& name) {
  if (name == "lcb") return AcquisitionKind::lcb;
  if (name == "ei") return AcquisitionKind::ei;
  if (name == "mvr") return AcquisitionKind::mvr;
  throw ConfigError{"unknown acquisition '" + name + "' (expected lcb, ei, or mvr)"};
}

std::string to_string(AcquisitionKind kind) {
  switch (kind) {
    case AcquisitionKind::lcb: return "lcb";
    case AcquisitionKind::ei: return "ei";
    case AcquisitionKind::mvr: return "mvr";
  }
  return "lcb";
}

double lcb(const PredictiveStats& stats, double beta) {
  return stats.mean - beta * stats.stddev;
}

double ei(const PredictiveStats& stats, double y_best) {
  const double delta = stats.mean - y_best;
  if (stats.stddev <= 0.0) return std::max(0.0, delta);
  const double z = delta / stats.stddev;
  return delta * normal_cdf(z) + stats.stddev * normal_pdf(z);
}

double mvr(const PredictiveStats& stats, double beta) {
  return stats.mean - beta * stats.stddev * stats.stddev;
}

double acquisition_value(const PredictiveStats& stats, const AcquisitionConfig& cfg) {
  switch (cfg.kind) {
    case AcquisitionKind::lcb: return lcb(stats, cfg.beta);
    case AcquisitionKind::ei: return ei(stats, cfg.y_best);
    case AcquisitionKind::mvr: return mvr(stats, cfg.beta);
  }
  return lcb(stats, cfg.beta);
}

PredictiveStats apply_support_transform(const PredictiveStats& stats,
                                        const SupportQuery& q,
                                        const AcquisitionConfig& cfg) {
  PredictiveStats out = stats;
  out.mean = stats.mean - cfg.prox_a * q.d;
  out.stddev = std::max(stats.stddev, cfg.prox_a0 + cfg.prox_a1 * q.d);
  return out;
}

SupportTransform make_support_transform(const PredictiveStats& stats,
                                        const SupportQuery& q,
                                        const AcquisitionConfig& cfg, double beta,
                                        int dim) {
  SupportTransform t;
  t.tau = cfg.prox_a * q.d;
  t.sigma_min = cfg.prox_a0 + cfg.prox_a1 * q.d;
  // For the LCB, d_mu A = 1 and d_sigma A = -beta.
  const bool floor_regime = stats.stddev < cfg.prox_a0;
  t.kappa = (cfg.prox_a + (floor_regime ? beta * cfg.prox_a1 : 0.0)) / dim;
  t.c0 = -std::log(q.density) - dim * q.d;
  return t;
}

double equivalence_residual(const PredictiveStats& stats, const SupportQuery& q,
                            const AcquisitionConfig& cfg, double beta, int dim) {
  if (cfg.kind != AcquisitionKind::lcb) {
    throw Unsupported{"equivalence residual is defined for the affine LCB only"};
  }
  const double transformed = lcb(apply_support_transform(stats, q, cfg), beta);

  const SupportTransform t = make_support_transform(stats, q, cfg, beta, dim);
  const double base = lcb(stats, beta);
  const bool floor_regime = stats.stddev < cfg.prox_a0;
  const double state_term = floor_regime ? beta * (stats.stddev - cfg.prox_a0) : 0.0;
  const double prediction =
      base + t.kappa * std::log(q.density) + t.kappa * t.c0 + state_term;

  return std::abs(transformed - prediction);
}

}  // namespace spade
