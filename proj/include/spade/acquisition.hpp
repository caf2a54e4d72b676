#ifndef SPADE_ACQUISITION_HPP
#define SPADE_ACQUISITION_HPP

#include <string>

#include "spade/sampler.hpp"
#include "spade/support.hpp"

namespace spade {

enum class AcquisitionKind { lcb, ei, mvr };

AcquisitionKind acquisition_kind_from_string(const std::string& name);
std::string to_string(AcquisitionKind kind);

struct AcquisitionConfig {
  AcquisitionKind kind = AcquisitionKind::lcb;
  double beta = 1.0;       // risk weight for lcb/mvr
  int mc_samples = 256;    // per-candidate samples during search
  int ddim_steps = 10;
  double prox_a = 0.02, prox_a0 = 0.02, prox_a1 = 0.005;
  double y_best = 0.0;     // incumbent for ei (normalized units in search)
  bool use_support_transform = false;
};

// mu - beta * sigma.
double lcb(const PredictiveStats& stats, double beta);

// Expected improvement over y_best in maximization form; collapses to
// max(0, mu - y_best) when sigma is zero.
double ei(const PredictiveStats& stats, double y_best);

// mu - beta * sigma^2.
double mvr(const PredictiveStats& stats, double beta);

double acquisition_value(const PredictiveStats& stats, const AcquisitionConfig& cfg);

// The transform of stats implied by the proximity coefficients:
// (mu, sigma) -> (mu - a*d, max(sigma, a0 + a1*d)).
PredictiveStats apply_support_transform(const PredictiveStats& stats,
                                        const SupportQuery& q,
                                        const AcquisitionConfig& cfg);

// Pieces of the first-order equivalence between the transformed acquisition
// and log-prior augmentation. kappa carries the indicator on sigma < a0;
// c0 is the kNN constant -log(k / (N * V_D)) recovered from the query.
struct SupportTransform {
  double tau = 0.0;
  double sigma_min = 0.0;
  double kappa = 0.0;
  double c0 = 0.0;
};

SupportTransform make_support_transform(const PredictiveStats& stats,
                                        const SupportQuery& q,
                                        const AcquisitionConfig& cfg, double beta,
                                        int dim);

// |A(T_d(mu, sigma)) - (A(mu, sigma) + kappa * log density + const)| for the
// LCB acquisition. The LCB is affine in (mu, sigma), so away from the floor
// kink the expansion is exact and the residual is zero up to rounding.
// Throws Unsupported for non-LCB kinds.
double equivalence_residual(const PredictiveStats& stats, const SupportQuery& q,
                            const AcquisitionConfig& cfg, double beta, int dim);

}  // namespace spade

#endif  // SPADE_ACQUISITION_HPP
