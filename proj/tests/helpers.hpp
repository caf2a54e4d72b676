#ifndef SPADE_TEST_HELPERS_HPP
#define SPADE_TEST_HELPERS_HPP

// Test-side oracles kept independent of the library implementation:
// brute-force neighbor search, an analytic noise model with a known clean
// target, and central finite differences.

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "spade/dataset.hpp"
#include "spade/network.hpp"

namespace spade::testing {

// All-pairs distances sorted ascending (plain loops, no Eigen reductions).
inline std::vector<double> brute_force_distances(const Eigen::MatrixXd& points,
                                                 const Design& x) {
  std::vector<double> out;
  out.reserve(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double sq = 0.0;
    for (Eigen::Index j = 0; j < points.cols(); ++j) {
      const double diff = points(i, j) - x[j];
      sq += diff * diff;
    }
    out.push_back(std::sqrt(sq));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Noise model whose implied clean value is a fixed function of the design:
// eps(y_t, t, x) = (y_t - sqrt(abar_t) * g(x)) / sqrt(1 - abar_t).
// Under the deterministic sampler this reproduces g(x) exactly from any
// initial noise, which makes scores deterministic and searches exact.
class ImpliedMeanOracle final : public NoiseModel {
 public:
  ImpliedMeanOracle(int design_dim, std::function<double(const Design&)> g)
      : dim_(design_dim), g_(std::move(g)) {}

  int design_dim() const override { return dim_; }

  Eigen::VectorXd predict(const Eigen::MatrixXd& in) const override {
    Eigen::VectorXd out(in.rows());
    for (Eigen::Index r = 0; r < in.rows(); ++r) {
      const double y_t = in(r, 0);
      const double abar = in(r, 2);
      const Design x = in.row(r).tail(dim_).transpose();
      out[r] = (y_t - std::sqrt(abar) * g_(x)) / std::sqrt(1.0 - abar);
    }
    return out;
  }

 private:
  int dim_;
  std::function<double(const Design&)> g_;
};

// Central finite differences of f over each coordinate of params.
inline Eigen::VectorXd finite_difference_gradient(
    const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd params,
    double step = 1e-5) {
  Eigen::VectorXd grad(params.size());
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    const double h = step * std::max(1.0, std::abs(saved));
    params[i] = saved + h;
    const double up = f(params);
    params[i] = saved - h;
    const double down = f(params);
    params[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
inline double max_relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                 double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

}  // namespace spade::testing

#endif  // SPADE_TEST_HELPERS_HPP
