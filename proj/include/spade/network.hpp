#ifndef SPADE_NETWORK_HPP
#define SPADE_NETWORK_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "spade/errors.hpp"

namespace spade {

// Noise predictors consume batches of rows [y_t, t/T, alpha_bar_t, x_0..x_{D-1}]
// and return one predicted noise value per row. Implementations must be
// deterministic functions of their parameters and inputs.
class NoiseModel {
 public:
  virtual ~NoiseModel() = default;
  virtual int design_dim() const = 0;
  virtual Eigen::VectorXd predict(const Eigen::MatrixXd& inputs) const = 0;
};

struct MlpArch {
  int design_dim = 0;
  int hidden_width = 256;
  int hidden_layers = 3;

  int input_dim() const { return design_dim + 3; }
  int param_count() const;
  bool operator==(const MlpArch&) const = default;
};

// Saved activations from one forward pass, required by backward().
struct MlpCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> pre;  // pre-activations per hidden layer
  std::vector<Eigen::MatrixXd> act;  // SiLU outputs per hidden layer
};

// Fully connected SiLU network with a scalar head. Parameters live in one
// flat vector (layer weights in input-major order, then the bias), which
// keeps the optimizer and finite-difference checks trivial.
class MlpNoiseNet final : public NoiseModel {
 public:
  MlpNoiseNet(const MlpArch& arch, std::uint64_t init_seed);
  MlpNoiseNet(const MlpArch& arch, Eigen::VectorXd params);

  const MlpArch& arch() const { return arch_; }
  int design_dim() const override { return arch_.design_dim; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  Eigen::VectorXd predict(const Eigen::MatrixXd& inputs) const override;

  // Forward pass that records activations for a later backward pass.
  Eigen::VectorXd forward(const Eigen::MatrixXd& inputs, MlpCache& cache) const;

  // Accumulates d(loss)/d(params) into param_grad (which must have
  // param_count() entries) and returns d(loss)/d(inputs).
  Eigen::MatrixXd backward(const MlpCache& cache, const Eigen::VectorXd& d_out,
                           Eigen::VectorXd& param_grad) const;

 private:
  struct LayerView {
    int w_offset, b_offset, in, out;
  };
  std::vector<LayerView> layers() const;

  MlpArch arch_;
  Eigen::VectorXd params_;
};

}  // namespace spade

#endif  // SPADE_NETWORK_HPP
