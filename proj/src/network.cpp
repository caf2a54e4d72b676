#include "spade/network.hpp"

#include <cmath>

#include "spade/rng.hpp"

namespace spade {

namespace {

// SiLU and its derivative, applied elementwise.
inline Eigen::MatrixXd silu(const Eigen::MatrixXd& z) {
  return z.array() * (1.0 / (1.0 + (-z.array()).exp()));
}

inline Eigen::MatrixXd silu_grad(const Eigen::MatrixXd& z) {
  const Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
  return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

}  // namespace

int MlpArch::param_count() const {
  int count = 0;
  int in = input_dim();
  for (int l = 0; l < hidden_layers; ++l) {
    count += in * hidden_width + hidden_width;
    in = hidden_width;
  }
  count += in + 1;  // scalar head
  return count;
}

std::vector<MlpNoiseNet::LayerView> MlpNoiseNet::layers() const {
  std::vector<LayerView> views;
  int offset = 0;
  int in = arch_.input_dim();
  for (int l = 0; l < arch_.hidden_layers; ++l) {
    views.push_back({offset, offset + in * arch_.hidden_width, in, arch_.hidden_width});
    offset += in * arch_.hidden_width + arch_.hidden_width;
    in = arch_.hidden_width;
  }
  views.push_back({offset, offset + in, in, 1});
  return views;
}

MlpNoiseNet::MlpNoiseNet(const MlpArch& arch, std::uint64_t init_seed)
    : arch_(arch), params_(arch.param_count()) {
  if (arch.design_dim < 1 || arch.hidden_width < 1 || arch.hidden_layers < 1) {
    throw ConfigError{"invalid network architecture"};
  }
  Rng rng(derive_seed(init_seed, "net-init"));
  for (const auto& v : layers()) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(v.in));
    for (int i = 0; i < v.in * v.out; ++i) params_[v.w_offset + i] = scale * rng.normal();
    for (int i = 0; i < v.out; ++i) params_[v.b_offset + i] = 0.0;
  }
}

MlpNoiseNet::MlpNoiseNet(const MlpArch& arch, Eigen::VectorXd params)
    : arch_(arch), params_(std::move(params)) {
  if (params_.size() != arch_.param_count()) {
    throw ConfigError{"parameter vector has wrong length"};
  }
}

Eigen::VectorXd MlpNoiseNet::predict(const Eigen::MatrixXd& inputs) const {
  const auto views = layers();
  Eigen::MatrixXd h = inputs;
  for (int l = 0; l < arch_.hidden_layers; ++l) {
    const auto& v = views[l];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + v.w_offset, v.in, v.out);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + v.b_offset, v.out);
    Eigen::MatrixXd z = h * w;
    z.rowwise() += b.transpose();
    h = silu(z);
  }
  const auto& head = views.back();
  Eigen::Map<const Eigen::VectorXd> w(params_.data() + head.w_offset, head.in);
  return (h * w).array() + params_[head.b_offset];
}

Eigen::VectorXd MlpNoiseNet::forward(const Eigen::MatrixXd& inputs, MlpCache& cache) const {
  const auto views = layers();
  cache.input = inputs;
  cache.pre.resize(arch_.hidden_layers);
  cache.act.resize(arch_.hidden_layers);

  const Eigen::MatrixXd* h = &cache.input;
  for (int l = 0; l < arch_.hidden_layers; ++l) {
    const auto& v = views[l];
    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + v.w_offset, v.in, v.out);
    Eigen::Map<const Eigen::VectorXd> b(params_.data() + v.b_offset, v.out);
    cache.pre[l] = *h * w;
    cache.pre[l].rowwise() += b.transpose();
    cache.act[l] = silu(cache.pre[l]);
    h = &cache.act[l];
  }
  const auto& head = views.back();
  Eigen::Map<const Eigen::VectorXd> w(params_.data() + head.w_offset, head.in);
  return (*h * w).array() + params_[head.b_offset];
}

Eigen::MatrixXd MlpNoiseNet::backward(const MlpCache& cache, const Eigen::VectorXd& d_out,
                                      Eigen::VectorXd& param_grad) const {
  const auto views = layers();
  const auto& head = views.back();
  const Eigen::MatrixXd& last_act =
      arch_.hidden_layers > 0 ? cache.act.back() : cache.input;

  // Head: out = act * w + b.
  Eigen::Map<const Eigen::VectorXd> w_head(params_.data() + head.w_offset, head.in);
  Eigen::Map<Eigen::VectorXd> gw_head(param_grad.data() + head.w_offset, head.in);
  gw_head += last_act.transpose() * d_out;
  param_grad[head.b_offset] += d_out.sum();

  Eigen::MatrixXd d_h = d_out * w_head.transpose();
  for (int l = arch_.hidden_layers - 1; l >= 0; --l) {
    const auto& v = views[l];
    const Eigen::MatrixXd d_z = d_h.cwiseProduct(silu_grad(cache.pre[l]));
    const Eigen::MatrixXd& below = l == 0 ? cache.input : cache.act[l - 1];

    Eigen::Map<Eigen::MatrixXd> gw(param_grad.data() + v.w_offset, v.in, v.out);
    Eigen::Map<Eigen::VectorXd> gb(param_grad.data() + v.b_offset, v.out);
    gw += below.transpose() * d_z;
    gb += d_z.colwise().sum().transpose();

    Eigen::Map<const Eigen::MatrixXd> w(params_.data() + v.w_offset, v.in, v.out);
    d_h = d_z * w.transpose();
  }
  return d_h;
}

}  // namespace spade
