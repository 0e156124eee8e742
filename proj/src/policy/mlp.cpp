#include "pdo/policy/mlp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdo/simd/kernels.hpp"

namespace pdo::policy {

std::string to_string(Activation activation) {
  return activation == Activation::kTanh ? "tanh" : "relu";
}

Activation activation_from_string(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown activation: " + name);
}

Mlp::Mlp(Topology topology) : topology_(std::move(topology)) {
  const auto& sizes = topology_.layer_sizes;
  if (sizes.size() < 2) throw std::invalid_argument("Mlp: need at least input and output layer");
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    offsets_.push_back(param_count_);
    param_count_ += static_cast<std::size_t>(sizes[l + 1]) * (sizes[l] + 1);
  }
}

std::span<const double> Mlp::forward(std::span<const double> params,
                                     std::span<const double> input,
                                     Cache& cache) const {
  const auto& sizes = topology_.layer_sizes;
  if (input.size() != static_cast<std::size_t>(sizes.front())) {
    throw std::invalid_argument("Mlp::forward: input dimension mismatch");
  }
  if (params.size() < param_count_) throw std::invalid_argument("Mlp::forward: too few params");
  const std::size_t layers = sizes.size() - 1;
  cache.activations.resize(layers + 1);
  cache.activations[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const double* w = params.data() + offsets_[l];
    auto& next = cache.activations[l + 1];
    next.resize(out);
    simd::gemv({w, out * in}, {w + out * in, out}, cache.activations[l], next);
    if (l + 1 < layers) {
      if (topology_.activation == Activation::kTanh) {
        for (double& v : next) v = std::tanh(v);
      } else {
        for (double& v : next) v = std::max(v, 0.0);
      }
    }
  }
  return cache.activations.back();
}

void Mlp::backward(std::span<const double> params, const Cache& cache,
                   std::span<const double> grad_output,
                   std::span<double> grad_params) const {
  const auto& sizes = topology_.layer_sizes;
  const std::size_t layers = sizes.size() - 1;
  if (grad_output.size() != static_cast<std::size_t>(sizes.back())) {
    throw std::invalid_argument("Mlp::backward: output gradient size mismatch");
  }
  if (grad_params.size() < param_count_) {
    throw std::invalid_argument("Mlp::backward: gradient buffer too small");
  }
  std::vector<double> delta(grad_output.begin(), grad_output.end());
  std::vector<double> upstream;
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = sizes[l];
    const std::size_t out = sizes[l + 1];
    const double* w = params.data() + offsets_[l];
    double* gw = grad_params.data() + offsets_[l];
    double* gb = gw + out * in;
    const auto& input = cache.activations[l];
    const bool propagate = l > 0;
    if (propagate) upstream.assign(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      gb[r] += d;
      simd::axpy(d, input, {gw + r * in, in});
      if (propagate) simd::axpy(d, {w + r * in, in}, upstream);
    }
    if (!propagate) break;
    // Derivative of the hidden activation, expressed through its output.
    for (std::size_t i = 0; i < in; ++i) {
      const double a = input[i];
      upstream[i] *= topology_.activation == Activation::kTanh ? 1.0 - a * a
                                                               : (a > 0.0 ? 1.0 : 0.0);
    }
    delta.swap(upstream);
  }
}

void Mlp::initialize(std::span<double> params, Rng& rng, double hidden_gain,
                     double output_gain) const {
  const auto& sizes = topology_.layer_sizes;
  const std::size_t layers = sizes.size() - 1;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l < layers; ++l) {
    const Eigen::Index in = sizes[l];
    const Eigen::Index out = sizes[l + 1];
    const double gain = l + 1 == layers ? output_gain : hidden_gain;
    double* w = params.data() + offsets_[l];
    std::fill(w, w + out * (in + 1), 0.0);
    if (gain == 0.0) continue;
    // Orthonormal rows (out <= in) or columns (out > in) from a Gaussian QR.
    const Eigen::Index tall = std::max(in, out);
    const Eigen::Index wide = std::min(in, out);
    Eigen::MatrixXd gaussian(tall, wide);
    for (Eigen::Index c = 0; c < wide; ++c) {
      for (Eigen::Index r = 0; r < tall; ++r) gaussian(r, c) = normal(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, wide);
    // Sign fix so the factorisation is unique.
    const Eigen::MatrixXd r = qr.matrixQR().topRows(wide).triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < wide; ++c) {
      if (r(c, c) < 0.0) q.col(c) *= -1.0;
    }
    const Eigen::MatrixXd weights = out <= in ? Eigen::MatrixXd(q.transpose()) : q;
    for (Eigen::Index row = 0; row < out; ++row) {
      for (Eigen::Index col = 0; col < in; ++col) w[row * in + col] = gain * weights(row, col);
    }
  }
}

}  // namespace pdo::policy
