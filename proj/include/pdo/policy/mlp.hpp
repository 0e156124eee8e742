#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdo/policy/distributions.hpp"

namespace pdo::policy {

enum class Activation { kTanh, kRelu };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

// Layer widths from input to output, plus the hidden activation. The output
// layer is always linear.
struct Topology {
  std::vector<int> layer_sizes;
  Activation activation = Activation::kTanh;

  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
  bool operator==(const Topology&) const = default;
};

// Feed-forward network evaluated over a caller-owned flat parameter vector.
// Layout per layer: weights (out x in, row-major) followed by biases (out).
class Mlp {
 public:
  struct Cache {
    // activations[0] is the input; activations.back() the linear output.
    std::vector<std::vector<double>> activations;
  };

  explicit Mlp(Topology topology);

  const Topology& topology() const { return topology_; }
  std::size_t param_count() const { return param_count_; }

  std::span<const double> forward(std::span<const double> params,
                                  std::span<const double> input,
                                  Cache& cache) const;

  // Accumulates d(loss)/d(params) into grad_params given d(loss)/d(output)
  // for the input recorded in `cache`.
  void backward(std::span<const double> params, const Cache& cache,
                std::span<const double> grad_output,
                std::span<double> grad_params) const;

  // Orthogonal initialisation: hidden layers scaled by hidden_gain, the output
  // layer by output_gain (0 gives an all-zero output layer). Biases are zero.
  void initialize(std::span<double> params, Rng& rng, double hidden_gain,
                  double output_gain) const;

 private:
  Topology topology_;
  std::vector<std::size_t> offsets_;
  std::size_t param_count_ = 0;
};

}  // namespace pdo::policy
