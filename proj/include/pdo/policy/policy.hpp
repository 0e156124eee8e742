#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"

#include "pdo/policy/distributions.hpp"
#include "pdo/policy/mlp.hpp"

namespace pdo::policy {

struct ActionSpace {
  enum class Kind { kContinuous, kDiscrete };
  Kind kind = Kind::kContinuous;
  int size = 1;  // action dimension or number of discrete actions

  static ActionSpace continuous(int dim) { return {Kind::kContinuous, dim}; }
  static ActionSpace discrete(int n) { return {Kind::kDiscrete, n}; }
  bool is_continuous() const { return kind == Kind::kContinuous; }
  bool operator==(const ActionSpace&) const = default;
};

struct InitOptions {
  double hidden_gain = 1.4142135623730951;
  double output_gain = 0.01;
  double log_std_init = 0.0;
};

// d(loss)/d(distribution parameters) for one state. `d_output` is taken with
// respect to the Gaussian mean or the categorical logits; `d_log_std` is only
// used by continuous policies (and may be left empty).
struct DistParamGrad {
  std::vector<double> d_output;
  std::vector<double> d_log_std;
};

// Stochastic policy: MLP over the observation producing a diagonal Gaussian
// (state-independent learnable log-std appended to the flat parameter vector)
// or a softmax distribution.
class Policy {
 public:
  Policy(Topology topology, ActionSpace action_space, std::vector<double> params);

  static Policy create(int obs_dim, ActionSpace action_space,
                       const std::vector<int>& hidden, Activation activation,
                       Rng& rng, const InitOptions& init = {});

  const Topology& topology() const { return net_.topology(); }
  const ActionSpace& action_space() const { return action_space_; }
  int obs_dim() const { return topology().input_dim(); }

  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  std::size_t param_count() const { return params_.size(); }
  std::size_t net_param_count() const { return net_.param_count(); }

  ActionDistribution forward(std::span<const double> obs) const;
  ActionDistribution forward(std::span<const double> obs, Mlp::Cache& cache) const;
  // Gaussian mean only; cheaper than forward() for deterministic rollouts.
  std::vector<double> mean_action(std::span<const double> obs, Mlp::Cache& cache) const;

  // Sum over the batch of d(loss)/d(params) given per-state upstream gradients.
  std::vector<double> backward(std::span<const Observation> observations,
                               std::span<const DistParamGrad> upstream) const;
  // Accumulating single-state variant; `cache` must hold the forward pass of
  // that state.
  void backward_one(const Mlp::Cache& cache, const DistParamGrad& upstream,
                    std::span<double> grad) const;

  bool operator==(const Policy& other) const;

 private:
  Mlp net_;
  ActionSpace action_space_;
  std::vector<double> params_;
};

// Scalar state-value network.
class ValueFunction {
 public:
  ValueFunction(Topology topology, std::vector<double> params);

  static ValueFunction create(int obs_dim, const std::vector<int>& hidden,
                              Activation activation, Rng& rng);

  const Topology& topology() const { return net_.topology(); }
  std::span<const double> params() const { return params_; }
  std::span<double> mutable_params() { return params_; }
  std::size_t param_count() const { return params_.size(); }

  double value(std::span<const double> obs) const;
  double value(std::span<const double> obs, Mlp::Cache& cache) const;
  void backward_one(const Mlp::Cache& cache, double d_value, std::span<double> grad) const;

  bool operator==(const ValueFunction& other) const;

 private:
  Mlp net_;
  std::vector<double> params_;
};

// Gradient of a loss with respect to logits given its gradient w.r.t. the
// softmax probabilities.
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> d_probs);

void write_policy(std::ostream& out, const Policy& policy);
Policy read_policy(std::istream& in);
void write_value_function(std::ostream& out, const ValueFunction& value);
ValueFunction read_value_function(std::istream& in);

nlohmann::json to_json(const Topology& topology);
Topology topology_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& j);

}  // namespace pdo::policy
