#include "pdo/policy/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "pdo/io/binary.hpp"

namespace pdo::policy {

namespace {

constexpr std::uint32_t kPolicyMagic = 0x504f4c31;  // "POL1"
constexpr std::uint32_t kValueMagic = 0x56414c31;   // "VAL1"

Topology with_output(int obs_dim, const std::vector<int>& hidden, int output,
                     Activation activation) {
  Topology t;
  t.layer_sizes.push_back(obs_dim);
  t.layer_sizes.insert(t.layer_sizes.end(), hidden.begin(), hidden.end());
  t.layer_sizes.push_back(output);
  t.activation = activation;
  return t;
}

bool bitwise_equal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

void write_topology(io::BinaryWriter& w, const Topology& t) {
  w.i32s(t.layer_sizes);
  w.u32(static_cast<std::uint32_t>(t.activation));
}

Topology read_topology(io::BinaryReader& r) {
  Topology t;
  t.layer_sizes = r.i32s();
  const auto act = r.u32();
  if (act > 1) throw std::runtime_error("snapshot: bad activation tag");
  t.activation = static_cast<Activation>(act);
  return t;
}

}  // namespace

Policy::Policy(Topology topology, ActionSpace action_space, std::vector<double> params)
    : net_(std::move(topology)), action_space_(action_space), params_(std::move(params)) {
  if (net_.topology().output_dim() != action_space_.size) {
    throw std::invalid_argument("Policy: output layer does not match action space");
  }
  const std::size_t expected =
      net_.param_count() + (action_space_.is_continuous() ? action_space_.size : 0);
  if (params_.size() != expected) {
    throw std::invalid_argument("Policy: parameter count does not match topology");
  }
}

Policy Policy::create(int obs_dim, ActionSpace action_space,
                      const std::vector<int>& hidden, Activation activation,
                      Rng& rng, const InitOptions& init) {
  Topology topology = with_output(obs_dim, hidden, action_space.size, activation);
  Mlp net(topology);
  std::vector<double> params(net.param_count() +
                             (action_space.is_continuous() ? action_space.size : 0));
  net.initialize(params, rng, init.hidden_gain, init.output_gain);
  std::fill(params.begin() + static_cast<std::ptrdiff_t>(net.param_count()), params.end(),
            init.log_std_init);
  return Policy(std::move(topology), action_space, std::move(params));
}

ActionDistribution Policy::forward(std::span<const double> obs) const {
  Mlp::Cache cache;
  return forward(obs, cache);
}

ActionDistribution Policy::forward(std::span<const double> obs, Mlp::Cache& cache) const {
  const auto out = net_.forward(params_, obs, cache);
  if (action_space_.is_continuous()) {
    DiagGaussian g;
    g.mean.assign(out.begin(), out.end());
    g.log_std.resize(out.size());
    const double* ls = params_.data() + net_.param_count();
    for (std::size_t i = 0; i < out.size(); ++i) {
      g.log_std[i] = std::clamp(ls[i], kLogStdMin, kLogStdMax);
    }
    return g;
  }
  DiscreteDist d;
  d.probs.resize(out.size());
  const double max_logit = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    d.probs[i] = std::exp(out[i] - max_logit);
    total += d.probs[i];
  }
  for (double& p : d.probs) p /= total;
  return d;
}

std::vector<double> Policy::mean_action(std::span<const double> obs, Mlp::Cache& cache) const {
  const auto out = net_.forward(params_, obs, cache);
  return {out.begin(), out.end()};
}

void Policy::backward_one(const Mlp::Cache& cache, const DistParamGrad& upstream,
                          std::span<double> grad) const {
  if (grad.size() != params_.size()) throw std::invalid_argument("Policy::backward: bad buffer");
  net_.backward(params_, cache, upstream.d_output, grad);
  if (action_space_.is_continuous() && !upstream.d_log_std.empty()) {
    if (upstream.d_log_std.size() != static_cast<std::size_t>(action_space_.size)) {
      throw std::invalid_argument("Policy::backward: log_std gradient size mismatch");
    }
    const std::size_t base = net_.param_count();
    for (std::size_t i = 0; i < upstream.d_log_std.size(); ++i) {
      const double raw = params_[base + i];
      // The clamp blocks gradient outside the admissible range.
      if (raw >= kLogStdMin && raw <= kLogStdMax) grad[base + i] += upstream.d_log_std[i];
    }
  }
}

std::vector<double> Policy::backward(std::span<const Observation> observations,
                                     std::span<const DistParamGrad> upstream) const {
  if (observations.size() != upstream.size()) {
    throw std::invalid_argument("Policy::backward: batch/upstream size mismatch");
  }
  std::vector<double> grad(params_.size(), 0.0);
  Mlp::Cache cache;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    net_.forward(params_, observations[i], cache);
    backward_one(cache, upstream[i], grad);
  }
  return grad;
}

bool Policy::operator==(const Policy& other) const {
  return topology() == other.topology() && action_space_ == other.action_space_ &&
         bitwise_equal(params_, other.params_);
}

ValueFunction::ValueFunction(Topology topology, std::vector<double> params)
    : net_(std::move(topology)), params_(std::move(params)) {
  if (net_.topology().output_dim() != 1) throw std::invalid_argument("ValueFunction: scalar output");
  if (params_.size() != net_.param_count()) {
    throw std::invalid_argument("ValueFunction: parameter count does not match topology");
  }
}

ValueFunction ValueFunction::create(int obs_dim, const std::vector<int>& hidden,
                                    Activation activation, Rng& rng) {
  Topology topology = with_output(obs_dim, hidden, 1, activation);
  Mlp net(topology);
  std::vector<double> params(net.param_count());
  net.initialize(params, rng, 1.4142135623730951, 1.0);
  return ValueFunction(std::move(topology), std::move(params));
}

double ValueFunction::value(std::span<const double> obs) const {
  Mlp::Cache cache;
  return value(obs, cache);
}

double ValueFunction::value(std::span<const double> obs, Mlp::Cache& cache) const {
  return net_.forward(params_, obs, cache)[0];
}

void ValueFunction::backward_one(const Mlp::Cache& cache, double d_value,
                                 std::span<double> grad) const {
  const double g[1] = {d_value};
  net_.backward(params_, cache, g, grad);
}

bool ValueFunction::operator==(const ValueFunction& other) const {
  return topology() == other.topology() && bitwise_equal(params_, other.params_);
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> d_probs) {
  double weighted = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) weighted += probs[k] * d_probs[k];
  std::vector<double> d_logits(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    d_logits[k] = probs[k] * (d_probs[k] - weighted);
  }
  return d_logits;
}

void write_policy(std::ostream& out, const Policy& policy) {
  io::BinaryWriter w(out);
  w.u32(kPolicyMagic);
  write_topology(w, policy.topology());
  w.u32(static_cast<std::uint32_t>(policy.action_space().kind));
  w.u32(static_cast<std::uint32_t>(policy.action_space().size));
  w.f64s({policy.params().begin(), policy.params().end()});
}

Policy read_policy(std::istream& in) {
  io::BinaryReader r(in);
  if (r.u32() != kPolicyMagic) throw std::runtime_error("snapshot: not a policy record");
  Topology topology = read_topology(r);
  ActionSpace space;
  const auto kind = r.u32();
  if (kind > 1) throw std::runtime_error("snapshot: bad action space tag");
  space.kind = static_cast<ActionSpace::Kind>(kind);
  space.size = static_cast<int>(r.u32());
  return Policy(std::move(topology), space, r.f64s());
}

void write_value_function(std::ostream& out, const ValueFunction& value) {
  io::BinaryWriter w(out);
  w.u32(kValueMagic);
  write_topology(w, value.topology());
  w.f64s({value.params().begin(), value.params().end()});
}

ValueFunction read_value_function(std::istream& in) {
  io::BinaryReader r(in);
  if (r.u32() != kValueMagic) throw std::runtime_error("snapshot: not a value record");
  Topology topology = read_topology(r);
  return ValueFunction(std::move(topology), r.f64s());
}

nlohmann::json to_json(const Topology& topology) {
  return {{"layer_sizes", topology.layer_sizes},
          {"activation", to_string(topology.activation)}};
}

Topology topology_from_json(const nlohmann::json& j) {
  Topology t;
  t.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
  t.activation = activation_from_string(j.at("activation").get<std::string>());
  return t;
}

nlohmann::json to_json(const Policy& policy) {
  const auto& space = policy.action_space();
  return {{"topology", to_json(policy.topology())},
          {"action_space",
           {{"kind", space.is_continuous() ? "continuous" : "discrete"}, {"size", space.size}}},
          {"params", std::vector<double>(policy.params().begin(), policy.params().end())}};
}

Policy policy_from_json(const nlohmann::json& j) {
  const auto& s = j.at("action_space");
  const auto kind = s.at("kind").get<std::string>();
  const int size = s.at("size").get<int>();
  ActionSpace space = kind == "continuous" ? ActionSpace::continuous(size)
                                           : ActionSpace::discrete(size);
  return Policy(topology_from_json(j.at("topology")), space,
                j.at("params").get<std::vector<double>>());
}

}  // namespace pdo::policy
