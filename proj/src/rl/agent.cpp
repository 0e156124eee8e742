#include "pdo/rl/agent.hpp"

#include <istream>
#include <ostream>

namespace pdo::rl {

namespace {
constexpr std::uint32_t kAgentMagic = 0x31474741;  // "AGG1"
}

Agent Agent::create(int obs_dim, policy::ActionSpace action_space, const AgentOptions& options,
                    Rng& rng) {
  auto pi = policy::Policy::create(obs_dim, action_space, options.hidden, options.activation, rng,
                                   options.init);
  auto vf = policy::ValueFunction::create(obs_dim, options.hidden, options.activation, rng);
  Optimizer po(options.optimizer, pi.param_count());
  Optimizer vo(options.optimizer, vf.param_count());
  return Agent{std::move(pi),       std::move(vf),
               std::move(po),       std::move(vo),
               Normalizer(obs_dim), RewardScaler(options.gamma),
               options.scale_rewards};
}

void write_agent(std::ostream& out, const Agent& agent) {
  io::BinaryWriter w(out);
  w.u32(kAgentMagic);
  policy::write_policy(out, agent.policy);
  policy::write_value_function(out, agent.value);
  agent.policy_optimizer.write(w);
  agent.value_optimizer.write(w);
  agent.obs_normalizer.write(w);
  agent.reward_scaler.write(w);
  w.u32(agent.scale_rewards ? 1 : 0);
}

Agent read_agent(std::istream& in) {
  io::BinaryReader r(in);
  if (r.u32() != kAgentMagic) throw std::runtime_error("snapshot: not an agent record");
  auto pi = policy::read_policy(in);
  auto vf = policy::read_value_function(in);
  auto po = Optimizer::read(r);
  auto vo = Optimizer::read(r);
  auto on = Normalizer::read(r);
  auto rs = RewardScaler::read(r);
  const bool scale = r.u32() != 0;
  if (po.size() != pi.param_count() || vo.size() != vf.param_count() ||
      on.dim() != pi.obs_dim()) {
    throw std::runtime_error("snapshot: inconsistent agent record");
  }
  return Agent{std::move(pi), std::move(vf), std::move(po), std::move(vo),
               std::move(on), std::move(rs), scale};
}

}  // namespace pdo::rl
