#pragma once

#include <random>
#include <span>
#include <vector>

#include "pdo/det/diversity_objective.hpp"
#include "pdo/rl/ppo.hpp"

namespace pdo::train {

// Draws up to `count` raw observations uniformly without replacement from the
// union of the buffers.
std::vector<Observation> sample_probe_states(std::span<const rl::RolloutBuffer> buffers,
                                             int count, std::mt19937_64& rng);

// The probe states expressed in each agent's own observation normalisation.
std::vector<kernels::StateBatch> per_agent_batches(std::span<const rl::Agent* const> agents,
                                                   const std::vector<Observation>& probe_raw);

struct DiversifyOptions {
  kernels::KernelOptions kernel;
  det::AscentOptions ascent;
  int iterations = 20;
  // Std of the Gaussian perturbation applied to a policy whose behaviour
  // coincides with an earlier one; identical policies sit at a stationary
  // point of the objective.
  double jitter_std = 1e-2;
  double duplicate_threshold = 1e-12;
};

struct DiversifyResult {
  std::vector<policy::Policy> policies;
  // Surrogate determinant before any change, after the perturbation (if
  // any), then after every ascent step.
  std::vector<double> det_trace;
  std::vector<int> jittered;  // indices of perturbed policies
  Eigen::MatrixXd final_distances;
  double beta = 0.0;
};

DiversifyResult diversify(std::vector<policy::Policy> policies,
                          std::span<const kernels::StateBatch> batches,
                          const DiversifyOptions& options, std::mt19937_64& rng);

struct DvdOptions {
  double lambda = 0.0;
  double beta = 0.99;
  kernels::KernelOptions kernel;
};

// One joint reward/diversity update: per minibatch, every policy descends
// (1 - lambda) * grad(PPO loss) - lambda * grad(det K~). Value functions are
// regressed as in ppo_update. `rngs` drives each learner's minibatch shuffle.
std::vector<rl::PpoStats> dvd_update(std::span<rl::Agent* const> agents,
                                     std::span<const rl::RolloutBuffer> buffers,
                                     const std::vector<Observation>& probe_raw,
                                     const rl::PpoConfig& config, const DvdOptions& options,
                                     std::span<std::mt19937_64* const> rngs);

}  // namespace pdo::train
