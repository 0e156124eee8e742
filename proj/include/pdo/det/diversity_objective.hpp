#pragma once

// Population diversity objective det(beta K + (1 - beta) I) over the DSE
// kernel, with gradients chained into every policy's parameters.

#include <span>
#include <vector>

#include "pdo/det/determinant.hpp"
#include "pdo/kernels/dse.hpp"

namespace pdo::det {

enum class GradientTarget { kDet, kLogDet };

struct DiversityObjective {
  double value = 0.0;    // det of the surrogate kernel
  double log_det = 0.0;  // log of the same
  double beta = 0.0;     // beta actually used (may shrink on factorisation failure)
  kernels::KernelMatrix kernel;
  double normalization_scale = 1.0;
  // Gradient of `value` (kDet) or `log_det` (kLogDet) per policy.
  std::vector<std::vector<double>> grads;
};

// Evaluates the surrogate determinant and its gradient. If the factorisation
// fails, beta is halved until it succeeds.
DiversityObjective auxiliary_objective(std::span<const policy::Policy> policies,
                                       std::span<const kernels::StateBatch> batches,
                                       const kernels::KernelOptions& options, double beta,
                                       GradientTarget target = GradientTarget::kDet);

struct AscentOptions {
  double learning_rate = 1e-3;
  double max_grad_norm = 1.0;  // per policy; <= 0 disables clipping
  double beta = 0.99;
  GradientTarget target = GradientTarget::kLogDet;
};

// One gradient-ascent step on every policy; returns the objective evaluated
// before the step.
DiversityObjective diversity_ascent_step(std::vector<policy::Policy>& policies,
                                         std::span<const kernels::StateBatch> batches,
                                         const kernels::KernelOptions& options,
                                         const AscentOptions& ascent);

// Rescales `grad` in place so its Euclidean norm is at most max_norm.
void clip_grad_norm(std::span<double> grad, double max_norm);

}  // namespace pdo::det
