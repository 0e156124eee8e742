#include "pdo/det/diversity_objective.hpp"

#include <cmath>

namespace pdo::det {

DiversityObjective auxiliary_objective(std::span<const policy::Policy> policies,
                                       std::span<const kernels::StateBatch> batches,
                                       const kernels::KernelOptions& options, double beta,
                                       GradientTarget target) {
  if (policies.size() < 2) throw std::invalid_argument("auxiliary_objective: need M >= 2");
  const kernels::PopulationKernel kernel(policies, batches, options);

  SurrogateKernel ktilde;
  CholeskyFactor factor;
  for (;;) {
    ktilde = surrogate(kernel.matrix(), beta);
    try {
      factor = cholesky(ktilde.entries);
      break;
    } catch (const NotPositiveDefinite&) {
      if (beta < 1e-6) throw;
      beta *= 0.5;
    }
  }

  DiversityObjective out;
  out.beta = beta;
  out.kernel = kernel.matrix();
  out.normalization_scale = kernel.scale();
  out.log_det = log_det_via_cholesky(factor);
  out.value = det_via_cholesky(factor);

  // d log det / dK = beta K~^{-T}; d det / dK = det * that.
  Eigen::MatrixXd upstream = beta * inverse_from_cholesky(factor).transpose();
  if (target == GradientTarget::kDet) upstream *= out.value;
  out.grads = kernel.backward(upstream);
  return out;
}

void clip_grad_norm(std::span<double> grad, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  for (double g : grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (double& g : grad) g *= s;
  }
}

DiversityObjective diversity_ascent_step(std::vector<policy::Policy>& policies,
                                         std::span<const kernels::StateBatch> batches,
                                         const kernels::KernelOptions& options,
                                         const AscentOptions& ascent) {
  DiversityObjective objective =
      auxiliary_objective(policies, batches, options, ascent.beta, ascent.target);
  for (std::size_t i = 0; i < policies.size(); ++i) {
    auto& grad = objective.grads[i];
    clip_grad_norm(grad, ascent.max_grad_norm);
    auto params = policies[i].mutable_params();
    for (std::size_t p = 0; p < params.size(); ++p) params[p] += ascent.learning_rate * grad[p];
  }
  return objective;
}

}  // namespace pdo::det
