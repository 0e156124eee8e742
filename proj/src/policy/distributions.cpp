#include "pdo/policy/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace pdo {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2*pi)

}  // namespace

double DiagGaussian::stddev(std::size_t i) const { return std::exp(log_std[i]); }

void DiagGaussian::validate() const {
  if (mean.size() != log_std.size()) {
    throw std::invalid_argument("DiagGaussian: mean/log_std length mismatch");
  }
  for (double v : log_std) {
    if (!std::isfinite(v)) throw std::invalid_argument("DiagGaussian: non-finite log_std");
  }
}

void DiscreteDist::validate() const {
  if (probs.empty()) throw std::invalid_argument("DiscreteDist: empty support");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::invalid_argument("DiscreteDist: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("DiscreteDist: probabilities do not sum to one");
  }
}

Action sample_action(const ActionDistribution& dist, Rng& rng) {
  if (const auto* g = std::get_if<DiagGaussian>(&dist)) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Action a(g->dim());
    for (std::size_t i = 0; i < a.size(); ++i) {
      a[i] = g->mean[i] + g->stddev(i) * normal(rng);
    }
    return a;
  }
  const auto& d = std::get<DiscreteDist>(dist);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double u = uniform(rng);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    cumulative += d.probs[i];
    if (u < cumulative) return {static_cast<double>(i)};
  }
  return {static_cast<double>(d.size() - 1)};
}

double log_prob(const ActionDistribution& dist, std::span<const double> action) {
  if (const auto* g = std::get_if<DiagGaussian>(&dist)) {
    if (action.size() != g->dim()) {
      throw std::invalid_argument("log_prob: action dimension mismatch");
    }
    double lp = 0.0;
    for (std::size_t i = 0; i < action.size(); ++i) {
      const double z = (action[i] - g->mean[i]) / g->stddev(i);
      lp += -0.5 * z * z - g->log_std[i] - kHalfLog2Pi;
    }
    return lp;
  }
  const auto& d = std::get<DiscreteDist>(dist);
  if (action.size() != 1) throw std::invalid_argument("log_prob: discrete action must be scalar");
  const auto index = static_cast<std::size_t>(action[0]);
  if (index >= d.size()) throw std::invalid_argument("log_prob: action out of range");
  return std::log(d.probs[index]);
}

Action deterministic_action(const ActionDistribution& dist) {
  if (const auto* g = std::get_if<DiagGaussian>(&dist)) return g->mean;
  const auto& d = std::get<DiscreteDist>(dist);
  const auto best = std::max_element(d.probs.begin(), d.probs.end());
  return {static_cast<double>(std::distance(d.probs.begin(), best))};
}

double entropy(const ActionDistribution& dist) {
  if (const auto* g = std::get_if<DiagGaussian>(&dist)) {
    double h = 0.0;
    for (double ls : g->log_std) h += ls + kHalfLog2Pi + 0.5;
    return h;
  }
  const auto& d = std::get<DiscreteDist>(dist);
  double h = 0.0;
  for (double p : d.probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace pdo
