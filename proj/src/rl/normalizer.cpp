#include "pdo/rl/normalizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pdo::rl {

namespace {
constexpr double kEps = 1e-8;
}

Normalizer::Normalizer(int dim) : mean_(dim, 0.0), m2_(dim, 0.0) {
  if (dim < 0) throw std::invalid_argument("Normalizer: negative dimension");
}

std::vector<double> Normalizer::variance() const {
  std::vector<double> v(mean_.size(), 0.0);
  if (count_ <= 0.0) return v;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(0.0, m2_[i] / count_);
  return v;
}

void Normalizer::update(std::span<const double> x) {
  if (x.size() != mean_.size()) throw std::invalid_argument("Normalizer::update: dimension");
  count_ += 1.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double delta = x[i] - mean_[i];
    mean_[i] += delta / count_;
    m2_[i] += delta * (x[i] - mean_[i]);
  }
}

void Normalizer::merge(const Normalizer& other) {
  if (other.mean_.size() != mean_.size()) {
    throw std::invalid_argument("Normalizer::merge: dimension");
  }
  if (other.count_ <= 0.0) return;
  if (count_ <= 0.0) {
    *this = other;
    return;
  }
  const double n = count_ + other.count_;
  for (std::size_t i = 0; i < mean_.size(); ++i) {
    const double delta = other.mean_[i] - mean_[i];
    mean_[i] = (count_ * mean_[i] + other.count_ * other.mean_[i]) / n;
    m2_[i] += other.m2_[i] + delta * delta * count_ * other.count_ / n;
  }
  count_ = n;
}

std::vector<double> Normalizer::normalize(std::span<const double> x, double clip) const {
  if (x.size() != mean_.size()) throw std::invalid_argument("Normalizer::normalize: dimension");
  std::vector<double> out(x.begin(), x.end());
  if (count_ <= 0.0) return out;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double var = std::max(0.0, m2_[i] / count_);
    out[i] = std::clamp((x[i] - mean_[i]) / std::sqrt(var + kEps), -clip, clip);
  }
  return out;
}

void Normalizer::write(io::BinaryWriter& out) const {
  out.f64(count_);
  out.f64s(mean_);
  out.f64s(m2_);
}

Normalizer Normalizer::read(io::BinaryReader& in) {
  Normalizer n;
  n.count_ = in.f64();
  n.mean_ = in.f64s();
  n.m2_ = in.f64s();
  if (n.mean_.size() != n.m2_.size()) throw std::runtime_error("Normalizer: corrupt data");
  return n;
}

double RewardScaler::scale(double reward, bool done) {
  running_return_ = gamma_ * running_return_ + reward;
  const double r[1] = {running_return_};
  stats_.update(r);
  if (done) running_return_ = 0.0;
  return std::clamp(reward / stddev(), -10.0, 10.0);
}

double RewardScaler::stddev() const { return std::sqrt(stats_.variance()[0] + kEps); }

void RewardScaler::write(io::BinaryWriter& out) const {
  out.f64(gamma_);
  out.f64(running_return_);
  stats_.write(out);
}

RewardScaler RewardScaler::read(io::BinaryReader& in) {
  RewardScaler s;
  s.gamma_ = in.f64();
  s.running_return_ = in.f64();
  s.stats_ = Normalizer::read(in);
  return s;
}

}  // namespace pdo::rl
