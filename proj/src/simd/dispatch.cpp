#include <atomic>
#include <cassert>
#include <stdexcept>

#include "pdo/simd/kernels.hpp"

namespace pdo::simd {

namespace {

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*squared_distance)(const double*, const double*, std::size_t);
};

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy,
                                   &scalar::squared_distance};
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy,
                                 &avx2::squared_distance};
constexpr KernelTable kNeonTable{&neon::dot, &neon::axpy,
                                 &neon::squared_distance};

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::kAvx2:
      return &kAvx2Table;
    case Backend::kNeon:
      return &kNeonTable;
    case Backend::kScalar:
      break;
  }
  return &kScalarTable;
}

struct Dispatch {
  std::atomic<Backend> backend;
  std::atomic<const KernelTable*> table;
  Dispatch() : backend(detect_backend()), table(table_for(backend.load())) {}
};

Dispatch& dispatch() {
  static Dispatch instance;
  return instance;
}

const KernelTable& active() {
  return *dispatch().table.load(std::memory_order_relaxed);
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd: vector length mismatch");
}

}  // namespace

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return true;
    case Backend::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::kNeon:
#if defined(__aarch64__) || defined(_M_ARM64)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Backend detect_backend() {
  if (backend_supported(Backend::kAvx2)) return Backend::kAvx2;
  if (backend_supported(Backend::kNeon)) return Backend::kNeon;
  return Backend::kScalar;
}

Backend active_backend() { return dispatch().backend.load(); }

bool set_backend(Backend backend) {
  if (!backend_supported(backend)) return false;
  dispatch().backend.store(backend);
  dispatch().table.store(table_for(backend));
  return true;
}

double dot(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  return active().dot(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> x, std::span<const double> y) {
  check_same_size(x.size(), y.size());
  return active().squared_distance(x.data(), y.data(), x.size());
}

void gemv(std::span<const double> weights, std::span<const double> bias,
          std::span<const double> x, std::span<double> out) {
  const std::size_t rows = out.size();
  const std::size_t cols = x.size();
  if (weights.size() != rows * cols || bias.size() != rows) {
    throw std::invalid_argument("simd::gemv: shape mismatch");
  }
  const KernelTable& k = active();
  for (std::size_t r = 0; r < rows; ++r) {
    out[r] = bias[r] + k.dot(weights.data() + r * cols, x.data(), cols);
  }
}

}  // namespace pdo::simd
