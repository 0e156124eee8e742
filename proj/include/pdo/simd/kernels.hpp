#pragma once

// Dense vector kernels used by the MLP forward/backward passes and the
// behaviour-embedding distances. Every kernel has a scalar reference
// implementation; vector variants (AVX2+FMA on x86-64, NEON on AArch64) are
// selected once at runtime and must agree with the reference to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace pdo::simd {

enum class Backend { kScalar, kAvx2, kNeon };

std::string_view backend_name(Backend backend);

// Best backend the running CPU supports.
Backend detect_backend();

// Backend currently used by the dispatching entry points below.
Backend active_backend();

// Switches the dispatch target. Returns false (and leaves the active backend
// unchanged) if the CPU or the build does not support `backend`.
bool set_backend(Backend backend);

bool backend_supported(Backend backend);

// sum_i x[i] * y[i]
double dot(std::span<const double> x, std::span<const double> y);

// y[i] += alpha * x[i]
void axpy(double alpha, std::span<const double> x, std::span<double> y);

// sum_i (x[i] - y[i])^2
double squared_distance(std::span<const double> x, std::span<const double> y);

// out[r] = bias[r] + dot(weights[r, :], x) for a row-major rows x cols matrix.
void gemv(std::span<const double> weights, std::span<const double> bias,
          std::span<const double> x, std::span<double> out);

// Per-backend entry points. These bypass dispatch and exist for equivalence
// testing and benchmarking; the vector variants are only valid when
// backend_supported() reports true.
namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
}  // namespace avx2

namespace neon {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* x, const double* y, std::size_t n);
}  // namespace neon

}  // namespace pdo::simd
