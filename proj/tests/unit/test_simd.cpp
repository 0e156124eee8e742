#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "pdo/policy/mlp.hpp"
#include "pdo/simd/kernels.hpp"

using namespace pdo;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::set_backend(saved); }
};

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar backend is always available") {
    CHECK(simd::backend_supported(simd::Backend::kScalar));
    CHECK(simd::backend_supported(simd::detect_backend()));
    BackendGuard guard;
    CHECK(simd::set_backend(simd::Backend::kScalar));
    CHECK(simd::active_backend() == simd::Backend::kScalar);
  }

  TEST_CASE("unsupported backend request leaves dispatch unchanged") {
    BackendGuard guard;
    const auto before = simd::active_backend();
    for (auto b : {simd::Backend::kAvx2, simd::Backend::kNeon}) {
      if (!simd::backend_supported(b)) {
        CHECK_FALSE(simd::set_backend(b));
        CHECK(simd::active_backend() == before);
      }
    }
  }

  TEST_CASE("scalar reference matches naive loops exactly") {
    std::mt19937_64 rng(1);
    for (std::size_t n : {0u, 1u, 7u, 64u}) {
      const auto x = random_vector(n, rng);
      const auto y = random_vector(n, rng);
      double d = 0.0, s = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        d += x[i] * y[i];
        s += (x[i] - y[i]) * (x[i] - y[i]);
      }
      CHECK(rel_err(simd::scalar::dot(x.data(), y.data(), n), d) < 1e-15);
      CHECK(rel_err(simd::scalar::squared_distance(x.data(), y.data(), n), s) < 1e-15);
    }
  }

  TEST_CASE("vector backends agree with the scalar reference") {
    std::mt19937_64 rng(2);
    for (auto backend : {simd::Backend::kAvx2, simd::Backend::kNeon}) {
      if (!simd::backend_supported(backend)) continue;
      CAPTURE(simd::backend_name(backend));
      for (std::size_t n = 0; n <= 67; ++n) {
        const auto x = random_vector(n, rng);
        const auto y = random_vector(n, rng);
        double vd, vs;
        std::vector<double> ys = y, yv = y;
        simd::scalar::axpy(0.37, x.data(), ys.data(), n);
        if (backend == simd::Backend::kAvx2) {
          vd = simd::avx2::dot(x.data(), y.data(), n);
          vs = simd::avx2::squared_distance(x.data(), y.data(), n);
          simd::avx2::axpy(0.37, x.data(), yv.data(), n);
        } else {
          vd = simd::neon::dot(x.data(), y.data(), n);
          vs = simd::neon::squared_distance(x.data(), y.data(), n);
          simd::neon::axpy(0.37, x.data(), yv.data(), n);
        }
        CHECK(rel_err(vd, simd::scalar::dot(x.data(), y.data(), n)) < 1e-13);
        CHECK(rel_err(vs, simd::scalar::squared_distance(x.data(), y.data(), n)) < 1e-13);
        for (std::size_t i = 0; i < n; ++i) CHECK(rel_err(yv[i], ys[i]) < 1e-14);
      }
    }
  }

  TEST_CASE("dispatched gemv agrees across backends") {
    std::mt19937_64 rng(3);
    BackendGuard guard;
    for (auto [rows, cols] : {std::pair{1, 1}, std::pair{5, 3}, std::pair{64, 22}, std::pair{4, 67}}) {
      const auto w = random_vector(static_cast<std::size_t>(rows * cols), rng);
      const auto b = random_vector(rows, rng);
      const auto x = random_vector(cols, rng);
      simd::set_backend(simd::Backend::kScalar);
      std::vector<double> ref(rows);
      simd::gemv(w, b, x, ref);
      for (int r = 0; r < rows; ++r) {
        double naive = b[r];
        for (int c = 0; c < cols; ++c) naive += w[r * cols + c] * x[c];
        CHECK(rel_err(ref[r], naive) < 1e-14);
      }
      for (auto backend : {simd::Backend::kAvx2, simd::Backend::kNeon}) {
        if (!simd::set_backend(backend)) continue;
        std::vector<double> out(rows);
        simd::gemv(w, b, x, out);
        for (int r = 0; r < rows; ++r) CHECK(rel_err(out[r], ref[r]) < 1e-13);
      }
    }
  }

  TEST_CASE("MLP forward pass is backend independent to rounding") {
    std::mt19937_64 rng(4);
    policy::Mlp net({{22, 64, 64, 4}, policy::Activation::kTanh});
    std::vector<double> params(net.param_count());
    net.initialize(params, rng, std::sqrt(2.0), 1.0);
    const auto x = random_vector(22, rng);
    BackendGuard guard;
    simd::set_backend(simd::Backend::kScalar);
    policy::Mlp::Cache c1;
    const auto ref_span = net.forward(params, x, c1);
    const std::vector<double> ref(ref_span.begin(), ref_span.end());
    if (simd::set_backend(simd::detect_backend())) {
      policy::Mlp::Cache c2;
      const auto out = net.forward(params, x, c2);
      for (std::size_t i = 0; i < ref.size(); ++i) CHECK(rel_err(out[i], ref[i]) < 1e-12);
    }
  }

  TEST_CASE("size mismatches are rejected") {
    std::vector<double> a(3), b(4);
    CHECK_THROWS_AS(simd::dot(a, b), std::invalid_argument);
    CHECK_THROWS_AS(simd::squared_distance(a, b), std::invalid_argument);
    CHECK_THROWS_AS(simd::axpy(1.0, a, b), std::invalid_argument);
  }
}
