#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "dgn/error.hpp"
#include "dgn/quadrature.hpp"

using namespace dgn;

TEST_CASE("Gauss-Legendre 15 is exact through degree 29") {
  const auto& gl = gauss_legendre_15();
  double wsum = 0.0;
  for (double w : gl.weights) wsum += w;
  CHECK(wsum == doctest::Approx(2.0).epsilon(1e-15));
  for (int k = 0; k <= 29; ++k) {
    double s = 0.0;
    for (int j = 0; j < 15; ++j) s += gl.weights[j] * std::pow(gl.nodes[j], k);
    const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("adaptive integration of a peaked integrand") {
  const auto r = integrate_adaptive([](double x) { return 1.0 / (1e-4 + x * x); }, -1.0, 1.0, 1e-10, 200);
  const double exact = 2.0 / 1e-2 * std::atan(1.0 / 1e-2);
  CHECK(std::abs(r.value - exact) < 1e-8);
  CHECK(r.abs_error >= std::abs(r.value - exact) * 0.1);
}

TEST_CASE("Wynn epsilon accelerates an alternating series") {
  WynnEpsilon w;
  double partial = 0.0;
  for (int k = 1; k <= 20; ++k) {
    partial += (k % 2 ? 1.0 : -1.0) / k;
    w.add(partial);
  }
  CHECK(std::abs(w.estimate() - std::log(2.0)) < 1e-12);
  CHECK(std::abs(partial - std::log(2.0)) > 1e-2);
}

TEST_CASE("closed-form Fourier integrals") {
  const QuadConfig cfg;
  for (double x : {0.0, 0.1, 1.0, 7.5, 60.0}) {
    const auto c = fourier_cos([](double w) { return std::exp(-w); }, x, cfg);
    const auto s = fourier_sin([](double w) { return std::exp(-w); }, x, cfg);
    REQUIRE(c.converged);
    REQUIRE(s.converged);
    CHECK(std::abs(c.value - 1.0 / (1.0 + x * x)) < 1e-11);
    CHECK(std::abs(s.value - x / (1.0 + x * x)) < 1e-11);

    // Algebraic decay: int cos(wx)/(1+w^2) = pi/2 e^{-x}.
    const auto lorentz = fourier_cos([](double w) { return 1.0 / (1.0 + w * w); }, x, cfg);
    if (x > 0.0) {
      REQUIRE(lorentz.converged);
      CHECK(std::abs(lorentz.value - std::numbers::pi / 2 * std::exp(-x)) < 1e-9);
    }
  }
  // Gaussian weight with a wide decay scale.
  const double s = 0.05;
  const auto g = fourier_cos([&](double w) { return std::exp(-0.5 * s * s * w * w); }, 3.0, cfg, 1.0 / s);
  REQUIRE(g.converged);
  CHECK(std::abs(g.value - std::sqrt(std::numbers::pi / 2) / s * std::exp(-4.5 / (s * s))) < 1e-10);
}

TEST_CASE("slowly decaying sine integral") {
  // int_0^inf w sin(wx)/(1+w^2) dw = pi/2 e^{-x}
  const auto r = fourier_sin([](double w) { return w / (1.0 + w * w); }, 2.0);
  REQUIRE(r.converged);
  CHECK(std::abs(r.value - std::numbers::pi / 2 * std::exp(-2.0)) < 1e-9);
}

TEST_CASE("error handling") {
  CHECK_THROWS_AS(fourier_cos([](double) { return 1.0; }, -1.0), Error);
  try {
    fourier_cos([](double w) { return w > 1.0 ? std::numeric_limits<double>::quiet_NaN() : 1.0; }, 1.0);
    FAIL("expected NonFiniteIntegrand");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteIntegrand);
  }
  CHECK(fourier_sin([](double w) { return std::exp(-w); }, 0.0).value == 0.0);
  QuadConfig tight;
  tight.max_cycles = 2;
  const auto r = fourier_cos([](double w) { return 1.0 / (1.0 + w); }, 0.01, tight);
  CHECK_FALSE(r.converged);
}
