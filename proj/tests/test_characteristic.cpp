#include <doctest.h>

#include <random>

#include "dgn/characteristic.hpp"

using namespace dgn;
using C = std::complex<double>;
using CL = std::complex<long double>;

namespace {

// E[exp(i phi (d Y + l Y^2 / 2))] for one standard normal Y, by the
// trapezoid rule on [-L, L] in long double.
CL factor_cf_by_quadrature(long double d, long double l, CL phi) {
  const long double L = 14.0L, h = 1.0L / 512.0L;
  const CL i(0, 1);
  CL sum = 0;
  for (long double y = -L; y <= L + h / 2; y += h) {
    const long double w = (std::abs(y) >= L - h / 4) ? 0.5L : 1.0L;
    sum += w * std::exp(i * phi * (d * y + l * y * y / 2) - y * y / 2);
  }
  return sum * h / std::sqrt(2.0L * 3.14159265358979323846264338327950288L);
}

RemappedPortfolioT<long double> to_long(const RemappedPortfolio& p) {
  return RemappedPortfolioT<long double>(p.theta(), p.delta().cast<long double>(), p.lambda().cast<long double>());
}

}  // namespace

TEST_CASE("cf is one at the origin and matches direct expectation") {
  Eigen::VectorXd d(3), l(3);
  d << 0.7, -1.2, 0.3;
  l << -0.8, 0.0, 1.5;
  const RemappedPortfolio p(0.4, d, l);
  CHECK(std::abs(cf(p, C(0, 0)) - C(1, 0)) < 1e-15);

  const Strip strip = strip_of_regularity(p);
  for (C phi : {C(0.3, 0.0), C(1.7, 0.2), C(-2.5, 0.6), C(0.9, -0.4)}) {
    REQUIRE(strip.contains(phi.imag()));
    CL expected = std::exp(CL(0, 1) * static_cast<long double>(p.theta()) * CL(phi));
    for (Index k = 0; k < p.size(); ++k) {
      expected *= factor_cf_by_quadrature(p.delta()[k], p.lambda()[k], CL(phi));
    }
    const C got = cf(p, phi);
    CHECK(std::abs(got - C(expected)) < 1e-12 * std::max(1.0, std::abs(got)));
  }
}

TEST_CASE("cf of a linear portfolio is Gaussian") {
  Eigen::VectorXd d(2);
  d << 1.5, -0.5;
  const RemappedPortfolio p(0.2, d, Eigen::VectorXd::Zero(2));
  const double s2 = d.squaredNorm();
  for (C phi : {C(0.5, 0.0), C(2.0, 1.0), C(-3.0, -2.0)}) {
    const C expected = std::exp(C(0, 1) * 0.2 * phi - 0.5 * s2 * phi * phi);
    CHECK(std::abs(cf(p, phi) - expected) < 1e-14 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("cf rejects points outside the strip") {
  Eigen::VectorXd l(2);
  l << -2.0, 1.0;
  const RemappedPortfolio p(0.0, Eigen::VectorXd::Ones(2), l);
  try {
    cf(p, C(1.0, 0.5));
    FAIL("expected OutsideStrip");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutsideStrip);
  }
  CHECK_THROWS_AS(cf(p, C(1.0, -1.0)), Error);
  CHECK_NOTHROW(cf(p, C(1.0, 0.49)));
}

TEST_CASE("cf_grad matches long-double central differences") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd d(4), l(4);
  d << 0.9, -0.4, 1.3, 0.2;
  l << -1.0, 0.5, 0.5, 2.0;
  const RemappedPortfolio p(0.1, d, l);
  const auto pl = to_long(p);
  const Strip strip = strip_of_regularity(p);
  for (int trial = 0; trial < 20; ++trial) {
    const double nu = 0.9 * (u(rng) > 0 ? strip.nu_plus : -strip.nu_minus) * std::abs(u(rng));
    const C phi(3.0 * u(rng), std::min(std::max(nu, 0.9 * strip.nu_minus), 0.9 * strip.nu_plus));
    for (const Parameter& beta : all_parameters(p.size())) {
      const long double x = parameter_value(pl, beta);
      const long double h = 1e-6L * std::max(1.0L, std::abs(x));
      const CL fd = (cf(with_parameter(pl, beta, x + h), CL(phi)) - cf(with_parameter(pl, beta, x - h), CL(phi))) /
                    (2.0L * h);
      const C got = cf_grad(p, phi, beta);
      CHECK_MESSAGE(std::abs(got - C(fd)) <= 1e-7 * std::max(std::abs(got), 1e-3), beta.name());
    }
  }
}

TEST_CASE("parameter names round-trip") {
  for (const Parameter& beta : all_parameters(12)) CHECK(Parameter::parse(beta.name()) == beta);
  CHECK(Parameter::delta(0).name() == "delta_1");
  CHECK(Parameter::lambda(11).name() == "lambda_12");
  CHECK_THROWS_AS(Parameter::parse("gamma_1"), Error);
  CHECK_THROWS_AS(Parameter::parse("delta_0"), Error);
  CHECK_THROWS_AS(Parameter::parse("delta_x"), Error);
  const RemappedPortfolio p(0.0, Eigen::VectorXd::Ones(2), Eigen::VectorXd::Zero(2));
  CHECK_THROWS_AS(parameter_value(p, Parameter::delta(2)), Error);
}

TEST_CASE("with_parameter keeps lambda sorted") {
  Eigen::VectorXd l(3);
  l << -1.0, 0.0, 1.0;
  const RemappedPortfolio p(0.0, Eigen::VectorXd::Ones(3), l);
  const RemappedPortfolio q = with_parameter(p, Parameter::lambda(0), 3.0);
  CHECK(q.lambda()[2] == 3.0);
  CHECK(q.lambda()[0] == 0.0);
}
