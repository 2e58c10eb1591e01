#include <doctest.h>

#include <boost/math/distributions/binomial.hpp>
#include <numeric>

#include "dgn/mc_harness.hpp"
#include "dgn/philox.hpp"

using namespace dgn;

namespace {

RemappedPortfolio small_book() {
  Eigen::VectorXd d(3), l(3);
  d << 1.0, -0.5, 0.3;
  l << -1.0, 0.5, 2.0;
  return RemappedPortfolio(0.1, d, l);
}

}  // namespace

TEST_CASE("Philox4x32-10 known answer") {
  // Random123 kat_vectors: counter 0, key 0.
  const auto b = Philox4x32(0)(0);
  CHECK(b[0] == 0x6627e8d5u);
  CHECK(b[1] == 0xe169c58du);
  CHECK(b[2] == 0xbc57ac4cu);
  CHECK(b[3] == 0x9b00dbd8u);
}

TEST_CASE("frozen draws are addressable and reproducible") {
  const FrozenFactors f(99, 3, 1000);
  std::vector<double> block(3 * 7);
  f.fill(11, block);
  for (std::size_t k = 0; k < 7; ++k)
    for (Index i = 0; i < 3; ++i) CHECK(block[k * 3 + static_cast<std::size_t>(i)] == f.draw(i, 11 + k));

  std::vector<double> all(3 * 1000);
  f.fill(0, all);
  double mean = std::accumulate(all.begin(), all.end(), 0.0) / all.size();
  CHECK(std::abs(mean) < 0.1);
}

TEST_CASE("historical VaR and ES on a hand-made sample") {
  const ScenarioSample s = sample_from_values({5, -3, 1, -7, 2, -1, 0, 4, -2, 6});
  // sorted: -7 -3 -2 -1 0 1 2 4 5 6
  CHECK(historical_var(s, 0.2) == 3.0);
  CHECK(historical_es(s, 0.2) == 5.0);
  CHECK(historical_var(s, 0.25) == 2.5);  // t* = 2.5: mean of the 2nd and 3rd
  CHECK(historical_es(s, 0.25) == 5.0);   // floor(t*) = 2 values
  CHECK(historical_var(s, 0.3) == 2.0);   // 10 * 0.3 rounds to 3
  try {
    historical_var(s, 0.05);
    FAIL("expected InsufficientTailSample");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientTailSample);
  }
  CHECK_THROWS_AS(historical_var(s, 0.0), Error);
}

TEST_CASE("order-statistic coverage") {
  const boost::math::binomial_distribution<double> bin(200, 0.1);
  const double exact = boost::math::cdf(bin, 24.0) - boost::math::cdf(bin, 14.0);
  CHECK(order_statistic_coverage_exact(200, 0.1, 15, 25) == doctest::Approx(exact).epsilon(1e-12));
  CHECK(order_statistic_coverage(200, 0.1, 15, 25) == doctest::Approx(exact).epsilon(1e-12));
  // Normal approximation once T p > 50.
  const boost::math::binomial_distribution<double> big(100000, 0.01);
  const double e2 = boost::math::cdf(big, 1019.0) - boost::math::cdf(big, 979.0);
  CHECK(order_statistic_coverage(100000, 0.01, 980, 1020) == doctest::Approx(e2).epsilon(5e-3));
}

TEST_CASE("var_ci picks a minimal, near-symmetric interval") {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  const ScenarioSample s = sample_from_values(v);
  const McEstimate e = var_ci(s, 0.05, 0.9);
  CHECK(e.point == -50.0);
  CHECK(e.t_minus <= 50);
  CHECK(e.t_plus >= 51);
  const double cov = order_statistic_coverage(1000, 0.05, e.t_minus, e.t_plus);
  CHECK(cov >= 0.9);
  CHECK(order_statistic_coverage(1000, 0.05, e.t_minus + 1, e.t_plus) < 0.9);
  CHECK(order_statistic_coverage(1000, 0.05, e.t_minus, e.t_plus - 1) < 0.9);
  CHECK(std::abs(static_cast<double>(e.t_plus - 50) - static_cast<double>(50 - e.t_minus)) <= 2.0);
  CHECK(e.upper_offset == doctest::Approx(-static_cast<double>(e.t_minus) + 50.0));
  CHECK(e.lower_offset == doctest::Approx(-50.0 + static_cast<double>(e.t_plus)));
  CHECK(e.contains(-50.0));

  const McEstimate es = es_ci(s, 0.05, 0.9);
  CHECK(es.point == doctest::Approx(-25.5));
  CHECK(es.lower() < es.point);
  CHECK(es.upper() > es.point);

  try {
    var_ci(sample_from_values({1, 2, 3}), 0.5, 0.999999);
    FAIL("expected IntervalNotFound");
  } catch (const Error& e2) {
    CHECK(e2.code() == ErrorCode::IntervalNotFound);
  }
}

TEST_CASE("simulation is deterministic and thread-count independent") {
  const RemappedPortfolio p = small_book();
  const ScenarioSample a = simulate(p, 200000, 7, 1);
  const ScenarioSample b = simulate(p, 200000, 7, 4);
  CHECK(a.values == b.values);
  const ScenarioSample c = simulate(p, 200000, 8, 1);
  CHECK(a.values != c.values);

  const SampleMoments m = sample_moments(a.values);
  const MomentSet exact = moments(p);
  CHECK(std::abs(m.mean - exact.mu1) < 4 * m.se_mean);
  CHECK(std::abs(m.m2 - exact.mu2) < 4 * m.se_m2);
  CHECK(std::abs(m.m3 - exact.mu3) < 4 * m.se_m3);
  CHECK(std::abs(m.m4 - exact.mu4) < 4 * m.se_m4);
}

TEST_CASE("finite-difference sensitivities on frozen draws") {
  const RemappedPortfolio p = small_book();
  const FdSensitivity th = fd_sensitivity(p, Parameter::theta(), 0.01, 0.05, 10000, 3, 0.98);
  CHECK(th.dvar.point == -1.0);
  CHECK(th.des.point == -1.0);
  CHECK(th.dvar.lower_offset == 0.0);
  CHECK(th.dvar.upper_offset == 0.0);

  CHECK(fd_var_difference(p, Parameter::delta(1), 0.0, 0.05, 10000, 3) == 0.0);
  CHECK(fd_var_difference(p, Parameter::lambda(2), 0.0, 0.05, 10000, 3) == 0.0);

  // A delta shock reuses the base draws: its up/down samples straddle the base.
  const FdSensitivity d = fd_sensitivity(p, Parameter::delta(0), 0.01, 0.05, 50000, 3, 0.98);
  CHECK(d.dvar.lower_offset >= 0.0);
  CHECK(d.dvar.upper_offset >= 0.0);
  CHECK(std::isfinite(d.des.point));
  CHECK_THROWS_AS(fd_sensitivity(p, Parameter::delta(0), 0.0, 0.05, 1000, 3, 0.98), Error);
  CHECK(default_shock(3.0) == doctest::Approx(0.03));
  CHECK(default_shock(0.0) == doctest::Approx(0.01));
}
