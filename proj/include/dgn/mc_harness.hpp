#ifndef DGN_MC_HARNESS_HPP
#define DGN_MC_HARNESS_HPP

// Historical-simulation benchmark: simulated scenarios of the
// independent-factor portfolio, empirical VaR/ES, order-statistics
// confidence intervals and finite-difference sensitivities on frozen draws.

#include <cstdint>
#include <span>
#include <vector>

#include "dgn/characteristic.hpp"
#include "dgn/portfolio.hpp"

namespace dgn {

/// Handle to the N x T standard-normal draws of a sample. Draw (i, t) is a
/// pure function of (seed, t * N + i), so the draws are reproduced exactly
/// on demand instead of being stored.
class FrozenFactors {
 public:
  FrozenFactors(std::uint64_t seed, Index factors, std::size_t scenarios)
      : seed_(seed), factors_(factors), scenarios_(scenarios) {}

  std::uint64_t seed() const { return seed_; }
  Index factors() const { return factors_; }
  std::size_t scenarios() const { return scenarios_; }

  double draw(Index factor, std::size_t scenario) const;

  /// Draws for scenarios [first, first + out.size()), row-major by scenario
  /// (out[k * N + i] is factor i of scenario first + k).
  void fill(std::size_t first, std::span<double> out) const;

 private:
  std::uint64_t seed_;
  Index factors_;
  std::size_t scenarios_;
};

struct ScenarioSample {
  std::vector<double> values;  // ascending
  std::uint64_t seed = 0;
  std::size_t t_mc = 0;
  FrozenFactors frozen{0, 0, 0};
};

/// Portfolio variations theta + sum_i (delta_i + lambda_i Y_i / 2) Y_i in
/// scenario order, factors taken in the order given. Generation is split
/// across threads over disjoint scenario ranges; the result does not depend
/// on the thread count.
std::vector<double> scenario_values(double theta, std::span<const double> delta,
                                    std::span<const double> lambda, const FrozenFactors& frozen,
                                    unsigned threads = 0);

ScenarioSample simulate(const RemappedPortfolio& p, std::size_t t_mc, std::uint64_t seed,
                        unsigned threads = 0);

/// Sorted sample wrapper for callers that already hold scenario values.
ScenarioSample sample_from_values(std::vector<double> values);

/// -V_(t*) with t* = T * level (1-based order statistic); the average of
/// the two neighbouring order statistics when t* is not an integer.
double historical_var(const ScenarioSample& s, double level);

/// Negated mean of the floor(t*) smallest values.
double historical_es(const ScenarioSample& s, double level);

struct McEstimate {
  double point = 0.0;
  double lower_offset = 0.0;
  double upper_offset = 0.0;
  double confidence_level = 0.0;
  std::size_t t_minus = 0;
  std::size_t t_plus = 0;

  double lower() const { return point - lower_offset; }
  double upper() const { return point + upper_offset; }
  bool contains(double x) const { return x >= lower() && x <= upper(); }
};

/// P(#{V_t < q_level} in [t_minus, t_plus - 1]) for X ~ Binomial(T, level):
/// the probability that (V_(t_minus), V_(t_plus)) encloses the true
/// quantile. Normal approximation with continuity correction when
/// T * level > 50, exact log-space summation otherwise.
double order_statistic_coverage(std::size_t t_mc, double level, std::size_t t_minus,
                                std::size_t t_plus);

/// Exact log-space version of the above, for validation.
double order_statistic_coverage_exact(std::size_t t_mc, double level, std::size_t t_minus,
                                      std::size_t t_plus);

/// Order-statistics interval for the quantile with coverage >= cl. Among
/// pairs that cannot shrink on either side without dropping below cl, picks
/// the one most symmetric about t*, then the smaller t_plus.
McEstimate var_ci(const ScenarioSample& s, double level, double cl);

/// ES bounds from the tail means at t_minus and t_plus of var_ci.
McEstimate es_ci(const ScenarioSample& s, double level, double cl);

struct FdSensitivity {
  McEstimate dvar;
  McEstimate des;
};

/// max(0.01 |beta|, 0.01).
double default_shock(double beta_value);

/// Central difference of historical VaR/ES under beta +- shock on the same
/// frozen draws; bounds by linear propagation of the two intervals.
FdSensitivity fd_sensitivity(const RemappedPortfolio& p, Parameter beta, double shock, double level,
                             std::size_t t_mc, std::uint64_t seed, double cl, unsigned threads = 0);

/// Numerator of the VaR central difference, Delta_H(beta + shock) -
/// Delta_H(beta - shock); exactly zero for a zero shock.
double fd_var_difference(const RemappedPortfolio& p, Parameter beta, double shock, double level,
                         std::size_t t_mc, std::uint64_t seed, unsigned threads = 0);

/// Sample mean and central moments 2..4 with delta-method standard errors.
struct SampleMoments {
  double mean = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  double se_mean = 0.0;
  double se_m2 = 0.0;
  double se_m3 = 0.0;
  double se_m4 = 0.0;
};
SampleMoments sample_moments(std::span<const double> values);

}  // namespace dgn

#endif  // DGN_MC_HARNESS_HPP
