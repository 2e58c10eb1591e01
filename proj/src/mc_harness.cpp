#include "dgn/mc_harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <new>
#include <optional>
#include <thread>

#include "dgn/philox.hpp"

namespace dgn {

namespace {

unsigned resolve_threads(unsigned threads, std::size_t work) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t max_useful = std::max<std::size_t>(1, work / 65536);
  return static_cast<unsigned>(std::min<std::size_t>(threads, max_useful));
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::LevelOutOfRange, "level must lie in (0, 1), got " + std::to_string(level));
  }
}

// T * level, snapped to the nearest integer when it is one up to rounding.
double tail_index(std::size_t t_mc, double level) {
  const double t = static_cast<double>(t_mc) * level;
  const double r = std::round(t);
  return std::abs(t - r) <= 1e-9 * std::max(1.0, t) ? r : t;
}

double tail_mean(const std::vector<double>& sorted, std::size_t count) {
  long double sum = 0.0L;
  for (std::size_t k = 0; k < count; ++k) sum += sorted[k];
  return static_cast<double>(sum / static_cast<long double>(count));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double FrozenFactors::draw(Index factor, std::size_t scenario) const {
  const std::uint64_t linear = static_cast<std::uint64_t>(scenario) * static_cast<std::uint64_t>(factors_) +
                               static_cast<std::uint64_t>(factor);
  const Philox4x32 gen(seed_);
  return normal_pair(gen, linear / 2)[linear % 2];
}

void FrozenFactors::fill(std::size_t first, std::span<double> out) const {
  const Philox4x32 gen(seed_);
  std::uint64_t linear = static_cast<std::uint64_t>(first) * static_cast<std::uint64_t>(factors_);
  std::size_t k = 0;
  if (linear % 2 == 1 && k < out.size()) {
    out[k++] = normal_pair(gen, linear / 2)[1];
    ++linear;
  }
  for (; k + 1 < out.size(); k += 2, linear += 2) {
    const auto z = normal_pair(gen, linear / 2);
    out[k] = z[0];
    out[k + 1] = z[1];
  }
  if (k < out.size()) out[k] = normal_pair(gen, linear / 2)[0];
}

std::vector<double> scenario_values(double theta, std::span<const double> delta,
                                    std::span<const double> lambda, const FrozenFactors& frozen,
                                    unsigned threads) {
  const std::size_t n = delta.size();
  if (lambda.size() != n || static_cast<Index>(n) != frozen.factors()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter vectors do not match the frozen draws");
  }
  const std::size_t t_mc = frozen.scenarios();
  std::vector<double> values;
  try {
    values.resize(t_mc);
  } catch (const std::bad_alloc&) {
    throw Error(ErrorCode::ResourceExhausted, "cannot allocate " + std::to_string(t_mc) + " scenarios");
  }

  auto work = [&](std::size_t begin, std::size_t end) {
    constexpr std::size_t kBlock = 4096;
    std::vector<double> draws(kBlock * std::max<std::size_t>(n, 1));
    for (std::size_t start = begin; start < end; start += kBlock) {
      const std::size_t count = std::min(kBlock, end - start);
      std::span<double> block(draws.data(), count * n);
      frozen.fill(start, block);
      for (std::size_t k = 0; k < count; ++k) {
        double v = theta;
        const double* y = block.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) v += (delta[i] + 0.5 * lambda[i] * y[i]) * y[i];
        values[start + k] = v;
      }
    }
  };

  const unsigned workers = resolve_threads(threads, t_mc * std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    work(0, t_mc);
    return values;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (t_mc + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(t_mc, w * chunk);
    const std::size_t end = std::min(t_mc, begin + chunk);
    if (begin < end) pool.emplace_back(work, begin, end);
  }
  return values;  // jthreads join on destruction, before the move-out
}

ScenarioSample simulate(const RemappedPortfolio& p, std::size_t t_mc, std::uint64_t seed,
                        unsigned threads) {
  if (t_mc < 1) throw Error(ErrorCode::InvalidArgument, "t_mc must be at least 1");
  ScenarioSample s;
  s.seed = seed;
  s.t_mc = t_mc;
  s.frozen = FrozenFactors(seed, p.size(), t_mc);
  const std::span<const double> delta(p.delta().data(), static_cast<std::size_t>(p.size()));
  const std::span<const double> lambda(p.lambda().data(), static_cast<std::size_t>(p.size()));
  s.values = scenario_values(p.theta(), delta, lambda, s.frozen, threads);
  std::sort(s.values.begin(), s.values.end());
  return s;
}

ScenarioSample sample_from_values(std::vector<double> values) {
  ScenarioSample s;
  s.t_mc = values.size();
  s.values = std::move(values);
  std::sort(s.values.begin(), s.values.end());
  s.frozen = FrozenFactors(0, 0, s.t_mc);
  return s;
}

double historical_var(const ScenarioSample& s, double level) {
  require_level(level);
  const double t = tail_index(s.t_mc, level);
  if (t < 1.0) {
    throw Error(ErrorCode::InsufficientTailSample,
                "T * level = " + std::to_string(t) + " leaves no scenario in the tail");
  }
  if (t == std::floor(t)) return -s.values[static_cast<std::size_t>(t) - 1];
  const auto lower = static_cast<std::size_t>(std::floor(t));
  const auto upper = std::min(lower + 1, s.t_mc);
  return -(s.values[lower - 1] + s.values[upper - 1]) / 2.0;
}

double historical_es(const ScenarioSample& s, double level) {
  require_level(level);
  const double t = tail_index(s.t_mc, level);
  if (t < 1.0) {
    throw Error(ErrorCode::InsufficientTailSample,
                "T * level = " + std::to_string(t) + " leaves no scenario in the tail");
  }
  return -tail_mean(s.values, static_cast<std::size_t>(std::floor(t)));
}

double order_statistic_coverage_exact(std::size_t t_mc, double level, std::size_t t_minus,
                                      std::size_t t_plus) {
  if (t_plus <= t_minus) return 0.0;
  const double n = static_cast<double>(t_mc);
  const double log_norm = std::lgamma(n + 1.0);
  const double log_p = std::log(level);
  const double log_q = std::log1p(-level);
  long double sum = 0.0L;
  for (std::size_t k = t_minus; k < t_plus && k <= t_mc; ++k) {
    const double kk = static_cast<double>(k);
    const double log_pmf =
        log_norm - std::lgamma(kk + 1.0) - std::lgamma(n - kk + 1.0) + kk * log_p + (n - kk) * log_q;
    sum += std::exp(static_cast<long double>(log_pmf));
  }
  return static_cast<double>(std::min(sum, 1.0L));
}

double order_statistic_coverage(std::size_t t_mc, double level, std::size_t t_minus,
                                std::size_t t_plus) {
  const double mean = static_cast<double>(t_mc) * level;
  if (mean <= 50.0) return order_statistic_coverage_exact(t_mc, level, t_minus, t_plus);
  if (t_plus <= t_minus) return 0.0;
  const double sd = std::sqrt(mean * (1.0 - level));
  const double hi = (static_cast<double>(t_plus) - 0.5 - mean) / sd;
  const double lo = (static_cast<double>(t_minus) - 0.5 - mean) / sd;
  return normal_cdf(hi) - normal_cdf(lo);
}

namespace {

struct OrderPair {
  std::size_t t_minus;
  std::size_t t_plus;
};

OrderPair find_order_pair(std::size_t t_mc, double level, double cl) {
  require_level(level);
  if (!(cl > 0.0 && cl < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "confidence level must lie in (0, 1)");
  }
  const double t = tail_index(t_mc, level);
  const double lo_max_d = std::floor(t);
  if (lo_max_d < 1.0) {
    throw Error(ErrorCode::InsufficientTailSample, "T * level is below one scenario");
  }
  const auto lo_max = static_cast<std::size_t>(lo_max_d);
  const auto hi_min = static_cast<std::size_t>(std::ceil(t));
  const double sd = std::sqrt(static_cast<double>(t_mc) * level * (1.0 - level));
  const double lo_min_d = std::max(1.0, std::floor(t - 15.0 * sd - 5.0));
  const auto lo_min = static_cast<std::size_t>(lo_min_d);
  auto coverage = [&](std::size_t a, std::size_t b) { return order_statistic_coverage(t_mc, level, a, b); };

  std::optional<OrderPair> best;
  double best_asym = std::numeric_limits<double>::infinity();
  for (std::size_t tm = lo_max; tm >= lo_min; --tm) {
    const std::size_t tp_min = std::max(hi_min, tm + 1);
    if (tp_min > t_mc) {
      if (tm == lo_min) break;
      continue;
    }
    // Smallest t_plus reaching cl (coverage grows with t_plus).
    std::size_t left = tp_min, right = t_mc;
    if (coverage(tm, right) < cl) {
      if (tm == lo_min) break;
      continue;
    }
    while (left < right) {
      const std::size_t mid = left + (right - left) / 2;
      if (coverage(tm, mid) >= cl) right = mid; else left = mid + 1;
    }
    const std::size_t tp = left;
    const bool shrinkable = tm + 1 <= lo_max && coverage(tm + 1, tp) >= cl;
    if (!shrinkable) {
      const double asym = std::abs((static_cast<double>(tp) - t) - (t - static_cast<double>(tm)));
      if (!best || asym < best_asym - 1e-12 ||
          (std::abs(asym - best_asym) <= 1e-12 && tp < best->t_plus)) {
        best = OrderPair{tm, tp};
        best_asym = asym;
      }
    }
    if (tm == lo_min) break;
  }
  if (!best) {
    throw Error(ErrorCode::IntervalNotFound, "no order-statistics interval reaches confidence " +
                                                 std::to_string(cl) + " at level " + std::to_string(level));
  }
  return *best;
}

}  // namespace

McEstimate var_ci(const ScenarioSample& s, double level, double cl) {
  const OrderPair pair = find_order_pair(s.t_mc, level, cl);
  McEstimate out;
  out.point = historical_var(s, level);
  out.confidence_level = cl;
  out.t_minus = pair.t_minus;
  out.t_plus = pair.t_plus;
  out.upper_offset = -s.values[pair.t_minus - 1] - out.point;
  out.lower_offset = out.point + s.values[pair.t_plus - 1];
  return out;
}

McEstimate es_ci(const ScenarioSample& s, double level, double cl) {
  const OrderPair pair = find_order_pair(s.t_mc, level, cl);
  McEstimate out;
  out.point = historical_es(s, level);
  out.confidence_level = cl;
  out.t_minus = pair.t_minus;
  out.t_plus = pair.t_plus;
  out.upper_offset = -tail_mean(s.values, pair.t_minus) - out.point;
  out.lower_offset = out.point + tail_mean(s.values, pair.t_plus);
  return out;
}

double default_shock(double beta_value) { return std::max(0.01 * std::abs(beta_value), 0.01); }

namespace {

struct ShockedSamples {
  ScenarioSample up;
  ScenarioSample down;
};

// Scenario values under beta +- shock, sharing every draw.
ShockedSamples shocked_samples(const RemappedPortfolio& p, Parameter beta, double shock,
                               std::size_t t_mc, std::uint64_t seed, unsigned threads) {
  const double base = parameter_value(p, beta);
  const FrozenFactors frozen(seed, p.size(), t_mc);
  std::vector<double> delta(p.delta().data(), p.delta().data() + p.size());
  std::vector<double> lambda(p.lambda().data(), p.lambda().data() + p.size());
  std::vector<double> up, down;
  if (beta.kind == Parameter::Kind::Theta) {
    std::vector<double> rest = scenario_values(0.0, delta, lambda, frozen, threads);
    up = rest;
    down = std::move(rest);
    for (double& v : up) v += base + shock;
    for (double& v : down) v += base - shock;
  } else {
    const auto i = static_cast<std::size_t>(beta.index);
    // Everything except factor i; the i-th term is added per shock.
    delta[i] = 0.0;
    lambda[i] = 0.0;
    const std::vector<double> rest = scenario_values(p.theta(), delta, lambda, frozen, threads);
    double d_up = p.delta()[beta.index], d_down = d_up;
    double l_up = p.lambda()[beta.index], l_down = l_up;
    if (beta.kind == Parameter::Kind::Delta) {
      d_up = base + shock;
      d_down = base - shock;
    } else {
      l_up = base + shock;
      l_down = base - shock;
    }
    up.resize(t_mc);
    down.resize(t_mc);
    for (std::size_t t = 0; t < t_mc; ++t) {
      const double y = frozen.draw(beta.index, t);
      up[t] = rest[t] + (d_up + 0.5 * l_up * y) * y;
      down[t] = rest[t] + (d_down + 0.5 * l_down * y) * y;
    }
  }
  ShockedSamples out{sample_from_values(std::move(up)), sample_from_values(std::move(down))};
  out.up.seed = out.down.seed = seed;
  out.up.frozen = out.down.frozen = frozen;
  return out;
}

McEstimate propagate(const McEstimate& up, const McEstimate& down, double shock) {
  McEstimate out;
  const double width = 2.0 * shock;
  out.point = (up.point - down.point) / width;
  out.upper_offset = (up.upper_offset + down.lower_offset) / width;
  out.lower_offset = (up.lower_offset + down.upper_offset) / width;
  out.confidence_level = up.confidence_level;
  out.t_minus = up.t_minus;
  out.t_plus = up.t_plus;
  return out;
}

}  // namespace

double fd_var_difference(const RemappedPortfolio& p, Parameter beta, double shock, double level,
                         std::size_t t_mc, std::uint64_t seed, unsigned threads) {
  const ShockedSamples s = shocked_samples(p, beta, shock, t_mc, seed, threads);
  return historical_var(s.up, level) - historical_var(s.down, level);
}

FdSensitivity fd_sensitivity(const RemappedPortfolio& p, Parameter beta, double shock, double level,
                             std::size_t t_mc, std::uint64_t seed, double cl, unsigned threads) {
  if (!(shock > 0.0)) throw Error(ErrorCode::InvalidArgument, "shock must be positive");
  require_level(level);
  (void)parameter_value(p, beta);
  FdSensitivity out;
  if (beta.kind == Parameter::Kind::Theta) {
    // A theta shift translates every scenario: the difference quotient is
    // exactly -1 and carries no sampling error.
    out.dvar = McEstimate{-1.0, 0.0, 0.0, cl, 0, 0};
    out.des = McEstimate{-1.0, 0.0, 0.0, cl, 0, 0};
    return out;
  }
  const ShockedSamples s = shocked_samples(p, beta, shock, t_mc, seed, threads);
  out.dvar = propagate(var_ci(s.up, level, cl), var_ci(s.down, level, cl), shock);
  out.des = propagate(es_ci(s.up, level, cl), es_ci(s.down, level, cl), shock);
  return out;
}

SampleMoments sample_moments(std::span<const double> values) {
  SampleMoments m;
  const std::size_t n = values.size();
  if (n == 0) return m;
  long double sum = 0.0L;
  for (double v : values) sum += v;
  const long double mean = sum / static_cast<long double>(n);
  long double c[9] = {};
  for (double v : values) {
    const long double d = static_cast<long double>(v) - mean;
    long double pw = d * d;
    for (int k = 2; k <= 8; ++k) {
      c[k] += pw;
      pw *= d;
    }
  }
  for (int k = 2; k <= 8; ++k) c[k] /= static_cast<long double>(n);
  const double nn = static_cast<double>(n);
  const double m2 = static_cast<double>(c[2]), m3 = static_cast<double>(c[3]);
  const double m4 = static_cast<double>(c[4]), m5 = static_cast<double>(c[5]);
  const double m6 = static_cast<double>(c[6]), m8 = static_cast<double>(c[8]);
  m.mean = static_cast<double>(mean);
  m.m2 = m2;
  m.m3 = m3;
  m.m4 = m4;
  m.se_mean = std::sqrt(m2 / nn);
  m.se_m2 = std::sqrt(std::max(0.0, m4 - m2 * m2) / nn);
  m.se_m3 = std::sqrt(std::max(0.0, m6 - m3 * m3 - 6.0 * m2 * m4 + 9.0 * m2 * m2 * m2) / nn);
  m.se_m4 = std::sqrt(std::max(0.0, m8 - m4 * m4 - 8.0 * m3 * m5 + 16.0 * m2 * m3 * m3) / nn);
  return m;
}

}  // namespace dgn
