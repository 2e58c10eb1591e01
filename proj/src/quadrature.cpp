#include "dgn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "dgn/error.hpp"

namespace dgn {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kRoundoffFactor = 50.0;

GaussLegendre15 build_gauss_legendre_15() {
  constexpr int n = 15;
  GaussLegendre15 rule{};
  for (int i = 0; i < n; ++i) {
    long double x = std::cos(std::numbers::pi_v<long double> * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const long double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-19L) break;
    }
    rule.nodes[i] = static_cast<double>(x);
    rule.weights[i] = static_cast<double>(2 / ((1 - x * x) * dp * dp));
  }
  return rule;
}

struct PanelRule {
  double value;
  double abs_value;
};

PanelRule apply_rule(const RealFunction& f, double a, double b, long& evaluations) {
  const auto& rule = gauss_legendre_15();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  double abs_sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double y = f(mid + half * rule.nodes[i]);
    if (!std::isfinite(y)) {
      throw Error(ErrorCode::NonFiniteIntegrand,
                  "integrand is not finite at w = " + std::to_string(mid + half * rule.nodes[i]));
    }
    sum += rule.weights[i] * y;
    abs_sum += rule.weights[i] * std::abs(y);
  }
  evaluations += static_cast<long>(rule.nodes.size());
  return {sum * half, abs_sum * half};
}

struct Panel {
  double a, b;
  PanelRule left, right;
  double error;

  double value() const { return left.value + right.value; }
  double abs_value() const { return left.abs_value + right.abs_value; }
  bool operator<(const Panel& other) const { return error < other.error; }
};

Panel make_panel(const RealFunction& f, double a, double b, const PanelRule& coarse,
                 long& evaluations) {
  const double mid = 0.5 * (a + b);
  Panel p{a, b, apply_rule(f, a, mid, evaluations), apply_rule(f, mid, b, evaluations), 0.0};
  p.error = std::max(std::abs(coarse.value - p.value()), kRoundoffFactor * kEps * p.abs_value());
  return p;
}

enum class Weight { Cos, Sin };

QuadResult integrate_fourier(const RealFunction& g, double x, Weight weight, const QuadConfig& cfg,
                             double decay_scale) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw Error(ErrorCode::InvalidArgument, "oscillation frequency must be finite and >= 0");
  }
  if (!(decay_scale > 0.0) || !std::isfinite(decay_scale)) {
    throw Error(ErrorCode::InvalidArgument, "decay scale must be finite and positive");
  }
  if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0) || cfg.max_cycles < 1 ||
      cfg.max_subdivisions_per_cycle < 1) {
    throw Error(ErrorCode::InvalidArgument, "quadrature configuration must be positive");
  }

  QuadResult out;
  if (weight == Weight::Sin && x == 0.0) {
    out.converged = true;
    return out;
  }
  const RealFunction integrand = [&](double w) {
    return g(w) * (weight == Weight::Cos ? std::cos(w * x) : std::sin(w * x));
  };

  const double half_period = x > 0.0 ? std::numbers::pi / x : std::numeric_limits<double>::infinity();
  // Half periods longer than a million decay scales carry no usable
  // oscillation; treat the weight as non-oscillatory there.
  const bool oscillatory = half_period < 1e6 * decay_scale;

  constexpr double kCellShare = 0.9;  // cell k gets (1 - r) r^k of the budget
  double partial = 0.0;
  double cell_errors = 0.0;
  double last_cell = 0.0;
  double last_abs_cell = 0.0;
  WynnEpsilon wynn;
  double budget_share = 1.0 - kCellShare;

  for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
    double a = 0.0, b = 0.0;
    if (oscillatory) {
      const double odd = 2.0 * std::floor(decay_scale / (2.0 * half_period)) + 1.0;
      const double length = odd * half_period;
      a = cycle * length;
      b = (cycle + 1) * length;
    } else {
      a = cycle == 0 ? 0.0 : decay_scale * std::ldexp(1.0, cycle - 1);
      b = decay_scale * std::ldexp(1.0, cycle);
    }
    const double target = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(partial));
    const double cell_tol = 0.5 * target * budget_share;
    budget_share *= kCellShare;

    const AdaptiveResult cell =
        integrate_adaptive(integrand, a, b, cell_tol, cfg.max_subdivisions_per_cycle);
    out.evaluations += cell.evaluations;
    cell_errors += cell.abs_error;
    const double prev_cell = last_cell;
    last_cell = cell.value;
    last_abs_cell = cell.abs_integral;
    partial += cell.value;

    double best = partial;
    double best_error = std::numeric_limits<double>::infinity();
    if (oscillatory) {
      const double extrapolated = wynn.add(partial);
      if (cycle >= 1) best_error = std::abs(last_cell) + std::abs(prev_cell);
      if (cycle >= 3 && wynn.error() < best_error) {
        best = extrapolated;
        best_error = wynn.error();
      }
    } else if (cycle >= 1) {
      // Remaining tail is bounded by the mass of the latest cell, which is
      // as wide as everything before it.
      best_error = last_abs_cell;
    }

    out.value = best;
    out.abs_error_estimate = best_error + cell_errors;
    const double tol = std::max(cfg.abs_tol, cfg.rel_tol * std::abs(best));
    if (out.abs_error_estimate <= tol) {
      out.converged = true;
      return out;
    }
  }
  out.converged = false;
  return out;
}

}  // namespace

const GaussLegendre15& gauss_legendre_15() {
  static const GaussLegendre15 rule = build_gauss_legendre_15();
  return rule;
}

AdaptiveResult integrate_adaptive(const RealFunction& f, double a, double b, double abs_tol,
                                  int max_subdivisions) {
  AdaptiveResult out;
  const PanelRule coarse = apply_rule(f, a, b, out.evaluations);
  std::priority_queue<Panel> panels;
  panels.push(make_panel(f, a, b, coarse, out.evaluations));
  double total_error = panels.top().error;
  while (total_error > abs_tol && out.subdivisions < max_subdivisions) {
    Panel worst = panels.top();
    // Stop once the worst panel is already at the rounding floor.
    if (worst.error <= kRoundoffFactor * kEps * worst.abs_value()) break;
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel lower = make_panel(f, worst.a, mid, worst.left, out.evaluations);
    Panel upper = make_panel(f, mid, worst.b, worst.right, out.evaluations);
    total_error += lower.error + upper.error - worst.error;
    panels.push(std::move(lower));
    panels.push(std::move(upper));
    ++out.subdivisions;
  }
  while (!panels.empty()) {
    out.value += panels.top().value();
    out.abs_error += panels.top().error;
    out.abs_integral += panels.top().abs_value();
    panels.pop();
  }
  return out;
}

double WynnEpsilon::add(double partial_sum) {
  constexpr double kBig = std::numeric_limits<double>::max() / 16;
  constexpr double kSmall = std::numeric_limits<double>::min() * 16;
  const std::size_t n = table_.size();
  table_.push_back(partial_sum);
  double aux2 = 0.0;
  for (std::size_t j = n; j > 0; --j) {
    const double aux1 = aux2;
    aux2 = table_[j - 1];
    const double diff = table_[j] - aux2;
    table_[j - 1] = std::abs(diff) <= kSmall ? kBig : aux1 + 1.0 / diff;
  }
  const std::size_t count = n + 1;
  double value = (count & 1) ? table_[0] : table_[1];
  if (!std::isfinite(value) || std::abs(value) > 0.01 * kBig) {
    value = history_.empty() ? partial_sum : history_.back();
  }
  history_.push_back(value);
  estimate_ = value;
  return value;
}

double WynnEpsilon::error() const {
  const std::size_t n = history_.size();
  if (n < 3) return std::numeric_limits<double>::infinity();
  const double e = history_[n - 1];
  return std::abs(e - history_[n - 2]) + std::abs(e - history_[n - 3]);
}

QuadResult fourier_cos(const RealFunction& g, double x, const QuadConfig& cfg, double decay_scale) {
  return integrate_fourier(g, x, Weight::Cos, cfg, decay_scale);
}

QuadResult fourier_sin(const RealFunction& g, double x, const QuadConfig& cfg, double decay_scale) {
  return integrate_fourier(g, x, Weight::Sin, cfg, decay_scale);
}

}  // namespace dgn
