#ifndef DGN_QUADRATURE_HPP
#define DGN_QUADRATURE_HPP

// Semi-infinite Fourier integrals
//
//   int_0^inf g(w) cos(w x) dw,   int_0^inf g(w) sin(w x) dw
//
// for smooth, absolutely integrable g. For x > 0 the half line is cut into
// cells spanning an odd number of half periods of the weight, each cell is
// integrated adaptively, and the (roughly alternating) sequence of partial
// sums is accelerated with Wynn's epsilon algorithm. For x = 0 the cells
// grow geometrically and the last cell bounds the neglected tail.

#include <array>
#include <functional>
#include <vector>

namespace dgn {

struct QuadConfig {
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;
  int max_cycles = 200;
  int max_subdivisions_per_cycle = 50;
};

struct QuadResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  long evaluations = 0;
  bool converged = false;
};

using RealFunction = std::function<double(double)>;

/// int_0^inf g(w) cos(w x) dw. decay_scale is the frequency over which g
/// falls off noticeably; it only sizes the cells. Throws
/// NonFiniteIntegrand if g returns NaN or infinity. Running out of cycles
/// is not an error: the best estimate comes back with converged = false.
QuadResult fourier_cos(const RealFunction& g, double x, const QuadConfig& cfg = {},
                       double decay_scale = 1.0);

/// int_0^inf g(w) sin(w x) dw, same contract as fourier_cos.
QuadResult fourier_sin(const RealFunction& g, double x, const QuadConfig& cfg = {},
                       double decay_scale = 1.0);

/// 15-node Gauss-Legendre rule on [-1, 1].
struct GaussLegendre15 {
  std::array<double, 15> nodes;
  std::array<double, 15> weights;
};
const GaussLegendre15& gauss_legendre_15();

/// Adaptive bisection on [a, b] with the 15-node rule: a panel's error is
/// the gap between the rule on the whole panel and on its two halves.
struct AdaptiveResult {
  double value = 0.0;
  double abs_error = 0.0;
  double abs_integral = 0.0;  // estimate of int |f|
  long evaluations = 0;
  int subdivisions = 0;
};
AdaptiveResult integrate_adaptive(const RealFunction& f, double a, double b, double abs_tol,
                                  int max_subdivisions);

/// Wynn's epsilon algorithm fed one partial sum at a time.
class WynnEpsilon {
 public:
  /// Adds the next partial sum and returns the current extrapolation.
  double add(double partial_sum);

  double estimate() const { return estimate_; }
  /// |e_n - e_{n-1}| + |e_n - e_{n-2}| over the last three estimates;
  /// infinite until three are available.
  double error() const;
  int terms() const { return static_cast<int>(table_.size()); }

 private:
  std::vector<double> table_;
  std::vector<double> history_;
  double estimate_ = 0.0;
};

}  // namespace dgn

#endif  // DGN_QUADRATURE_HPP
