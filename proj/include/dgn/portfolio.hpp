#ifndef DGN_PORTFOLIO_HPP
#define DGN_PORTFOLIO_HPP

// Delta-Gamma-Normal portfolio model.
//
// A portfolio variation over a fixed horizon is the quadratic form
//
//   V = theta + Delta' X + 1/2 X' Gamma X,   X ~ N(0, Sigma).
//
// Factoring Sigma = C C' with C' Gamma C diagonal turns it into a sum of
// independent one-dimensional terms,
//
//   V = theta + sum_i (delta_i Y_i + lambda_i Y_i^2 / 2),   Y ~ N(0, I),
//
// which is the form every other module works with. All types here are
// templated on the scalar so the same code runs in double for production and
// in long double for finite-difference oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dgn/error.hpp"

namespace dgn {

using Index = Eigen::Index;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Default relative tolerance used to decide that two eigenvalues coincide
/// (and that the smallest one is zero).
inline constexpr double kDefaultGroupTol = 1e-9;

namespace detail {

template <typename Scalar>
bool is_symmetric(const MatrixX<Scalar>& m, Scalar rel_tol) {
  const Scalar scale = m.cwiseAbs().maxCoeff();
  if (scale == Scalar(0)) return true;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace detail

/// Raw model inputs (theta, Delta, Gamma, Sigma). Validated on construction;
/// Gamma and Sigma are stored exactly symmetrised.
template <typename Scalar>
class PortfolioSpecT {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  PortfolioSpecT(Scalar theta, Vector delta, Matrix gamma, Matrix sigma)
      : theta_(theta), delta_(std::move(delta)), gamma_(std::move(gamma)), sigma_(std::move(sigma)) {
    const Index n = delta_.size();
    if (gamma_.rows() != n || gamma_.cols() != n || sigma_.rows() != n || sigma_.cols() != n) {
      throw Error(ErrorCode::DimensionMismatch,
                  "delta has length " + std::to_string(n) + " but gamma is " +
                      std::to_string(gamma_.rows()) + "x" + std::to_string(gamma_.cols()) +
                      " and sigma is " + std::to_string(sigma_.rows()) + "x" +
                      std::to_string(sigma_.cols()));
    }
    if (!std::isfinite(static_cast<double>(theta_)) || !delta_.allFinite() || !gamma_.allFinite() ||
        !sigma_.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "portfolio parameters must be finite");
    }
    if (!detail::is_symmetric<Scalar>(sigma_, Scalar(1e-12))) {
      throw Error(ErrorCode::AsymmetricInput, "sigma is not symmetric within relative tolerance 1e-12");
    }
    if (!detail::is_symmetric<Scalar>(gamma_, Scalar(1e-12))) {
      throw Error(ErrorCode::AsymmetricInput, "gamma is not symmetric within relative tolerance 1e-12");
    }
    sigma_ = (sigma_ + sigma_.transpose()) / Scalar(2);
    gamma_ = (gamma_ + gamma_.transpose()) / Scalar(2);
    Eigen::LLT<Matrix> llt(sigma_);
    if (n == 0 || llt.info() != Eigen::Success) {
      throw Error(ErrorCode::NotPositiveDefinite, "sigma is not positive definite (Cholesky failed)");
    }
  }

  Scalar theta() const { return theta_; }
  const Vector& delta() const { return delta_; }
  const Matrix& gamma() const { return gamma_; }
  const Matrix& sigma() const { return sigma_; }
  Index size() const { return delta_.size(); }

 private:
  Scalar theta_;
  Vector delta_;
  Matrix gamma_;
  Matrix sigma_;
};

/// Independent-factor parameters (theta, delta, lambda). lambda is kept
/// sorted ascending, ties broken by descending |delta|.
template <typename Scalar>
class RemappedPortfolioT {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;

  RemappedPortfolioT(Scalar theta, Vector delta, Vector lambda)
      : RemappedPortfolioT(theta, std::move(delta), std::move(lambda), std::nullopt) {}

  RemappedPortfolioT(Scalar theta, Vector delta, Vector lambda, std::optional<Matrix> factor_map)
      : theta_(theta) {
    const Index n = delta.size();
    if (lambda.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "delta and lambda lengths differ");
    }
    if (factor_map && (factor_map->rows() != n || factor_map->cols() != n)) {
      throw Error(ErrorCode::DimensionMismatch, "factor map must be N x N");
    }
    if (!std::isfinite(static_cast<double>(theta)) || !delta.allFinite() || !lambda.allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "portfolio parameters must be finite");
    }
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      if (lambda[a] != lambda[b]) return lambda[a] < lambda[b];
      return std::abs(delta[a]) > std::abs(delta[b]);
    });
    delta_.resize(n);
    lambda_.resize(n);
    if (factor_map) factor_map_ = Matrix(n, n);
    for (Index k = 0; k < n; ++k) {
      const Index src = order[static_cast<std::size_t>(k)];
      delta_[k] = delta[src];
      lambda_[k] = lambda[src];
      if (factor_map) factor_map_->col(k) = factor_map->col(src);
    }
  }

  Scalar theta() const { return theta_; }
  const Vector& delta() const { return delta_; }
  const Vector& lambda() const { return lambda_; }
  const std::optional<Matrix>& factor_map() const { return factor_map_; }
  Index size() const { return delta_.size(); }

  /// V is the constant theta: no factor carries any exposure.
  bool is_degenerate() const {
    return (delta_.size() == 0) || (delta_.cwiseAbs().maxCoeff() == Scalar(0) &&
                                    lambda_.cwiseAbs().maxCoeff() == Scalar(0));
  }

  /// Same portfolio with theta, delta or lambda replaced; used for shocks.
  RemappedPortfolioT with_theta(Scalar theta) const {
    return RemappedPortfolioT(theta, delta_, lambda_);
  }
  RemappedPortfolioT with_delta(Index i, Scalar value) const {
    Vector d = delta_;
    d[i] = value;
    return RemappedPortfolioT(theta_, std::move(d), lambda_);
  }
  RemappedPortfolioT with_lambda(Index i, Scalar value) const {
    Vector l = lambda_;
    l[i] = value;
    return RemappedPortfolioT(theta_, delta_, std::move(l));
  }

 private:
  Scalar theta_;
  Vector delta_;
  Vector lambda_;
  std::optional<Matrix> factor_map_;
};

/// Solves C C' = Sigma, C' Gamma C = diag(lambda) with C = L O, L the
/// Cholesky factor of Sigma and O the eigenvectors of L' Gamma L.
template <typename Scalar>
RemappedPortfolioT<Scalar> remap(const PortfolioSpecT<Scalar>& spec) {
  using Matrix = MatrixX<Scalar>;
  Eigen::LLT<Matrix> llt(spec.sigma());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "sigma is not positive definite (Cholesky failed)");
  }
  const Matrix lower = llt.matrixL();
  const Matrix whitened = lower.transpose() * spec.gamma() * lower;
  Eigen::SelfAdjointEigenSolver<Matrix> eig((whitened + whitened.transpose()) / Scalar(2));
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "eigen decomposition of L' Gamma L failed");
  }
  Matrix factor_map = lower * eig.eigenvectors();
  VectorX<Scalar> delta = factor_map.transpose() * spec.delta();
  return RemappedPortfolioT<Scalar>(spec.theta(), std::move(delta), eig.eigenvalues(),
                                    std::move(factor_map));
}

/// Central moments and standardised shape of V.
template <typename Scalar>
struct MomentSetT {
  Scalar mu1{};  // mean
  Scalar mu2{};
  Scalar mu3{};
  Scalar mu4{};
  std::optional<Scalar> skewness;
  std::optional<Scalar> excess_kurtosis;
};

namespace detail {

// mu4 is assembled as (fourth cumulant) + 3 mu2^2 so that a Gaussian
// portfolio reports skewness and excess kurtosis of exactly zero.
template <typename Scalar>
MomentSetT<Scalar> finish_moments(Scalar mu1, Scalar mu2, Scalar mu3, Scalar cumulant4) {
  MomentSetT<Scalar> m;
  m.mu1 = mu1;
  m.mu2 = mu2;
  m.mu3 = mu3;
  m.mu4 = cumulant4 + Scalar(3) * mu2 * mu2;
  if (mu2 > Scalar(0)) {
    m.skewness = mu3 / std::pow(mu2, Scalar(1.5));
    m.excess_kurtosis = cumulant4 / (mu2 * mu2);
  }
  return m;
}

}  // namespace detail

template <typename Scalar>
MomentSetT<Scalar> moments(const PortfolioSpecT<Scalar>& spec) {
  using Matrix = MatrixX<Scalar>;
  const Matrix gs = spec.gamma() * spec.sigma();
  const Matrix gs2 = gs * gs;
  const auto& d = spec.delta();
  const auto& s = spec.sigma();
  const Scalar mu1 = spec.theta() + gs.trace() / Scalar(2);
  const Scalar mu2 = d.dot(s * d) + gs2.trace() / Scalar(2);
  const Scalar mu3 = Scalar(3) * d.dot(s * gs * d) + (gs2 * gs).trace();
  const Scalar k4 = Scalar(12) * d.dot(s * gs2 * d) + Scalar(3) * (gs2 * gs2).trace();
  return detail::finish_moments(mu1, mu2, mu3, k4);
}

/// Same quantities for the independent-factor form (Sigma = I, Gamma = diag(lambda)).
template <typename Scalar>
MomentSetT<Scalar> moments(const RemappedPortfolioT<Scalar>& p) {
  const auto d2 = p.delta().array().square();
  const auto l = p.lambda().array();
  const Scalar mu1 = p.theta() + l.sum() / Scalar(2);
  const Scalar mu2 = d2.sum() + l.square().sum() / Scalar(2);
  const Scalar mu3 = Scalar(3) * (d2 * l).sum() + l.cube().sum();
  const Scalar k4 = Scalar(12) * (d2 * l.square()).sum() + Scalar(3) * l.square().square().sum();
  return detail::finish_moments(mu1, mu2, mu3, k4);
}

/// Band of contour heights (nu_minus, nu_plus) on which the characteristic
/// function is analytic.
template <typename Scalar>
struct StripT {
  Scalar nu_minus;
  Scalar nu_plus;

  bool contains(Scalar nu) const { return nu > nu_minus && nu < nu_plus; }
};

template <typename Scalar>
Scalar zero_threshold(const RemappedPortfolioT<Scalar>& p, Scalar group_tol) {
  const Scalar max_abs = p.size() ? p.lambda().cwiseAbs().maxCoeff() : Scalar(0);
  return group_tol * std::max(Scalar(1), max_abs);
}

template <typename Scalar>
StripT<Scalar> strip_of_regularity(const RemappedPortfolioT<Scalar>& p,
                                   Scalar group_tol = Scalar(kDefaultGroupTol)) {
  constexpr Scalar inf = std::numeric_limits<Scalar>::infinity();
  StripT<Scalar> strip{-inf, inf};
  if (p.size() == 0) return strip;
  const Scalar thr = zero_threshold(p, group_tol);
  const Scalar lo = p.lambda()[0];
  const Scalar hi = p.lambda()[p.size() - 1];
  if (lo < -thr) strip.nu_plus = Scalar(1) / std::abs(lo);
  if (hi > thr) strip.nu_minus = Scalar(-1) / hi;
  return strip;
}

enum class TailRegime { NegativeMin, ZeroMin, PositiveMin };

inline const char* to_string(TailRegime r) {
  switch (r) {
    case TailRegime::NegativeMin: return "NegativeMin";
    case TailRegime::ZeroMin: return "ZeroMin";
    case TailRegime::PositiveMin: return "PositiveMin";
  }
  return "?";
}

/// Eigenvalue grouping and asymptotic metadata for the tails of p(V).
template <typename Scalar>
struct TailProfileT {
  TailRegime regime{TailRegime::ZeroMin};
  std::vector<Scalar> distinct_lambdas;
  std::vector<int> multiplicities;
  std::vector<Scalar> delta_bar_sq;
  /// a_k = sqrt(delta_bar_sq_k) / |lambda_k|, absent for a zero eigenvalue.
  std::vector<std::optional<Scalar>> a;
  Scalar v_inf{-std::numeric_limits<Scalar>::infinity()};
  Scalar v_sup{std::numeric_limits<Scalar>::infinity()};
  /// Left-tail power exponent: (m1-3)/4 or m1/2-1 for NegativeMin,
  /// -1/2 sum_{k>=2} m_k for ZeroMin, N/2-1 for PositiveMin.
  Scalar m_bar{};
  std::optional<Scalar> v0;  // ZeroMin only
  Scalar theta{};

  int dimension() const { return std::accumulate(multiplicities.begin(), multiplicities.end(), 0); }
};

template <typename Scalar>
TailProfileT<Scalar> tail_profile(const RemappedPortfolioT<Scalar>& p,
                                  Scalar group_tol = Scalar(kDefaultGroupTol)) {
  TailProfileT<Scalar> tp;
  tp.theta = p.theta();
  const Index n = p.size();
  if (n == 0) return tp;
  const Scalar thr = zero_threshold(p, group_tol);
  const auto& lam = p.lambda();
  const auto& del = p.delta();

  std::vector<Scalar> zero_flag;
  for (Index i = 0; i < n;) {
    Index j = i + 1;
    while (j < n && std::abs(lam[j] - lam[i]) <= thr) ++j;
    Scalar value = 0;
    Scalar dsq = 0;
    for (Index k = i; k < j; ++k) {
      value += lam[k];
      dsq += del[k] * del[k];
    }
    value /= Scalar(j - i);
    if (std::abs(value) <= thr) value = Scalar(0);
    tp.distinct_lambdas.push_back(value);
    tp.multiplicities.push_back(static_cast<int>(j - i));
    tp.delta_bar_sq.push_back(dsq);
    if (value == Scalar(0)) {
      tp.a.push_back(std::nullopt);
    } else {
      tp.a.push_back(std::sqrt(dsq) / std::abs(value));
    }
    i = j;
  }

  const Scalar lambda_star = tp.distinct_lambdas.front();
  const std::size_t groups = tp.distinct_lambdas.size();
  const bool all_positive = lambda_star > Scalar(0);
  const bool all_negative = tp.distinct_lambdas.back() < Scalar(0);
  auto bound = [&](std::size_t first) {
    Scalar v = p.theta();
    for (std::size_t k = first; k < groups; ++k) {
      v -= tp.delta_bar_sq[k] / (Scalar(2) * tp.distinct_lambdas[k]);
    }
    return v;
  };
  if (all_positive) tp.v_inf = bound(0);
  if (all_negative) tp.v_sup = bound(0);

  if (lambda_star < Scalar(0)) {
    tp.regime = TailRegime::NegativeMin;
    const Scalar m1 = Scalar(tp.multiplicities.front());
    const Scalar d1 = tp.delta_bar_sq.front();
    const Scalar d_scale = std::max(Scalar(1), del.squaredNorm());
    const bool a1_nonzero = d1 > group_tol * group_tol * d_scale;
    tp.m_bar = a1_nonzero ? (m1 - Scalar(3)) / Scalar(4) : m1 / Scalar(2) - Scalar(1);
  } else if (lambda_star == Scalar(0)) {
    tp.regime = TailRegime::ZeroMin;
    int rest = 0;
    for (std::size_t k = 1; k < groups; ++k) rest += tp.multiplicities[k];
    tp.m_bar = -Scalar(rest) / Scalar(2);
    tp.v0 = bound(1);
  } else {
    tp.regime = TailRegime::PositiveMin;
    tp.m_bar = Scalar(n) / Scalar(2) - Scalar(1);
  }
  return tp;
}

/// Log of the leading left-tail behaviour of p(V), up to an additive
/// constant. The exponential factor decays as v -> -inf at rate 1/|lambda*|.
template <typename Scalar>
Scalar asymptotic_left_log_density(const TailProfileT<Scalar>& tp, Scalar v) {
  switch (tp.regime) {
    case TailRegime::NegativeMin: {
      const Scalar abs_ls = std::abs(tp.distinct_lambdas.front());
      const Scalar a1 = tp.a.front().value_or(Scalar(0));
      const Scalar av = std::abs(v);
      return tp.m_bar * std::log(av) - av / abs_ls + a1 * std::sqrt(Scalar(2) * av / abs_ls);
    }
    case TailRegime::ZeroMin: {
      const Scalar d1 = tp.delta_bar_sq.front();
      if (!(d1 > Scalar(0))) {
        throw Error(ErrorCode::WrongRegime, "zero-eigenvalue group carries no linear exposure");
      }
      const Scalar u = v - *tp.v0;
      const Scalar power = tp.m_bar == Scalar(0) ? Scalar(0) : tp.m_bar * std::log(std::abs(u));
      return power - u * u / (Scalar(2) * d1);
    }
    case TailRegime::PositiveMin:
      break;
  }
  throw Error(ErrorCode::WrongRegime, "left tail is bounded when the smallest eigenvalue is positive");
}

/// Power-law approach to the lower support bound, (v - v_inf)^(N/2-1), up
/// to an additive constant in log space; -inf at or below v_inf.
template <typename Scalar>
Scalar bounded_left_log_density(const TailProfileT<Scalar>& tp, Scalar v) {
  if (tp.regime != TailRegime::PositiveMin) {
    throw Error(ErrorCode::WrongRegime, "support is unbounded on the left");
  }
  if (v <= tp.v_inf) return -std::numeric_limits<Scalar>::infinity();
  return tp.m_bar * std::log(v - tp.v_inf);
}

using PortfolioSpec = PortfolioSpecT<double>;
using RemappedPortfolio = RemappedPortfolioT<double>;
using MomentSet = MomentSetT<double>;
using Strip = StripT<double>;
using TailProfile = TailProfileT<double>;

}  // namespace dgn

#endif  // DGN_PORTFOLIO_HPP
