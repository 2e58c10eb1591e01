#ifndef DGN_CHARACTERISTIC_HPP
#define DGN_CHARACTERISTIC_HPP

#include <complex>
#include <string>
#include <vector>

#include "dgn/portfolio.hpp"

namespace dgn {

/// Identifies one model parameter: theta, delta_i or lambda_i (0-based i).
struct Parameter {
  enum class Kind { Theta, Delta, Lambda };

  Kind kind{Kind::Theta};
  Index index{0};

  static Parameter theta() { return {Kind::Theta, 0}; }
  static Parameter delta(Index i) { return {Kind::Delta, i}; }
  static Parameter lambda(Index i) { return {Kind::Lambda, i}; }

  /// "theta", "delta_3", "lambda_12" (1-based factor numbering).
  std::string name() const {
    switch (kind) {
      case Kind::Theta: return "theta";
      case Kind::Delta: return "delta_" + std::to_string(index + 1);
      case Kind::Lambda: return "lambda_" + std::to_string(index + 1);
    }
    return "?";
  }

  /// Inverse of name(); throws UnknownParameter on anything else.
  static Parameter parse(const std::string& text) {
    if (text == "theta") return theta();
    auto tail_index = [&](std::size_t prefix) -> Index {
      const std::string digits = text.substr(prefix);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
        throw Error(ErrorCode::UnknownParameter, "cannot parse parameter '" + text + "'");
      }
      const long value = std::stol(digits);
      if (value < 1) throw Error(ErrorCode::UnknownParameter, "factor numbering starts at 1: '" + text + "'");
      return static_cast<Index>(value - 1);
    };
    if (text.rfind("delta_", 0) == 0) return delta(tail_index(6));
    if (text.rfind("lambda_", 0) == 0) return lambda(tail_index(7));
    throw Error(ErrorCode::UnknownParameter, "unknown parameter '" + text + "'");
  }

  bool operator==(const Parameter&) const = default;
};

/// theta, then delta_1..delta_N, then lambda_1..lambda_N.
inline std::vector<Parameter> all_parameters(Index n) {
  std::vector<Parameter> out;
  out.reserve(static_cast<std::size_t>(2 * n + 1));
  out.push_back(Parameter::theta());
  for (Index i = 0; i < n; ++i) out.push_back(Parameter::delta(i));
  for (Index i = 0; i < n; ++i) out.push_back(Parameter::lambda(i));
  return out;
}

template <typename Scalar>
Scalar parameter_value(const RemappedPortfolioT<Scalar>& p, Parameter beta) {
  switch (beta.kind) {
    case Parameter::Kind::Theta: return p.theta();
    case Parameter::Kind::Delta:
      if (beta.index >= 0 && beta.index < p.size()) return p.delta()[beta.index];
      break;
    case Parameter::Kind::Lambda:
      if (beta.index >= 0 && beta.index < p.size()) return p.lambda()[beta.index];
      break;
  }
  throw Error(ErrorCode::UnknownParameter, "parameter " + beta.name() + " is out of range");
}

/// Copy of p with parameter beta set to value. The copy is re-sorted, so a
/// lambda shock can move the factor to a different index; the distribution
/// of V does not depend on factor order.
template <typename Scalar>
RemappedPortfolioT<Scalar> with_parameter(const RemappedPortfolioT<Scalar>& p, Parameter beta,
                                          Scalar value) {
  (void)parameter_value(p, beta);
  switch (beta.kind) {
    case Parameter::Kind::Theta: return p.with_theta(value);
    case Parameter::Kind::Delta: return p.with_delta(beta.index, value);
    case Parameter::Kind::Lambda: return p.with_lambda(beta.index, value);
  }
  return p;
}

namespace detail {

template <typename Scalar>
void check_in_strip(const RemappedPortfolioT<Scalar>& p, const std::complex<Scalar>& phi) {
  const Scalar nu = phi.imag();
  for (Index i = 0; i < p.size(); ++i) {
    // Re(1 - i lambda phi) = 1 + lambda nu must stay positive.
    if (!(Scalar(1) + p.lambda()[i] * nu > Scalar(0))) {
      throw Error(ErrorCode::OutsideStrip,
                  "Im(phi) = " + std::to_string(static_cast<double>(nu)) +
                      " reaches the singularity of factor " + std::to_string(i + 1));
    }
  }
}

}  // namespace detail

/// f(phi) = E[exp(i phi V)] on the strip of regularity. Evaluated in log
/// space with the principal logarithm per factor; each 1 - i lambda phi has
/// positive real part inside the strip so no branch is crossed.
template <typename Scalar>
std::complex<Scalar> cf(const RemappedPortfolioT<Scalar>& p, std::complex<Scalar> phi) {
  using Complex = std::complex<Scalar>;
  detail::check_in_strip(p, phi);
  const Complex i_unit(0, 1);
  Complex log_f = i_unit * p.theta() * phi;
  const Complex phi2 = phi * phi;
  for (Index k = 0; k < p.size(); ++k) {
    const Scalar lam = p.lambda()[k];
    const Scalar del = p.delta()[k];
    const Complex one_minus = Scalar(1) - i_unit * lam * phi;
    if (lam != Scalar(0)) log_f -= std::log(one_minus) / Scalar(2);
    log_f -= del * del * phi2 / (Scalar(2) * one_minus);
  }
  return std::exp(log_f);
}

/// The multiplier g with df/dbeta = g(phi) f(phi). Exposed separately so
/// integrands can reuse a single evaluation of f for several parameters.
template <typename Scalar>
std::complex<Scalar> cf_grad_factor(const RemappedPortfolioT<Scalar>& p, std::complex<Scalar> phi,
                                    Parameter beta) {
  using Complex = std::complex<Scalar>;
  const Complex i_unit(0, 1);
  switch (beta.kind) {
    case Parameter::Kind::Theta: return i_unit * phi;
    case Parameter::Kind::Delta: {
      const Scalar del = p.delta()[beta.index];
      const Complex one_minus = Scalar(1) - i_unit * p.lambda()[beta.index] * phi;
      return -del * phi * phi / one_minus;
    }
    case Parameter::Kind::Lambda: {
      const Scalar del = p.delta()[beta.index];
      const Complex one_minus = Scalar(1) - i_unit * p.lambda()[beta.index] * phi;
      return i_unit * phi / (Scalar(2) * one_minus) *
             (Scalar(1) - del * del * phi * phi / one_minus);
    }
  }
  throw Error(ErrorCode::UnknownParameter, "unknown parameter kind");
}

/// Derivative of f(phi) with respect to theta, delta_i or lambda_i.
template <typename Scalar>
std::complex<Scalar> cf_grad(const RemappedPortfolioT<Scalar>& p, std::complex<Scalar> phi,
                             Parameter beta) {
  (void)parameter_value(p, beta);
  const std::complex<Scalar> f = cf(p, phi);
  return cf_grad_factor(p, phi, beta) * f;
}

}  // namespace dgn

#endif  // DGN_CHARACTERISTIC_HPP
