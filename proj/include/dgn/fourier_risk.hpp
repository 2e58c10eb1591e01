#ifndef DGN_FOURIER_RISK_HPP
#define DGN_FOURIER_RISK_HPP

// Value-at-Risk, Expected Shortfall and their first-order sensitivities by
// inverting the characteristic function along the contour Im(phi) = nu.
//
//   P(var)   = e^{-nu var}/pi Re int_0^inf f(w+i nu)/(nu - i w) e^{i w var} dw
//   p(v)     = e^{nu v}/pi   Re int_0^inf f(w+i nu) e^{-i w v} dw
//   ES       = var - e^{-nu var}/(pi P) Re int_0^inf f(w+i nu)/(w+i nu)^2 e^{i w var} dw
//   dvar/db  = e^{-nu var}/(pi p(-var)) Re int_0^inf df/db /(nu - i w) e^{i w var} dw
//   dES/db   = -e^{-nu var}/(pi P) Re int_0^inf df/db /(w+i nu)^2 e^{i w var} dw
//
// Losses are positive: var is the threshold with P(V < -var) = level.

#include <complex>
#include <functional>
#include <vector>

#include "dgn/characteristic.hpp"
#include "dgn/portfolio.hpp"
#include "dgn/quadrature.hpp"

namespace dgn {

/// Integration contour height nu with 0 < nu < nu_plus.
struct ContourChoice {
  double nu = 0.0;
  double nu_plus = 0.0;
};

/// Default contour: midpoint of (0, nu_plus) when nu_plus is finite,
/// otherwise 1/sqrt(mu2). Throws DegeneratePortfolio for constant V.
ContourChoice choose_nu(const RemappedPortfolio& p);

/// Validated user override; throws OutsideStrip unless 0 < nu < nu_plus.
ContourChoice contour_at(const RemappedPortfolio& p, double nu);

/// Contour height minimising e^{nu v} E[e^{-nu V}] over the strip (clamped
/// away from its edges). Keeps the density integrand at the scale of p(v),
/// which matters deep in the tails. May be negative for v above the mean,
/// so it is only meant for density_at.
double saddle_nu(const RemappedPortfolio& p, double v);

/// Frequency scale over which |f(w + i nu)| starts to decay.
double cf_decay_scale(const RemappedPortfolio& p, double nu = 0.0);

struct Estimate {
  double value = 0.0;
  double quad_error = 0.0;
};

/// For large |w|, f(w + i nu) ~ C |w|^{-N/2} e^{i w c}: returns c, the
/// drift of the phase, or 0 when f decays before reaching that regime.
double cf_phase(const RemappedPortfolio& p);

/// Re int_0^inf h(w) e^{i w shift} dw as a cosine and a sine transform.
/// phase is the known linear drift of arg h; it is moved into the weight so
/// the remaining factor is slowly varying. Throws QuadratureFailure when
/// either part does not converge.
Estimate real_fourier_integral(const std::function<std::complex<double>(double)>& h, double shift,
                               const QuadConfig& cfg, double decay_scale, double phase = 0.0);

/// P(V < -var). Results in [-quad_error, 0) are clamped to 0.
Estimate tail_prob(const RemappedPortfolio& p, double var, const ContourChoice& c,
                   const QuadConfig& cfg = {});

/// p(v) on the contour c.
Estimate density_at(const RemappedPortfolio& p, double v, const ContourChoice& c,
                    const QuadConfig& cfg = {});

/// p(v) on any contour height inside the strip of regularity.
Estimate density_at(const RemappedPortfolio& p, double v, double nu, const QuadConfig& cfg = {});

/// Bracketing root search settings for var_for_level. The search stops when
/// |P(var) - level| <= max(prob_abs_tol, prob_rel_tol * level) or when the
/// bracket is narrower than width_rel_tol * max(|var|, sqrt(mu2)).
struct RootConfig {
  double prob_abs_tol = 1e-13;
  double prob_rel_tol = 1e-10;
  double width_rel_tol = 1e-12;
  int max_iterations = 200;
  int max_expansions = 60;
};

struct RiskPoint {
  double level = 0.0;
  double var = 0.0;
  double es = 0.0;
  /// Numerical uncertainty of var: quadrature error plus root residual,
  /// mapped through the density.
  double var_error = 0.0;
  /// Quadrature error of es.
  double es_error = 0.0;
  /// max(var_error, es_error).
  double quad_error = 0.0;
  /// P(var) as evaluated at the returned root.
  double achieved_level = 0.0;
  bool has_es = false;
  ContourChoice contour;
};

/// Solves P(var) = level.
RiskPoint var_for_level(const RemappedPortfolio& p, double level, const ContourChoice& c,
                        const QuadConfig& cfg = {}, const RootConfig& root = {});

/// Fills rp.es from rp.var and rp.level on rp.contour.
RiskPoint expected_shortfall(const RemappedPortfolio& p, RiskPoint rp, const QuadConfig& cfg = {});

/// var_for_level followed by expected_shortfall.
RiskPoint risk_point(const RemappedPortfolio& p, double level, const ContourChoice& c,
                     const QuadConfig& cfg = {}, const RootConfig& root = {});

/// Independent risk points for several levels, evaluated concurrently and
/// returned in input order.
std::vector<RiskPoint> risk_curve(const RemappedPortfolio& p, const std::vector<double>& levels,
                                  const ContourChoice& c, const QuadConfig& cfg = {},
                                  const RootConfig& root = {});

struct SensitivityReport {
  std::vector<Parameter> parameters;
  std::vector<double> dvar;
  std::vector<double> des;
  std::vector<double> dvar_error;
  std::vector<double> des_error;
  double density_at_var = 0.0;
  bool has_dvar = false;
  bool has_des = false;

  /// Position of beta in parameters; throws UnknownParameter if missing.
  std::size_t index_of(Parameter beta) const;
  double dvar_of(Parameter beta) const { return dvar.at(index_of(beta)); }
  double des_of(Parameter beta) const { return des.at(index_of(beta)); }
};

/// dvar/dbeta for the requested parameters (all of them when empty).
/// Throws VanishingDensity when p(-var) is numerically zero.
SensitivityReport var_sensitivities(const RemappedPortfolio& p, const RiskPoint& rp,
                                    const QuadConfig& cfg = {},
                                    std::vector<Parameter> parameters = {});

/// dES/dbeta for the requested parameters (all of them when empty).
SensitivityReport es_sensitivities(const RemappedPortfolio& p, const RiskPoint& rp,
                                   const QuadConfig& cfg = {},
                                   std::vector<Parameter> parameters = {});

/// Both of the above in one report.
SensitivityReport sensitivities(const RemappedPortfolio& p, const RiskPoint& rp,
                                const QuadConfig& cfg = {}, std::vector<Parameter> parameters = {});

}  // namespace dgn

#endif  // DGN_FOURIER_RISK_HPP
