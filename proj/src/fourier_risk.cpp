#include "dgn/fourier_risk.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

namespace dgn {

namespace {

using Complex = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_non_degenerate(const RemappedPortfolio& p) {
  if (p.is_degenerate()) {
    throw Error(ErrorCode::DegeneratePortfolio,
                "portfolio is the constant theta; its risk measures are not distributional");
  }
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::LevelOutOfRange, "level must lie in (0, 1), got " + std::to_string(level));
  }
}

void require_contour(const RemappedPortfolio& p, const ContourChoice& c) {
  const Strip strip = strip_of_regularity(p);
  if (!(c.nu > 0.0 && c.nu < strip.nu_plus)) {
    throw Error(ErrorCode::OutsideStrip, "contour nu = " + std::to_string(c.nu) +
                                             " must lie in (0, " + std::to_string(strip.nu_plus) + ")");
  }
}

double portfolio_scale(const RemappedPortfolio& p) { return std::sqrt(moments(p).mu2); }

}  // namespace

double cf_decay_scale(const RemappedPortfolio& p, double nu) {
  double scale = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    const double d = p.delta()[i];
    const double l = p.lambda()[i];
    const double q = 1.0 + l * nu;
    scale = std::max({scale, std::sqrt(d * d / q + 0.5 * l * l / (q * q)), std::abs(l) / q});
  }
  return scale > 0.0 ? 1.0 / scale : 1.0;
}

double cf_phase(const RemappedPortfolio& p) {
  const double thr = zero_threshold(p, kDefaultGroupTol);
  double phase = p.theta();
  double damping = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    const double d = p.delta()[i];
    const double l = p.lambda()[i];
    if (std::abs(l) <= thr) {
      if (d != 0.0) return 0.0;  // Gaussian decay, nothing reaches the asymptote
      continue;
    }
    phase -= d * d / (2.0 * l);
    damping += d * d / (2.0 * l * l);
  }
  // Beyond |w| ~ 1/|lambda| the modulus has dropped by e^{-damping}.
  return damping < 40.0 ? phase : 0.0;
}

ContourChoice choose_nu(const RemappedPortfolio& p) {
  require_non_degenerate(p);
  const Strip strip = strip_of_regularity(p);
  ContourChoice c;
  c.nu_plus = strip.nu_plus;
  c.nu = std::isfinite(strip.nu_plus) ? 0.5 * strip.nu_plus : 1.0 / portfolio_scale(p);
  return c;
}

ContourChoice contour_at(const RemappedPortfolio& p, double nu) {
  ContourChoice c{nu, strip_of_regularity(p).nu_plus};
  require_contour(p, c);
  return c;
}

double saddle_nu(const RemappedPortfolio& p, double v) {
  require_non_degenerate(p);
  const Strip strip = strip_of_regularity(p);
  // d/dnu [nu v + log E e^{-nu V}]; increasing in nu.
  auto slope = [&](double nu) {
    double s = v - p.theta();
    for (Index i = 0; i < p.size(); ++i) {
      const double l = p.lambda()[i];
      const double d = p.delta()[i];
      const double q = 1.0 + l * nu;
      s += -l / (2.0 * q) + d * d * nu * (2.0 + l * nu) / (2.0 * q * q);
    }
    return s;
  };
  constexpr double kEdge = 0.98;
  const double scale = portfolio_scale(p);
  double lo = std::isfinite(strip.nu_minus) ? kEdge * strip.nu_minus : -1.0 / scale;
  double hi = std::isfinite(strip.nu_plus) ? kEdge * strip.nu_plus : 1.0 / scale;
  for (int i = 0; i < 200 && !std::isfinite(strip.nu_minus) && slope(lo) > 0.0; ++i) lo *= 2.0;
  for (int i = 0; i < 200 && !std::isfinite(strip.nu_plus) && slope(hi) < 0.0; ++i) hi *= 2.0;
  if (slope(lo) >= 0.0) return lo;
  if (slope(hi) <= 0.0) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++i) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Estimate real_fourier_integral(const std::function<Complex(double)>& h, double shift,
                               const QuadConfig& cfg, double decay_scale, double phase) {
  // h(w) e^{i w shift} = [h(w) e^{-i w phase}] e^{i w (shift + phase)}
  const auto smooth = [&](double w) { return phase == 0.0 ? h(w) : h(w) * std::polar(1.0, -w * phase); };
  const double total = shift + phase;
  const double x = std::abs(total);
  const double sign = total < 0.0 ? -1.0 : 1.0;
  const QuadResult re = fourier_cos([&](double w) { return smooth(w).real(); }, x, cfg, decay_scale);
  const QuadResult im = fourier_sin([&](double w) { return smooth(w).imag(); }, x, cfg, decay_scale);
  if (!re.converged || !im.converged) {
    throw Error(ErrorCode::QuadratureFailure,
                "Fourier integral did not converge (shift " + std::to_string(shift) + ", error " +
                    std::to_string(re.abs_error_estimate + im.abs_error_estimate) + ")");
  }
  return {re.value - sign * im.value, re.abs_error_estimate + im.abs_error_estimate};
}

Estimate tail_prob(const RemappedPortfolio& p, double var, const ContourChoice& c,
                   const QuadConfig& cfg) {
  require_contour(p, c);
  const double nu = c.nu;
  const auto h = [&](double w) {
    const Complex phi(w, nu);
    return cf(p, phi) / Complex(nu, -w);
  };
  const Estimate integral = real_fourier_integral(h, var, cfg, cf_decay_scale(p, nu), cf_phase(p));
  const double prefactor = std::exp(-nu * var) / std::numbers::pi;
  Estimate out{prefactor * integral.value, prefactor * integral.quad_error};
  if (out.value < 0.0) {
    if (out.value < -out.quad_error) {
      throw Error(ErrorCode::QuadratureFailure,
                  "tail probability " + std::to_string(out.value) + " is negative beyond its error " +
                      std::to_string(out.quad_error));
    }
    out.value = 0.0;
  }
  return out;
}

Estimate density_at(const RemappedPortfolio& p, double v, double nu, const QuadConfig& cfg) {
  const Strip strip = strip_of_regularity(p);
  if (!strip.contains(nu)) {
    throw Error(ErrorCode::OutsideStrip, "contour nu = " + std::to_string(nu) + " is outside the strip");
  }
  const auto h = [&](double w) { return cf(p, Complex(w, nu)); };
  const Estimate integral = real_fourier_integral(h, -v, cfg, cf_decay_scale(p, nu), cf_phase(p));
  const double prefactor = std::exp(nu * v) / std::numbers::pi;
  return {prefactor * integral.value, prefactor * integral.quad_error};
}

Estimate density_at(const RemappedPortfolio& p, double v, const ContourChoice& c,
                    const QuadConfig& cfg) {
  require_contour(p, c);
  return density_at(p, v, c.nu, cfg);
}

RiskPoint var_for_level(const RemappedPortfolio& p, double level, const ContourChoice& c,
                        const QuadConfig& cfg, const RootConfig& root) {
  require_level(level);
  require_non_degenerate(p);
  require_contour(p, c);
  const MomentSet m = moments(p);
  const double sigma = std::sqrt(m.mu2);
  const double prob_tol = std::max(root.prob_abs_tol, root.prob_rel_tol * level);

  double last_error = 0.0;
  auto excess = [&](double var) {
    const Estimate e = tail_prob(p, var, c, cfg);
    last_error = e.quad_error;
    return e.value - level;
  };

  // P is strictly decreasing in var: expand until the level is straddled.
  double lo = -m.mu1 - sigma;
  double hi = -m.mu1 + sigma;
  double f_lo = excess(lo);
  double f_hi = excess(hi);
  double step = sigma;
  int expansions = 0;
  while (f_lo < 0.0) {
    if (++expansions > root.max_expansions) {
      throw Error(ErrorCode::BracketingFailure, "cannot bracket level " + std::to_string(level) + " from below");
    }
    hi = lo;
    f_hi = f_lo;
    step *= 2.0;
    lo -= step;
    f_lo = excess(lo);
  }
  step = sigma;
  while (f_hi > 0.0) {
    if (++expansions > root.max_expansions) {
      throw Error(ErrorCode::BracketingFailure, "cannot bracket level " + std::to_string(level) + " from above");
    }
    lo = hi;
    f_lo = f_hi;
    step *= 2.0;
    hi += step;
    f_hi = excess(hi);
  }

  // Brent: inverse quadratic / secant steps guarded by bisection.
  double a = lo, b = hi, fa = f_lo, fb = f_hi;
  double b_error = last_error;
  double cpt = a, fc = fa, d = b - a, e = d;
  bool done = std::abs(fb) <= prob_tol;
  if (std::abs(fa) < std::abs(fb) && std::abs(fa) <= prob_tol) {
    b = a;
    fb = fa;
    done = true;
  }
  for (int iter = 0; !done && iter < root.max_iterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      cpt = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = cpt;
      cpt = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double width_tol = 0.5 * root.width_rel_tol * std::max(std::abs(b), sigma);
    const double half = 0.5 * (cpt - b);
    if (std::abs(half) <= width_tol || std::abs(fb) <= prob_tol) break;
    if (std::abs(e) >= width_tol && std::abs(fa) > std::abs(fb)) {
      double pq, q;
      const double s = fb / fa;
      if (a == cpt) {
        pq = 2.0 * half * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        pq = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (pq > 0.0) q = -q;
      pq = std::abs(pq);
      if (2.0 * pq < std::min(3.0 * half * q - std::abs(width_tol * q), std::abs(e * q))) {
        e = d;
        d = pq / q;
      } else {
        d = half;
        e = d;
      }
    } else {
      d = half;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > width_tol ? d : (half > 0.0 ? width_tol : -width_tol);
    fb = excess(b);
    b_error = last_error;
    if (iter + 1 == root.max_iterations && std::abs(fb) > prob_tol) {
      throw Error(ErrorCode::BracketingFailure, "root search for level " + std::to_string(level) +
                                                    " did not converge");
    }
  }

  RiskPoint rp;
  rp.level = level;
  rp.var = b;
  rp.achieved_level = fb + level;
  rp.contour = c;
  const Estimate dens = density_at(p, -b, c, cfg);
  const double density = std::max(dens.value, std::numeric_limits<double>::min());
  rp.var_error = (b_error + std::abs(fb)) / density;
  rp.quad_error = rp.var_error;
  return rp;
}

RiskPoint expected_shortfall(const RemappedPortfolio& p, RiskPoint rp, const QuadConfig& cfg) {
  require_level(rp.level);
  require_contour(p, rp.contour);
  const double nu = rp.contour.nu;
  const auto h = [&](double w) {
    const Complex phi(w, nu);
    return cf(p, phi) / (phi * phi);
  };
  const Estimate integral = real_fourier_integral(h, rp.var, cfg, cf_decay_scale(p, nu), cf_phase(p));
  const double prefactor = std::exp(-nu * rp.var) / (std::numbers::pi * rp.level);
  rp.es = rp.var - prefactor * integral.value;
  rp.es_error = prefactor * integral.quad_error;
  rp.quad_error = std::max(rp.var_error, rp.es_error);
  rp.has_es = true;
  return rp;
}

RiskPoint risk_point(const RemappedPortfolio& p, double level, const ContourChoice& c,
                     const QuadConfig& cfg, const RootConfig& root) {
  return expected_shortfall(p, var_for_level(p, level, c, cfg, root), cfg);
}

std::vector<RiskPoint> risk_curve(const RemappedPortfolio& p, const std::vector<double>& levels,
                                  const ContourChoice& c, const QuadConfig& cfg,
                                  const RootConfig& root) {
  std::vector<std::future<RiskPoint>> jobs;
  jobs.reserve(levels.size());
  for (double level : levels) {
    jobs.push_back(std::async(std::launch::async,
                              [&p, level, &c, &cfg, &root] { return risk_point(p, level, c, cfg, root); }));
  }
  std::vector<RiskPoint> out;
  out.reserve(levels.size());
  for (auto& job : jobs) out.push_back(job.get());
  return out;
}

std::size_t SensitivityReport::index_of(Parameter beta) const {
  const auto it = std::find(parameters.begin(), parameters.end(), beta);
  if (it == parameters.end()) {
    throw Error(ErrorCode::UnknownParameter, "parameter " + beta.name() + " not in report");
  }
  return static_cast<std::size_t>(it - parameters.begin());
}

namespace {

std::vector<Parameter> resolve_parameters(const RemappedPortfolio& p, std::vector<Parameter> params) {
  if (params.empty()) return all_parameters(p.size());
  for (const Parameter& beta : params) (void)parameter_value(p, beta);
  return params;
}

void fill_dvar(const RemappedPortfolio& p, const RiskPoint& rp, const QuadConfig& cfg,
               SensitivityReport& report) {
  const double nu = rp.contour.nu;
  const Estimate dens = density_at(p, -rp.var, rp.contour, cfg);
  const double scale = portfolio_scale(p);
  if (!(dens.value > 1e-300 / scale)) {
    throw Error(ErrorCode::VanishingDensity,
                "density at -var is " + std::to_string(dens.value) + "; sensitivities are undefined");
  }
  report.density_at_var = dens.value;
  const double prefactor = std::exp(-nu * rp.var) / (std::numbers::pi * dens.value);
  const double decay = cf_decay_scale(p, nu);
  const double phase = cf_phase(p);
  report.dvar.clear();
  report.dvar_error.clear();
  for (const Parameter& beta : report.parameters) {
    const auto h = [&](double w) {
      const Complex phi(w, nu);
      return cf_grad(p, phi, beta) / Complex(nu, -w);
    };
    const Estimate integral = real_fourier_integral(h, rp.var, cfg, decay, phase);
    const double value = prefactor * integral.value;
    report.dvar.push_back(value);
    report.dvar_error.push_back(prefactor * integral.quad_error +
                                std::abs(value) * dens.quad_error / dens.value);
  }
  report.has_dvar = true;
}

void fill_des(const RemappedPortfolio& p, const RiskPoint& rp, const QuadConfig& cfg,
              SensitivityReport& report) {
  const double nu = rp.contour.nu;
  const double prefactor = -std::exp(-nu * rp.var) / (std::numbers::pi * rp.level);
  const double decay = cf_decay_scale(p, nu);
  const double phase = cf_phase(p);
  report.des.clear();
  report.des_error.clear();
  for (const Parameter& beta : report.parameters) {
    const auto h = [&](double w) {
      const Complex phi(w, nu);
      return cf_grad(p, phi, beta) / (phi * phi);
    };
    const Estimate integral = real_fourier_integral(h, rp.var, cfg, decay, phase);
    report.des.push_back(prefactor * integral.value);
    report.des_error.push_back(std::abs(prefactor) * integral.quad_error);
  }
  report.has_des = true;
}

}  // namespace

SensitivityReport var_sensitivities(const RemappedPortfolio& p, const RiskPoint& rp,
                                    const QuadConfig& cfg, std::vector<Parameter> parameters) {
  require_level(rp.level);
  require_contour(p, rp.contour);
  SensitivityReport report;
  report.parameters = resolve_parameters(p, std::move(parameters));
  fill_dvar(p, rp, cfg, report);
  return report;
}

SensitivityReport es_sensitivities(const RemappedPortfolio& p, const RiskPoint& rp,
                                   const QuadConfig& cfg, std::vector<Parameter> parameters) {
  require_level(rp.level);
  require_contour(p, rp.contour);
  SensitivityReport report;
  report.parameters = resolve_parameters(p, std::move(parameters));
  fill_des(p, rp, cfg, report);
  return report;
}

SensitivityReport sensitivities(const RemappedPortfolio& p, const RiskPoint& rp,
                                const QuadConfig& cfg, std::vector<Parameter> parameters) {
  SensitivityReport report = var_sensitivities(p, rp, cfg, std::move(parameters));
  fill_des(p, rp, cfg, report);
  return report;
}

}  // namespace dgn
