// dgn-risk: command-line front end for the DGN risk engine.
//
//   dgn-risk remap FILE
//   dgn-risk risk  FILE --levels 0.01,0.05 [--nu NU] [--tol TOL]
//   dgn-risk sens  FILE --level 0.01 [--nu NU] [--tol TOL]
//   dgn-risk pdf   FILE --range LO:HI --points K [--overlay-tail] [--nu NU] [--tol TOL]
//   dgn-risk mc    FILE --levels ... [--samples T] [--seed S] [--cl CL]
//                       [--sens theta,delta_1,...] [--shock H] [--no-strict]
//
// Exit status: 0 ok, 2 unreadable input or bad usage, 3 invalid portfolio or
// argument, 4 numerical failure, 5 Monte Carlo interval miss.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "dgn/fourier_risk.hpp"
#include "dgn/mc_harness.hpp"
#include "dgn/portfolio_io.hpp"

namespace {

using namespace dgn;

constexpr int kExitParse = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitCiMiss = 5;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
      return kExitParse;
    case ErrorCode::NotPositiveDefinite:
    case ErrorCode::AsymmetricInput:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::OutsideStrip:
    case ErrorCode::UnknownParameter:
    case ErrorCode::DegeneratePortfolio:
    case ErrorCode::LevelOutOfRange:
    case ErrorCode::InsufficientTailSample:
    case ErrorCode::InvalidArgument:
      return kExitInvalid;
    default:
      return kExitNumerical;
  }
}

struct Common {
  std::string input;
  std::optional<double> nu;
  std::optional<double> tol;
};

QuadConfig quad_config(const Common& c) {
  QuadConfig cfg;
  if (const char* env = std::getenv("RISK_QUAD_TOL"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (*end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidArgument, std::string("RISK_QUAD_TOL must be a positive number, got '") + env + "'");
    }
    cfg.abs_tol = v;
  }
  if (c.tol) {
    if (!(*c.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "--tol must be positive");
    cfg.abs_tol = *c.tol;
  }
  return cfg;
}

ContourChoice contour(const RemappedPortfolio& p, const Common& c) {
  return c.nu ? contour_at(p, *c.nu) : choose_nu(p);
}

void check_levels(const std::vector<double>& levels) {
  if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "no levels given");
  for (double l : levels) {
    if (!(l > 0.0 && l < 1.0)) {
      throw Error(ErrorCode::LevelOutOfRange, "level " + format_number(l) + " is outside (0, 1)");
    }
  }
}

// Rethrows a library failure with the level it belongs to.
[[noreturn]] void rethrow_for_level(const Error& e, double level) {
  throw Error(e.code(), "level " + format_number(level) + ": " + e.what());
}

std::vector<RiskPoint> risk_points(const RemappedPortfolio& p, const std::vector<double>& levels,
                                   const ContourChoice& c, const QuadConfig& cfg) {
  std::vector<std::future<RiskPoint>> jobs;
  jobs.reserve(levels.size());
  for (double level : levels) {
    jobs.push_back(std::async(std::launch::async, [&, level] {
      try {
        return risk_point(p, level, c, cfg);
      } catch (const Error& e) {
        rethrow_for_level(e, level);
      }
    }));
  }
  std::vector<RiskPoint> out;
  out.reserve(levels.size());
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

int run_remap(const Common& c) {
  const PortfolioFile file = load_portfolio(c.input);
  std::cout << remap_document(file);
  return 0;
}

int run_risk(const Common& c, const std::vector<double>& levels) {
  check_levels(levels);
  const QuadConfig cfg = quad_config(c);
  const RemappedPortfolio p = load_portfolio(c.input).remapped();
  const ContourChoice nu = contour(p, c);
  const std::vector<RiskPoint> points = risk_points(p, levels, nu, cfg);
  std::cout << csv_line({"level", "var", "es", "quad_error"});
  for (const RiskPoint& rp : points) {
    std::cout << csv_line({format_number(rp.level), format_number(rp.var), format_number(rp.es),
                           format_number(rp.quad_error)});
  }
  return 0;
}

int run_sens(const Common& c, double level) {
  check_levels({level});
  const QuadConfig cfg = quad_config(c);
  const RemappedPortfolio p = load_portfolio(c.input).remapped();
  const ContourChoice nu = contour(p, c);
  SensitivityReport rep;
  try {
    rep = sensitivities(p, risk_point(p, level, nu, cfg), cfg);
  } catch (const Error& e) {
    rethrow_for_level(e, level);
  }
  const double theta_dvar = rep.dvar_of(Parameter::theta());
  if (std::abs(theta_dvar + 1.0) > 1e-6) {
    std::cerr << "warning: dvar/dtheta = " << format_number(theta_dvar)
              << " deviates from -1 by more than 1e-6; results are numerically suspect\n";
  }
  std::cout << csv_line({"parameter", "dvar", "des"});
  for (std::size_t k = 0; k < rep.parameters.size(); ++k) {
    std::cout << csv_line({rep.parameters[k].name(), format_number(rep.dvar[k]), format_number(rep.des[k])});
  }
  return 0;
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorCode::InvalidArgument, "--range expects LO:HI");
  try {
    std::size_t used_lo = 0, used_hi = 0;
    const std::string lo_text = text.substr(0, colon), hi_text = text.substr(colon + 1);
    const double lo = std::stod(lo_text, &used_lo);
    const double hi = std::stod(hi_text, &used_hi);
    if (used_lo != lo_text.size() || used_hi != hi_text.size()) throw std::invalid_argument("trailing");
    if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "--range needs LO < HI");
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::InvalidArgument, "--range expects LO:HI, got '" + text + "'");
  }
}

int run_pdf(const Common& c, const std::string& range, int points, bool overlay) {
  const auto [lo, hi] = parse_range(range);
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "--points must be at least 2");
  const QuadConfig cfg = quad_config(c);
  const RemappedPortfolio p = load_portfolio(c.input).remapped();
  std::optional<double> fixed_nu;
  if (c.nu) fixed_nu = contour_at(p, *c.nu).nu;

  const auto k_points = static_cast<std::size_t>(points);
  std::vector<double> grid(k_points);
  for (std::size_t k = 0; k < k_points; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(k_points - 1);
  }
  const TailProfile tp = tail_profile(p);
  auto evaluate = [&](double v) -> Estimate {
    if (tp.regime == TailRegime::PositiveMin && v <= tp.v_inf) return {0.0, 0.0};
    return density_at(p, v, fixed_nu ? *fixed_nu : saddle_nu(p, v), cfg);
  };
  const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<Estimate> density(k_points);
  {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t k = w; k < k_points; k += workers) density[k] = evaluate(grid[k]);
      }));
    }
    for (auto& j : jobs) j.get();
  }

  std::vector<double> asymptote;
  if (overlay) {
    auto log_shape = [&](double v) {
      return tp.regime == TailRegime::PositiveMin ? bounded_left_log_density(tp, v)
                                                  : asymptotic_left_log_density(tp, v);
    };
    const std::size_t window = std::max<std::size_t>(2, (k_points + 9) / 10);
    std::vector<std::size_t> used;
    for (std::size_t k = 0; k < k_points && used.size() < window; ++k) {
      const double floor = std::max(1e-300, 10.0 * density[k].quad_error);
      if (density[k].value > floor && std::isfinite(log_shape(grid[k]))) used.push_back(k);
    }
    if (used.empty()) throw Error(ErrorCode::InvalidArgument, "no grid point has a resolvable density for the tail fit");
    // Least squares for the additive constant alone is the mean residual.
    double shift = 0.0;
    for (std::size_t k : used) shift += std::log(density[k].value) - log_shape(grid[k]);
    shift /= static_cast<double>(used.size());
    asymptote.resize(k_points);
    for (std::size_t k = 0; k < k_points; ++k) {
      const double s = log_shape(grid[k]);
      asymptote[k] = std::isfinite(s) ? std::exp(s + shift) : 0.0;
    }
  }

  std::cout << csv_line(overlay ? std::vector<std::string>{"v", "density", "asymptote"}
                                : std::vector<std::string>{"v", "density"});
  for (std::size_t k = 0; k < k_points; ++k) {
    std::vector<std::string> row{format_number(grid[k]), format_number(density[k].value)};
    if (overlay) row.push_back(format_number(asymptote[k]));
    std::cout << csv_line(row);
  }
  return 0;
}

struct McOptions {
  std::vector<double> levels;
  double samples = 1e6;
  std::uint64_t seed = 20240601;
  double cl = 0.98;
  std::vector<std::string> sens;
  std::optional<double> shock;
  bool no_strict = false;
  unsigned threads = 0;
};

std::string mc_row(const std::string& kind, const std::string& parameter, double level, double fourier,
                   double fourier_error, const McEstimate& mc, bool& miss) {
  const bool inside = fourier >= mc.lower() - fourier_error && fourier <= mc.upper() + fourier_error;
  if (!inside) miss = true;
  return csv_line({kind, parameter, format_number(level), format_number(fourier), format_number(mc.point),
                   format_number(mc.lower_offset), format_number(mc.upper_offset), inside ? "true" : "false"});
}

int run_mc(const Common& c, const McOptions& o) {
  check_levels(o.levels);
  if (!(o.samples >= 1.0) || o.samples != std::floor(o.samples) || o.samples > 1e12) {
    throw Error(ErrorCode::InvalidArgument, "--samples must be a positive integer");
  }
  if (!(o.cl > 0.0 && o.cl < 1.0)) throw Error(ErrorCode::InvalidArgument, "--cl must lie in (0, 1)");
  if (o.shock && !(*o.shock > 0.0)) throw Error(ErrorCode::InvalidArgument, "--shock must be positive");
  const QuadConfig cfg = quad_config(c);
  const RemappedPortfolio p = load_portfolio(c.input).remapped();
  std::vector<Parameter> params;
  for (const std::string& name : o.sens) {
    const Parameter beta = Parameter::parse(name);
    (void)parameter_value(p, beta);
    params.push_back(beta);
  }
  const ContourChoice nu = contour(p, c);
  const auto t_mc = static_cast<std::size_t>(o.samples);

  const std::vector<RiskPoint> fourier = risk_points(p, o.levels, nu, cfg);
  const ScenarioSample sample = simulate(p, t_mc, o.seed, o.threads);

  bool miss = false;
  std::string body;
  for (const RiskPoint& rp : fourier) {
    body += mc_row("var", "", rp.level, rp.var, rp.var_error, var_ci(sample, rp.level, o.cl), miss);
    body += mc_row("es", "", rp.level, rp.es, rp.es_error, es_ci(sample, rp.level, o.cl), miss);
  }
  if (!params.empty()) {
    for (const RiskPoint& rp : fourier) {
      SensitivityReport rep;
      try {
        rep = sensitivities(p, rp, cfg, params);
      } catch (const Error& e) {
        rethrow_for_level(e, rp.level);
      }
      for (std::size_t k = 0; k < params.size(); ++k) {
        const Parameter beta = params[k];
        const double h = o.shock ? *o.shock : default_shock(parameter_value(p, beta));
        const FdSensitivity fd = fd_sensitivity(p, beta, h, rp.level, t_mc, o.seed, o.cl, o.threads);
        body += mc_row("dvar", beta.name(), rp.level, rep.dvar[k], rep.dvar_error[k], fd.dvar, miss);
        body += mc_row("des", beta.name(), rp.level, rep.des[k], rep.des_error[k], fd.des, miss);
      }
    }
  }
  std::cout << csv_line({"kind", "parameter", "level", "fourier", "mc", "lower_offset", "upper_offset", "inside_ci"})
            << body;
  if (miss && !o.no_strict) {
    std::cerr << "error: at least one Fourier value lies outside its Monte Carlo confidence interval\n";
    return kExitCiMiss;
  }
  return 0;
}

void add_common(CLI::App* cmd, Common& c, bool numeric) {
  cmd->add_option("input", c.input, "Portfolio JSON file")->required();
  if (numeric) {
    cmd->add_option("--nu", c.nu, "Contour height inside the strip of regularity");
    cmd->add_option("--tol", c.tol, "Absolute quadrature tolerance (overrides RISK_QUAD_TOL)");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delta-Gamma-Normal VaR and Expected Shortfall by Fourier inversion"};
  app.require_subcommand(1);

  Common common;
  std::vector<double> levels;
  double level = 0.01;
  std::string range;
  int points = 201;
  bool overlay = false;
  McOptions mc;

  auto* remap_cmd = app.add_subcommand("remap", "Print the independent-factor form with strip, tail and moments");
  add_common(remap_cmd, common, false);

  auto* risk_cmd = app.add_subcommand("risk", "VaR and ES per level");
  add_common(risk_cmd, common, true);
  risk_cmd->add_option("--levels", levels, "Comma-separated tail probabilities")->delimiter(',')->required();

  auto* sens_cmd = app.add_subcommand("sens", "VaR and ES sensitivities to every parameter");
  add_common(sens_cmd, common, true);
  sens_cmd->add_option("--level", level, "Tail probability")->required();

  auto* pdf_cmd = app.add_subcommand("pdf", "Density of V on a uniform grid");
  add_common(pdf_cmd, common, true);
  pdf_cmd->add_option("--range", range, "Grid bounds LO:HI")->required();
  pdf_cmd->add_option("--points", points, "Number of grid points");
  pdf_cmd->add_flag("--overlay-tail", overlay, "Add the fitted left-tail asymptote column");

  auto* mc_cmd = app.add_subcommand("mc", "Compare Fourier results with historical simulation");
  add_common(mc_cmd, common, true);
  mc_cmd->add_option("--levels", mc.levels, "Comma-separated tail probabilities")->delimiter(',')->required();
  mc_cmd->add_option("--samples", mc.samples, "Number of simulated scenarios");
  mc_cmd->add_option("--seed", mc.seed, "Random seed");
  mc_cmd->add_option("--cl", mc.cl, "Confidence level of the order-statistics intervals");
  mc_cmd->add_option("--sens", mc.sens, "Parameters for finite-difference rows (theta, delta_i, lambda_i)")
      ->delimiter(',');
  mc_cmd->add_option("--shock", mc.shock, "Finite-difference shock (default max(0.01|beta|, 0.01))");
  mc_cmd->add_flag("--no-strict", mc.no_strict, "Exit 0 even when a value falls outside its interval");
  mc_cmd->add_option("--threads", mc.threads, "Worker threads for scenario generation (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  try {
    if (remap_cmd->parsed()) return run_remap(common);
    if (risk_cmd->parsed()) return run_risk(common, levels);
    if (sens_cmd->parsed()) return run_sens(common, level);
    if (pdf_cmd->parsed()) return run_pdf(common, range, points, overlay);
    if (mc_cmd->parsed()) return run_mc(common, mc);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitParse;
}
