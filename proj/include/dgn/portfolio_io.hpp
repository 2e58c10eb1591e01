#ifndef DGN_PORTFOLIO_IO_HPP
#define DGN_PORTFOLIO_IO_HPP

// Portfolio files and report serialisation.
//
// A portfolio file is a JSON object holding exactly one parameter block:
//   raw:      {"theta": t, "delta": [...], "gamma": [[...]...], "sigma": [[...]...]}
//   remapped: {"theta": t, "delta": [...], "lambda": [...]}
// plus an optional "metadata": {"name": ..., "horizon_days": ...}. Matrices
// are row-major arrays of rows. Unknown keys are ignored, so the document
// written by remap_document can be read back as a remapped file.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgn/portfolio.hpp"

namespace dgn {

struct PortfolioMetadata {
  std::optional<std::string> name;
  std::optional<double> horizon_days;
};

struct PortfolioFile {
  std::optional<PortfolioSpec> raw;
  std::optional<RemappedPortfolio> given_remapped;
  PortfolioMetadata metadata;

  /// Independent-factor form: the given one, or remap(*raw).
  RemappedPortfolio remapped() const;
};

/// Throws Error(ParseError) on malformed JSON or a wrong document shape and
/// the portfolio validation errors (AsymmetricInput, NotPositiveDefinite,
/// DimensionMismatch, InvalidArgument) on inconsistent parameters.
PortfolioFile parse_portfolio(std::string_view text);

/// Reads and parses a file; an unreadable file is a ParseError.
PortfolioFile load_portfolio(const std::string& path);

/// Remapped parameters with strip, tail regime, support bounds and moments.
/// Infinite bounds are written as null.
std::string remap_document(const PortfolioFile& file);

/// %.17g, with "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double x);

/// Comma-joined fields followed by a newline.
std::string csv_line(const std::vector<std::string>& fields);

}  // namespace dgn

#endif  // DGN_PORTFOLIO_IO_HPP
