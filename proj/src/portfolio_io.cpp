#include "dgn/portfolio_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dgn {

using nlohmann::json;

namespace {

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, where + " must be a number");
  return j.get<double>();
}

const json& field(const json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw Error(ErrorCode::InvalidArgument, std::string("missing field '") + key + "'");
  return *it;
}

Eigen::VectorXd vector_field(const json& doc, const char* key) {
  const json& j = field(doc, key);
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(key) + " must be an array");
  Eigen::VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Index>(i)] = number(j[i], std::string(key) + "[" + std::to_string(i) + "]");
  }
  return v;
}

Eigen::MatrixXd matrix_field(const json& doc, const char* key) {
  const json& j = field(doc, key);
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(key) + " must be an array of rows");
  const std::size_t rows = j.size();
  Eigen::MatrixXd m(static_cast<Index>(rows), static_cast<Index>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array()) throw Error(ErrorCode::ParseError, std::string(key) + " rows must be arrays");
    if (row.size() != rows) {
      throw Error(ErrorCode::DimensionMismatch, std::string(key) + " is not square: row " +
                                                    std::to_string(r + 1) + " has " +
                                                    std::to_string(row.size()) + " entries, expected " +
                                                    std::to_string(rows));
    }
    for (std::size_t c = 0; c < rows; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          number(row[c], std::string(key) + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json optional_number(const std::optional<double>& x) { return x ? finite_or_null(*x) : json(nullptr); }

}  // namespace

RemappedPortfolio PortfolioFile::remapped() const {
  if (given_remapped) return *given_remapped;
  if (raw) return remap(*raw);
  throw Error(ErrorCode::InvalidArgument, "portfolio file holds no parameters");
}

PortfolioFile parse_portfolio(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "top level must be a JSON object");

  const bool has_raw = doc.contains("gamma") || doc.contains("sigma");
  const bool has_remapped = doc.contains("lambda");
  if (has_raw && has_remapped) {
    throw Error(ErrorCode::InvalidArgument,
                "exactly one parameter block expected: found both gamma/sigma and lambda");
  }
  if (!has_raw && !has_remapped) {
    throw Error(ErrorCode::InvalidArgument,
                "exactly one parameter block expected: need gamma and sigma, or lambda");
  }

  PortfolioFile out;
  const double theta = number(field(doc, "theta"), "theta");
  Eigen::VectorXd delta = vector_field(doc, "delta");
  if (has_raw) {
    Eigen::MatrixXd gamma = matrix_field(doc, "gamma");
    Eigen::MatrixXd sigma = matrix_field(doc, "sigma");
    out.raw.emplace(theta, std::move(delta), std::move(gamma), std::move(sigma));
  } else {
    Eigen::VectorXd lambda = vector_field(doc, "lambda");
    if (delta.size() == 0) throw Error(ErrorCode::DimensionMismatch, "portfolio has no factors");
    out.given_remapped.emplace(theta, std::move(delta), std::move(lambda));
  }

  if (const auto it = doc.find("metadata"); it != doc.end() && !it->is_null()) {
    if (!it->is_object()) throw Error(ErrorCode::ParseError, "metadata must be an object");
    if (const auto n = it->find("name"); n != it->end() && !n->is_null()) {
      if (!n->is_string()) throw Error(ErrorCode::ParseError, "metadata.name must be a string");
      out.metadata.name = n->get<std::string>();
    }
    if (const auto h = it->find("horizon_days"); h != it->end() && !h->is_null()) {
      out.metadata.horizon_days = number(*h, "metadata.horizon_days");
    }
  }
  return out;
}

PortfolioFile load_portfolio(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_portfolio(buf.str());
}

std::string remap_document(const PortfolioFile& file) {
  const RemappedPortfolio p = file.remapped();
  json doc;
  doc["theta"] = p.theta();
  doc["delta"] = std::vector<double>(p.delta().data(), p.delta().data() + p.size());
  doc["lambda"] = std::vector<double>(p.lambda().data(), p.lambda().data() + p.size());
  if (p.factor_map()) {
    json rows = json::array();
    const auto& c = *p.factor_map();
    for (Index r = 0; r < c.rows(); ++r) {
      json row = json::array();
      for (Index k = 0; k < c.cols(); ++k) row.push_back(c(r, k));
      rows.push_back(std::move(row));
    }
    doc["factor_map"] = std::move(rows);
  }

  const Strip strip = strip_of_regularity(p);
  doc["strip"] = {{"nu_minus", finite_or_null(strip.nu_minus)}, {"nu_plus", finite_or_null(strip.nu_plus)}};

  const TailProfile tp = tail_profile(p);
  json tail;
  tail["regime"] = to_string(tp.regime);
  tail["v_inf"] = finite_or_null(tp.v_inf);
  tail["v_sup"] = finite_or_null(tp.v_sup);
  tail["m_bar"] = tp.m_bar;
  tail["v0"] = optional_number(tp.v0);
  doc["tail"] = std::move(tail);

  const MomentSet m = moments(p);
  doc["moments"] = {{"mu1", m.mu1},
                    {"mu2", m.mu2},
                    {"mu3", m.mu3},
                    {"mu4", m.mu4},
                    {"skewness", optional_number(m.skewness)},
                    {"excess_kurtosis", optional_number(m.excess_kurtosis)}};

  if (file.metadata.name || file.metadata.horizon_days) {
    json meta = json::object();
    if (file.metadata.name) meta["name"] = *file.metadata.name;
    if (file.metadata.horizon_days) meta["horizon_days"] = *file.metadata.horizon_days;
    doc["metadata"] = std::move(meta);
  }
  return doc.dump(2) + "\n";
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += fields[i];
  }
  out += '\n';
  return out;
}

}  // namespace dgn
