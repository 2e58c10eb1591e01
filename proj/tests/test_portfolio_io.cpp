#include <doctest.h>

#include <json.hpp>

#include "dgn/fourier_risk.hpp"
#include "dgn/portfolio_io.hpp"

using namespace dgn;

namespace {

ErrorCode code_of(const std::string& text) {
  try {
    parse_portfolio(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error for: " << text);
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("parse raw and remapped documents") {
  const PortfolioFile raw = parse_portfolio(R"({"theta": 1, "delta": [1, 2],
      "gamma": [[1, 0], [0, -1]], "sigma": [[2, 0.5], [0.5, 1]], "metadata": {"name": "x", "horizon_days": 10}})");
  REQUIRE(raw.raw);
  CHECK_FALSE(raw.given_remapped);
  CHECK(raw.metadata.name == "x");
  CHECK(raw.metadata.horizon_days == 10.0);
  CHECK(raw.remapped().size() == 2);

  const PortfolioFile rem = parse_portfolio(R"({"theta": 0, "delta": [1, 1], "lambda": [2, -1]})");
  REQUIRE(rem.given_remapped);
  CHECK(rem.remapped().lambda()[0] == -1.0);
}

TEST_CASE("parse and validation failures are told apart") {
  CHECK(code_of("{\"theta\": 0,") == ErrorCode::ParseError);
  CHECK(code_of("[1, 2]") == ErrorCode::ParseError);
  CHECK(code_of(R"({"theta": "a", "delta": [1], "lambda": [1]})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"theta": 0, "delta": [1, "b"], "lambda": [1, 1]})") == ErrorCode::ParseError);
  CHECK(code_of(R"({"theta": 0, "delta": [1]})") == ErrorCode::InvalidArgument);
  CHECK(code_of(R"({"theta": 0, "delta": [1], "lambda": [1], "gamma": [[1]], "sigma": [[1]]})") ==
        ErrorCode::InvalidArgument);
  CHECK(code_of(R"({"delta": [1], "lambda": [1]})") == ErrorCode::InvalidArgument);
  CHECK(code_of(R"({"theta": 0, "delta": [1, 1], "gamma": [[1, 0], [0]], "sigma": [[1, 0], [0, 1]]})") ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of(R"({"theta": 0, "delta": [1, 1], "gamma": [[1, 0], [0, 1]], "sigma": [[1, 0.1], [0.2, 1]]})") ==
        ErrorCode::AsymmetricInput);
  CHECK(code_of(R"({"theta": 0, "delta": [1, 1], "gamma": [[1, 0], [0, 1]], "sigma": [[1, 2], [2, 1]]})") ==
        ErrorCode::NotPositiveDefinite);
  CHECK(code_of(R"({"theta": 0, "delta": [1, 1, 1], "lambda": [1, 1]})") == ErrorCode::DimensionMismatch);
  CHECK_THROWS_AS(load_portfolio("/nonexistent/file.json"), Error);
}

TEST_CASE("remap document round-trips to identical risk numbers") {
  const PortfolioFile raw = load_portfolio(std::string(DGN_FIXTURE_DIR) + "/raw_quadratic.json");
  const std::string doc = remap_document(raw);
  const PortfolioFile again = parse_portfolio(doc);
  REQUIRE(again.given_remapped);
  const RemappedPortfolio a = raw.remapped(), b = again.remapped();
  CHECK(a.delta() == b.delta());
  CHECK(a.lambda() == b.lambda());
  const RiskPoint ra = risk_point(a, 0.01, choose_nu(a));
  const RiskPoint rb = risk_point(b, 0.01, choose_nu(b));
  CHECK(ra.var == doctest::Approx(rb.var).epsilon(1e-9));
  CHECK(ra.es == doctest::Approx(rb.es).epsilon(1e-9));
  CHECK(again.metadata.name == raw.metadata.name);

  const auto j = nlohmann::json::parse(doc);
  CHECK(j.contains("factor_map"));
  CHECK(j["tail"]["regime"] == "NegativeMin");
  CHECK(j["strip"]["nu_plus"].is_number());
}

TEST_CASE("remap document of the positive-minimum case") {
  const auto j = nlohmann::json::parse(remap_document(load_portfolio(std::string(DGN_FIXTURE_DIR) + "/case3.json")));
  CHECK(j["tail"]["v_inf"].get<double>() == -4.75);
  CHECK(j["tail"]["v_sup"].is_null());
  CHECK(j["strip"]["nu_plus"].is_null());
  CHECK(j["strip"]["nu_minus"].get<double>() == -0.5);
  CHECK(j["moments"]["mu2"].get<double>() == 39.0);
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(-4.75) == "-4.75");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(format_number(2.0 / 3.0) == "0.66666666666666663");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(csv_line({"a", "b"}) == "a,b\n");
}
