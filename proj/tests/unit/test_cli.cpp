#include "cli.hpp"
#include "format.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace dualgeo::cli;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

}  // namespace

TEST_CASE("csv fields are quoted per RFC 4180") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("a,b") == "\"a,b\"");
  CHECK(csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_field("two\nlines") == "\"two\nlines\"");
  CHECK(csv_row({"x", "1,2", ""}) == "x,\"1,2\",\r\n");
}

TEST_CASE("reals round-trip through 17 significant digits") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345678.901234567, 0.0}) {
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(format_real(std::nan("")) == "nan");
}

TEST_CASE("point and grid parsing") {
  CHECK(parse_reals("1.5, -2,3e-4") == std::vector<double>{1.5, -2.0, 3e-4});
  CHECK_THROWS_AS(parse_reals("1,,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_reals("1,x"), std::invalid_argument);
  const auto pts = parse_point_list({"0,0;1,1", "2,2"});
  REQUIRE(pts.size() == 3);
  CHECK(pts[1] == std::vector<double>{1, 1});
  const auto axes = parse_grid("-1:1:21,0:2:3");
  REQUIRE(axes.size() == 2);
  CHECK(axis_value(axes[0], 20) == 1.0);
  CHECK(axis_value(axes[1], 1) == 1.0);
  CHECK_THROWS_AS(parse_grid("0:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_grid("0:1:0"), std::invalid_argument);
}

TEST_CASE("models lists five entries in both formats") {
  const auto csv = cli({"models"});
  CHECK(csv.code == 0);
  CHECK(lines(csv.out).size() == 6);
  const auto json = cli({"models", "--format", "json"});
  CHECK(json.code == 0);
  const auto rows = lines(json.out);
  REQUIRE(rows.size() == 5);
  for (const auto& r : rows) CHECK(nlohmann::json::parse(r).contains("domain"));
}

TEST_CASE("unknown subcommands and flags print usage and fail") {
  const auto r = cli({"frobnicate"});
  CHECK(r.code == kConfigError);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(cli({"div", "--model", "euclidean:2", "-p", "0,0", "-q", "1,1", "--bogus"}).code ==
        kConfigError);
  CHECK(cli({}).code == kConfigError);
  CHECK(cli({"--help"}).code == kOk);
}

TEST_CASE("div: euclidean ay example and pseudo-norm on the diagonal") {
  const auto r = cli({"div", "--model", "euclidean:2", "--kind", "ay", "-p", "0,0", "-q", "3,4"});
  CHECK(r.code == kOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "kind,p,q,value,quad_nodes,converged,error");
  const auto value = std::stod(rows[1].substr(rows[1].find("\"3,4\",") + 6));
  CHECK(value == doctest::Approx(12.5).epsilon(1e-12));

  const auto z = cli({"div", "--model", "categorical:1", "--kind", "pseudonorm", "-p", "0.3",
                      "-q", "0.3", "--format", "json"});
  CHECK(z.code == kOk);
  CHECK(nlohmann::json::parse(z.out)["value"] == 0.0);
}

TEST_CASE("div: mixture coordinates and both orientations on bernoulli") {
  const auto r = cli({"div", "--model", "categorical:1", "--coords", "mixture", "--kind",
                      "canonical,dual", "-p", "0.5,0.5", "-q", "0.9,0.1", "--format", "json"});
  REQUIRE(r.code == kOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  const auto d = nlohmann::json::parse(rows[0]);
  const auto ds = nlohmann::json::parse(rows[1]);
  CHECK(d["kind"] == "canonical");
  CHECK(d["value"].get<double>() == doctest::Approx(0.3680642071684971).epsilon(1e-9));
  CHECK(ds["value"].get<double>() == doctest::Approx(0.5108256237659907).epsilon(1e-9));
  CHECK(d["quad_nodes"] == 32);
}

TEST_CASE("div: batches broadcast a single point and keep input order") {
  const auto r = cli({"div", "--model", "euclidean:1", "--kind", "ay", "-p", "0", "-q", "1;2;3",
                      "--threads", "3", "--format", "json"});
  REQUIRE(r.code == kOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK(nlohmann::json::parse(rows[static_cast<std::size_t>(i)])["value"].get<double>() ==
          doctest::Approx(0.5 * (i + 1) * (i + 1)));
}

TEST_CASE("div: exit codes for bad input and failed pairs") {
  CHECK(cli({"div", "--model", "nope:2", "-p", "0", "-q", "1"}).code == kConfigError);
  CHECK(cli({"div", "--model", "euclidean:2", "-p", "0", "-q", "1,1"}).code == kConfigError);
  CHECK(cli({"div", "--model", "euclidean:2", "-p", "0,0;1,1", "-q", "1,1;2,2;3,3"}).code ==
        kConfigError);
  CHECK(cli({"div", "--model", "sphere:2:1", "--kind", "oracle", "-p", "1,0", "-q", "1,1"}).code ==
        kConfigError);
  CHECK(cli({"div", "--model", "sphere:2:1", "-p", "0.01,0", "-q", "1,1"}).code == kConfigError);
  CHECK(cli({"div", "--model", "euclidean:2", "--kind", "hellinger", "-p", "0,0", "-q", "1,1"})
            .code == kConfigError);
  CHECK(cli({"div", "--model", "euclidean:2", "--quad-nodes", "0", "-p", "0,0", "-q", "1,1"})
            .code == kConfigError);

  // Every geodesic joining the first pair runs through a pole of the chart.
  const auto r = cli({"div", "--model", "sphere:2:1", "-p", "0.2,0;1,0", "-q",
                      "0.2,3.14159;1.2,0.1", "--format", "json"});
  CHECK(r.code == kPairFailed);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(nlohmann::json::parse(rows[0])["converged"] == false);
  CHECK(nlohmann::json::parse(rows[0])["value"].is_null());
  CHECK(nlohmann::json::parse(rows[1])["converged"] == true);
}

TEST_CASE("sweep: grid rows, boundary flags and the single-point case") {
  const auto r = cli({"sweep", "--model", "categorical:1", "--grid", "-8:0:3", "--kind",
                      "canonical,oracle"});
  CHECK(r.code == kOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "q0,canonical,oracle,converged,error");
  CHECK(rows[1].find("false") != std::string::npos);
  CHECK(rows[3].rfind("0,0,0,true,", 0) == 0);

  const auto one = cli({"sweep", "--model", "euclidean:2", "--kind", "ay", "--grid",
                        "3:3:1,4:4:1", "-p", "0,0"});
  const auto div = cli({"div", "--model", "euclidean:2", "--kind", "ay", "-p", "0,0", "-q", "3,4"});
  const std::string sweep_row = lines(one.out)[1];
  const std::string div_row = lines(div.out)[1];
  const auto div_value_at = div_row.find("\"3,4\",") + 6;
  const std::string div_value = div_row.substr(div_value_at, div_row.find(',', div_value_at) - div_value_at);
  CHECK(sweep_row == "3,4," + div_value + ",true,");
  CHECK(cli({"sweep", "--model", "euclidean:2", "--grid", "0:1:2"}).code == kConfigError);
}

TEST_CASE("probe-f: bernoulli summary and sample floor") {
  const auto r = cli({"probe-f", "--model", "categorical:1", "--samples", "20", "--seed", "4",
                      "--format", "json"});
  CHECK(r.code == kOk);
  const auto rows = lines(r.out);
  REQUIRE(rows.size() == 21);
  const auto summary = nlohmann::json::parse(rows.back());
  CHECK(summary["summary"] == true);
  CHECK(summary["rank_agreement"] == 1.0);
  CHECK(summary["max_pointwise_error"].get<double>() <= 1e-6);
  CHECK(cli({"probe-f", "--model", "categorical:1", "--samples", "5"}).code == kConfigError);

  const auto csv = cli({"probe-f", "--model", "euclidean:2", "--samples", "10"});
  CHECK(csv.code == kOk);
  CHECK(csv.err.find("rank_agreement=1") != std::string::npos);
}

TEST_CASE("verify: exit codes and byte-identical reruns") {
  const std::vector<std::string> args{"verify", "--model", "euclidean:2", "--suite", "collapse",
                                      "--samples", "3", "--seed", "7"};
  const auto a = cli(args);
  const auto b = cli(args);
  CHECK(a.code == kOk);
  CHECK(a.out == b.out);
  CHECK(nlohmann::json::parse(a.out)["passed"] == true);
  CHECK(cli({"verify", "--suite", "nothing"}).code == kConfigError);
  CHECK(cli({"verify", "--model", "euclidean:2", "--suite", "collapse", "--samples", "0"}).code ==
        kConfigError);
  const auto timed = cli({"verify", "--model", "euclidean:2", "--suite", "collapse", "--samples",
                          "2", "--timing"});
  CHECK(nlohmann::json::parse(timed.out).contains("duration_seconds"));
}

TEST_CASE("output goes to a file when requested") {
  const std::string path = "dualgeo_cli_test_output.csv";
  const auto r = cli({"models", "--output", path});
  CHECK(r.code == kOk);
  CHECK(r.out.empty());
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(lines(buf.str()).size() == 6);
  std::remove(path.c_str());
}
