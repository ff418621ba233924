#include "dualgeo/verify.hpp"

#include <doctest.h>

#include <json.hpp>

using namespace dualgeo;

TEST_CASE("suite names parse") {
  for (const char* s :
       {"eguchi", "pathindep", "gradient", "collapse", "symmetry", "classification", "all"}) {
    const auto suite = parse_suite(s);
    REQUIRE(suite.has_value());
    CHECK(to_string(*suite) == s);
  }
  CHECK_FALSE(parse_suite("everything").has_value());
}

TEST_CASE("euclidean passes every suite with tiny residuals") {
  VerifyOptions opt;
  opt.models = {make_model_from_spec("euclidean:3")};
  opt.samples = 3;
  opt.seed = 7;
  const auto report = run_verification(opt);
  CHECK(report.passed);
  CHECK(report.suite == "all");
  bool all = true;
  for (const auto& c : report.checks) {
    CAPTURE(c.id);
    all = all && c.passed;
    if (c.id != "classification.verdict" && c.samples > 0) CHECK(c.max_error <= 1e-6);
  }
  CHECK(all == report.passed);
}

TEST_CASE("reports are deterministic and only carry a duration on request") {
  VerifyOptions opt;
  opt.suite = Suite::Collapse;
  opt.models = {make_model_from_spec("categorical:2")};
  opt.samples = 4;
  opt.seed = 3;
  opt.threads = 2;
  const auto a = run_verification(opt);
  opt.threads = 1;
  const auto b = run_verification(opt);
  CHECK(report_to_json(a, false) == report_to_json(b, false));

  const auto doc = nlohmann::json::parse(report_to_json(a, true));
  CHECK(doc.contains("duration_seconds"));
  CHECK_FALSE(nlohmann::json::parse(report_to_json(a, false)).contains("duration_seconds"));
  CHECK(doc["suite"] == "collapse");
  CHECK(doc["checks"].size() == a.checks.size());
}

TEST_CASE("overall pass is the conjunction of the checks") {
  VerifyOptions opt;
  opt.suite = Suite::Gradient;
  opt.models = {make_model_from_spec("sphere:2:1")};
  opt.samples = 2;
  auto report = run_verification(opt);
  bool all = true;
  for (const auto& c : report.checks) all = all && c.passed;
  CHECK(report.passed == all);
}

TEST_CASE("measurement helpers on a dually flat model") {
  const auto m = make_model_from_spec("categorical:2");
  Vec a(2), b(2);
  a << 0.1, -0.2;
  b << -0.4, 0.3;
  const Point p(a), q(b);
  CHECK(gradient_identity_error(m, p, q) <= 1e-6);
  const auto d = decomposition_measure(m, ConnectionKind::Primal, p, q);
  CHECK(d.orthogonality <= 1e-6);
  CHECK(d.alignment_angle <= 1e-5);
  const auto s = path_independence_from_sums(2.0, {2.0, 2.3, 1.7});
  CHECK(s.spread == doctest::Approx(0.2));
  CHECK(s.pseudo_norm_error == doctest::Approx(0.1));
}
