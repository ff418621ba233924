#include "oracles.hpp"

#include "dualgeo/manifold.hpp"
#include "dualgeo/sampling.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

using namespace dualgeo;

namespace {

Point pt(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return Point(v);
}

Tangent tan_at(const Point& p, std::initializer_list<double> xs) { return {p, pt(xs).coords}; }

// Log-partition of the categorical family, for finite-difference oracles.
double psi(const Vec& theta) {
  double z = 1.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) z += std::exp(theta[i]);
  return std::log(z);
}

}  // namespace

TEST_CASE("model specs parse and round-trip") {
  const auto m = make_model_from_spec("alpha_categorical:2:0.5");
  CHECK(m.name() == "alpha_categorical");
  CHECK(m.dim() == 2);
  CHECK(m.declared_class() == StructureClass::General);
  CHECK(make_model_from_spec(m.spec()).spec() == m.spec());

  const auto j = make_model_from_spec(R"({"name": "categorical", "params": [3]})");
  CHECK(j.dim() == 3);
  CHECK(j.declared_class() == StructureClass::DuallyFlat);

  CHECK(make_model_from_spec("sphere").dim() == 2);
  CHECK(make_model_from_spec("gaussian1d").dim() == 2);
  CHECK(make_model_from_spec("alpha_categorical:2:0").declared_class() ==
        StructureClass::SelfDual);
}

TEST_CASE("invalid model specs are rejected") {
  for (const char* bad : {"", "nope:2", "euclidean", "euclidean:0", "euclidean:1.5",
                          "euclidean:x", "alpha_categorical:2:1", "alpha_categorical:2:-1.5",
                          "sphere:3", "sphere:2:-1", "gaussian1d:3", "categorical:99",
                          R"({"params": [2]})", R"({"name": "euclidean", "params": "2"})",
                          "{not json"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(make_model_from_spec(bad), InvalidModelSpec);
  }
}

TEST_CASE("catalog lists the five builtins") {
  const auto& cat = builtin_catalog();
  REQUIRE(cat.size() == 5);
  for (const auto& e : cat) CHECK_NOTHROW(make_model_from_spec(e.example));
  CHECK(default_models().size() == 5);
}

TEST_CASE("metric examples") {
  const auto e3 = make_model_from_spec("euclidean:3");
  CHECK(metric_at(e3, pt({1, -2, 5})).isApprox(Mat::Identity(3, 3)));

  const auto bern = make_model_from_spec("categorical:1");
  CHECK(metric_at(bern, pt({0.0}))(0, 0) == doctest::Approx(0.25).epsilon(1e-15));

  const auto s = make_model_from_spec("sphere:2:1");
  CHECK((metric_at(s, pt({std::numbers::pi / 2, 0.0})) - Mat::Identity(2, 2)).norm() < 1e-15);
  const auto s2 = make_model_from_spec("sphere:2:2");
  CHECK(metric_at(s2, pt({std::numbers::pi / 2, 0.3}))(1, 1) == doctest::Approx(4.0));
}

TEST_CASE("inner product examples") {
  const auto e2 = make_model_from_spec("euclidean:2");
  const Point o = pt({0, 0});
  CHECK(inner_product(e2, o, tan_at(o, {1, 0}), tan_at(o, {0, 1})) == 0.0);
  CHECK(inner_product(e2, o, tan_at(o, {3, 4}), tan_at(o, {3, 4})) == 25.0);
  CHECK(norm(e2, tan_at(o, {3, 4})) == 5.0);

  const auto bern = make_model_from_spec("categorical:1");
  const Point z = pt({0.0});
  CHECK(inner_product(bern, z, tan_at(z, {2}), tan_at(z, {2})) == doctest::Approx(1.0));
}

TEST_CASE("inner product and metric report bad inputs") {
  const auto e2 = make_model_from_spec("euclidean:2");
  const Point a = pt({0, 0});
  const Point b = pt({1, 0});
  CHECK_THROWS_AS(inner_product(e2, a, tan_at(a, {1, 0}), tan_at(b, {1, 0})), BaseMismatch);
  CHECK_THROWS_AS(metric_at(e2, pt({1, 2, 3})), PointOutOfDomain);

  const auto s = make_model_from_spec("sphere:2:1");
  CHECK_THROWS_AS(metric_at(s, pt({0.05, 0.0})), PointOutOfDomain);
  const auto cat = make_model_from_spec("alpha_categorical:2:0.5");
  CHECK_THROWS_AS(metric_at(cat, pt({0.6, 0.5})), PointOutOfDomain);
  CHECK_THROWS_AS(metric_at(cat, pt({0.0005, 0.5})), PointOutOfDomain);
  const auto g = make_model_from_spec("gaussian1d");
  CHECK_THROWS_AS(metric_at(g, pt({0.0, 0.5})), PointOutOfDomain);
}

TEST_CASE("categorical metric and dual symbols are derivatives of the log-partition") {
  const auto m = make_model_from_spec("categorical:2");
  Rng rng(5);
  const double h = 1e-3;
  for (int trial = 0; trial < 20; ++trial) {
    const Point p(m.family().sample(rng));
    const Mat g = metric_at(m, p);
    const Christoffel gs = christoffel_at(m, p, ConnectionKind::Dual);
    const Christoffel gp = christoffel_at(m, p, ConnectionKind::Primal);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const Vec ei = Vec::Unit(2, i) * h;
        const Vec ej = Vec::Unit(2, j) * h;
        const Vec& x = p.coords;
        const double d2 = (psi(x + ei + ej) - psi(x + ei - ej) - psi(x - ei + ej) +
                           psi(x - ei - ej)) / (4 * h * h);
        CHECK(std::abs(g(i, j) - d2) < 1e-6);
        for (int k = 0; k < 2; ++k) {
          CHECK(gp(i, j, k) == 0.0);
          // Third derivative of psi as a central difference of the metric.
          const Vec ek = Vec::Unit(2, k) * h;
          const double d3 = (metric_at(m, Point(x + ek))(i, j) - metric_at(m, Point(x - ek))(i, j)) /
                            (2 * h);
          CHECK(std::abs(gs(i, j, k) - d3) < 1e-6);
        }
      }
  }
}

TEST_CASE("mixture coordinates convert by exact log ratios") {
  const auto m = make_model_from_spec("categorical:2");
  const std::vector<double> probs{0.2, 0.5, 0.3};
  const Vec theta = m.family().from_mixture(probs);
  const auto expect = oracle::categorical_theta(probs);
  CHECK(theta[0] == doctest::Approx(expect[0]).epsilon(1e-15));
  CHECK(theta[1] == doctest::Approx(expect[1]).epsilon(1e-15));
  const std::vector<double> tail{0.5, 0.3};
  CHECK(m.family().from_mixture(tail).isApprox(theta, 1e-14));
  const std::vector<double> bad{0.5, 0.6, 0.1};
  CHECK_THROWS(m.family().from_mixture(bad));
  CHECK_THROWS_AS(make_model_from_spec("euclidean:2").family().from_mixture(tail),
                  InvalidModelSpec);
}

TEST_CASE("property: metrics are symmetric positive definite and duality holds") {
  for (const auto& model : default_models()) {
    CAPTURE(model.spec());
    Rng rng(101);
    for (const Point& p : sample_points(model, 100, rng)) {
      const Mat g = metric_at(model, p);
      CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<Mat>(g).eigenvalues().minCoeff() > 0.0);
      CHECK(duality_residual(model, p, 1e-5) <= 1e-6);
    }
  }
}

TEST_CASE("property: connections are torsion free and self-dual builtins have equal symbols") {
  for (const auto& model : default_models()) {
    CAPTURE(model.spec());
    Rng rng(202);
    const int n = model.dim();
    for (const Point& p : sample_points(model, 30, rng)) {
      const auto a = christoffel_at(model, p, ConnectionKind::Primal);
      const auto b = christoffel_at(model, p, ConnectionKind::Dual);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k) {
            CHECK(a(i, j, k) == a(j, i, k));
            CHECK(b(i, j, k) == b(j, i, k));
            if (model.declared_class() == StructureClass::SelfDual) CHECK(a(i, j, k) == b(i, j, k));
          }
    }
  }
}

TEST_CASE("alpha family satisfies duality at 100 random interior points") {
  const auto m = make_model_from_spec("alpha_categorical:2:0.5");
  Rng rng(303);
  for (int i = 0; i < 100; ++i) {
    const Point p(m.family().sample(rng));
    CHECK(duality_residual(m, p) <= 1e-6);
  }
}
