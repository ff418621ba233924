#include "oracles.hpp"

#include "dualgeo/geodesic.hpp"
#include "dualgeo/sampling.hpp"

#include <doctest.h>

#include <Eigen/Cholesky>

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

Vec vec(std::initializer_list<double> xs) { return pt(xs).coords; }

// Random tangent at p with metric norm `length`.
Tangent random_tangent(const ManifoldModel& m, const Point& p, double length, Rng& rng) {
  Vec v(m.dim());
  for (int i = 0; i < m.dim(); ++i) v[i] = rng.uniform(-1.0, 1.0);
  Tangent t(p, v);
  t.components *= length / norm(m, t);
  return t;
}

// Draws (p, v) with exp_p(v) defined.
std::pair<Point, Tangent> random_shot(const ManifoldModel& m, double max_length, Rng& rng) {
  while (true) {
    const Point p(m.family().sample(rng));
    const Tangent v = random_tangent(m, p, rng.uniform(0.05, max_length), rng);
    try {
      (void)exp_map(m, ConnectionKind::Primal, p, v);
      (void)exp_map(m, ConnectionKind::Dual, p, v);
      return {p, v};
    } catch (const DomainExit&) {
    }
  }
}

}  // namespace

TEST_CASE("euclidean geodesics are straight lines") {
  const auto m = make_model_from_spec("euclidean:2");
  const Point o = pt({0, 0});
  const Curve c = integrate_geodesic(m, ConnectionKind::Primal, o, {o, vec({3, 4})});
  CHECK((c.end().coords - vec({3, 4})).norm() < 1e-12);
  CHECK((c.position(0.5).coords - vec({1.5, 2})).norm() < 1e-12);
  CHECK((log_map(m, ConnectionKind::Dual, o, pt({3, 4})).components - vec({3, 4})).norm() < 1e-12);
  const Curve line = Curve::polyline(std::vector<Vec>{vec({0, 0}), vec({1, 1}), vec({2, 0})});
  const Tangent w = parallel_transport(m, ConnectionKind::Primal, line, {o, vec({0.3, -2})});
  CHECK((w.components - vec({0.3, -2})).norm() < 1e-12);
  CHECK(w.base == line.end());
}

TEST_CASE("exp of zero and log of the base point vanish") {
  for (const auto& m : default_models()) {
    CAPTURE(m.spec());
    const Point p(m.family().reference_point());
    for (auto kind : {ConnectionKind::Primal, ConnectionKind::Dual}) {
      CHECK(exp_map(m, kind, p, {p, Vec::Zero(m.dim())}) == p);
      CHECK(log_map(m, kind, p, p).components.norm() == 0.0);
    }
  }
}

TEST_CASE("primal geodesics of the exponential families are chart lines") {
  for (const char* spec : {"categorical:1", "categorical:3", "gaussian1d"}) {
    const auto m = make_model_from_spec(spec);
    Rng rng(9);
    const Point p(m.family().sample(rng));
    const Vec v = Vec::Constant(m.dim(), 0.05);
    const Curve c = integrate_geodesic(m, ConnectionKind::Primal, p, {p, v});
    for (double t : {0.1, 0.37, 0.8, 1.0})
      CHECK((c.position(t).coords - (p.coords + t * v)).norm() < 1e-12);
  }
}

TEST_CASE("sphere: quarter great circle from the equator") {
  const auto m = make_model_from_spec("sphere:2:1");
  const Point p = pt({std::numbers::pi / 2, 0.0});
  const Point q = exp_map(m, ConnectionKind::Primal, p, {p, vec({0.0, std::numbers::pi / 2})});
  CHECK(std::abs(q.coords[0] - std::numbers::pi / 2) < 1e-9);
  CHECK(std::abs(q.coords[1] - std::numbers::pi / 2) < 1e-9);

  const Point a = pt({1.2, -0.4});
  const Point b = exp_map(m, ConnectionKind::Primal, a, {a, vec({0.5, 0.9})});
  const double angle = oracle::great_circle_angle(a.coords[0], a.coords[1], b.coords[0], b.coords[1]);
  CHECK(norm(m, {a, vec({0.5, 0.9})}) == doctest::Approx(angle).epsilon(1e-9));
}

TEST_CASE("sphere: log map length is the great-circle angle") {
  const auto m = make_model_from_spec("sphere:2:1");
  Rng rng(17);
  for (int i = 0; i < 20; ++i) {
    const Point p(m.family().sample(rng));
    const Point q(m.family().sample(rng));
    const Tangent v = log_map(m, ConnectionKind::Primal, p, q);
    const double angle =
        oracle::great_circle_angle(p.coords[0], p.coords[1], q.coords[0], q.coords[1]);
    CHECK(std::abs(norm(m, v) - angle) < 1e-8);
  }
}

TEST_CASE("sphere: holonomy around a geodesic triangle equals its area") {
  const auto m = make_model_from_spec("sphere:2:1");
  const std::vector<Point> corners{pt({1.2, -0.3}), pt({1.9, 0.2}), pt({1.3, 0.7})};
  Tangent w(corners[0], vec({0.3, 0.8}));
  const Tangent w0 = w;
  for (int s = 0; s < 3; ++s) {
    const Point& a = corners[static_cast<std::size_t>(s)];
    const Point& b = corners[static_cast<std::size_t>((s + 1) % 3)];
    const Curve side =
        integrate_geodesic(m, ConnectionKind::Primal, a, log_map(m, ConnectionKind::Primal, a, b));
    REQUIRE((w.base.coords - a.coords).norm() < 1e-8);
    w = parallel_transport(m, ConnectionKind::Primal, side, Tangent(a, w.components));
    CHECK(norm(m, w) == doctest::Approx(norm(m, w0)).epsilon(1e-9));
  }
  REQUIRE((w.base.coords - corners[0].coords).norm() < 1e-8);
  // Oriented angle between w0 and w in the metric at the first corner.
  const Point& c = corners[0];
  const double sin_t = std::sin(c.coords[0]);
  const double dot = inner_product(m, c, w0, {c, w.components});
  const double cross = sin_t * (w0.components[0] * w.components[1] - w0.components[1] * w.components[0]);
  const double rotation = std::atan2(cross, dot);

  std::vector<std::array<double, 3>> e;
  for (const auto& k : corners) e.push_back(oracle::sphere_point(k.coords[0], k.coords[1]));
  const std::array<double, 3> bxc{e[1][1] * e[2][2] - e[1][2] * e[2][1],
                                  e[1][2] * e[2][0] - e[1][0] * e[2][2],
                                  e[1][0] * e[2][1] - e[1][1] * e[2][0]};
  const double area = 2.0 * std::atan2(std::abs(oracle::dot3(e[0], bxc)),
                                       1.0 + oracle::dot3(e[0], e[1]) + oracle::dot3(e[1], e[2]) +
                                           oracle::dot3(e[2], e[0]));
  CHECK(std::abs(std::abs(rotation) - area) < 1e-7);
}

TEST_CASE("geodesic and log map failures are reported") {
  const auto s = make_model_from_spec("sphere:2:1");
  const Point p = pt({0.5, 0.0});
  CHECK_THROWS_AS(exp_map(s, ConnectionKind::Primal, p, {p, vec({-1.0, 0.0})}), DomainExit);
  ToleranceConfig one_step;
  one_step.shoot_max_iter = 1;
  CHECK_THROWS_AS(log_map(s, ConnectionKind::Primal, pt({0.8, -1.0}), pt({2.2, 1.2}), one_step),
                  ShootingNoConvergence);
  CHECK_THROWS_AS(exp_map(s, ConnectionKind::Primal, p, {pt({0.6, 0.0}), vec({0, 1})}),
                  BaseMismatch);
  ToleranceConfig bad;
  bad.ode_rel_tol = -1;
  CHECK_THROWS_AS(exp_map(s, ConnectionKind::Primal, p, {p, vec({0, 1})}, bad), InvalidConfig);
}

TEST_CASE("property: log inverts exp for both connections on every builtin") {
  for (const auto& m : default_models()) {
    CAPTURE(m.spec());
    Rng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
      const auto [p, v] = random_shot(m, 0.6, rng);
      for (auto kind : {ConnectionKind::Primal, ConnectionKind::Dual}) {
        const Point q = exp_map(m, kind, p, v);
        const Tangent back = log_map(m, kind, p, q);
        CHECK((back.components - v.components).lpNorm<Eigen::Infinity>() <= 1e-8);
      }
    }
  }
}

TEST_CASE("property: dual transports preserve the metric pairing") {
  for (const auto& m : default_models()) {
    CAPTURE(m.spec());
    Rng rng(505);
    for (int trial = 0; trial < 10; ++trial) {
      const auto [p, v] = random_shot(m, 0.6, rng);
      const Curve path = integrate_geodesic(m, ConnectionKind::Dual, p, v);
      const Tangent a = random_tangent(m, p, 1.0, rng);
      const Tangent b = random_tangent(m, p, 1.0, rng);
      const Tangent pa = parallel_transport(m, ConnectionKind::Primal, path, a);
      const Tangent pb = parallel_transport(m, ConnectionKind::Dual, path, b);
      CHECK(std::abs(inner_product(m, path.end(), pa, pb) - inner_product(m, p, a, b)) <= 1e-8);
      if (m.declared_class() == StructureClass::SelfDual)
        CHECK(std::abs(norm(m, pa) - 1.0) <= 1e-8);
    }
  }
}

TEST_CASE("property: interpolated geodesics satisfy the geodesic equation") {
  for (const auto& m : default_models()) {
    CAPTURE(m.spec());
    Rng rng(606);
    for (int trial = 0; trial < 5; ++trial) {
      const auto [p, v] = random_shot(m, 0.6, rng);
      for (auto kind : {ConnectionKind::Primal, ConnectionKind::Dual}) {
        const Curve c = integrate_geodesic(m, kind, p, v);
        const double h = 1e-4;
        for (int i = 1; i <= 10; ++i) {
          const double t = i / 11.0;
          const Point x = c.position(t);
          const Vec xd = c.velocity(t).components;
          const Vec acc = (c.velocity(t + h).components - c.velocity(t - h).components) / (2 * h);
          const Mat g = metric_at(m, x);
          const Vec lowered = christoffel_at(m, x, kind).contract(xd, xd);
          const Vec residual = acc + g.ldlt().solve(lowered);
          CHECK(residual.lpNorm<Eigen::Infinity>() <= 1e-6);
        }
      }
    }
  }
}

TEST_CASE("property: geodesics reparametrize affinely") {
  for (const auto& m : default_models()) {
    CAPTURE(m.spec());
    Rng rng(707);
    for (int trial = 0; trial < 10; ++trial) {
      auto [p, v] = random_shot(m, 0.3, rng);
      const Point end = exp_map(m, ConnectionKind::Primal, p, v);
      Tangent twice = v;
      twice.components *= 2.0;
      try {
        const Curve fast = integrate_geodesic(m, ConnectionKind::Primal, p, twice);
        CHECK((fast.position(0.5).coords - end.coords).norm() <= 1e-8);
      } catch (const DomainExit&) {
      }
    }
  }
}
