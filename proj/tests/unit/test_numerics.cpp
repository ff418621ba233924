#include "oracles.hpp"

#include "dualgeo/curve.hpp"
#include "dualgeo/ode.hpp"
#include "dualgeo/quadrature.hpp"
#include "dualgeo/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace dualgeo;

TEST_CASE("dopri5 integrates exponential growth") {
  ode::State y(1);
  y << 1.0;
  auto rhs = [](double, const ode::State& s, ode::State& d) { d = s; };
  const auto res = ode::dopri5(rhs, 0.0, 1.0, y, ode::Options{});
  REQUIRE(res.status == ode::Status::Ok);
  CHECK(res.t == 1.0);
  CHECK(std::abs(res.y[0] - std::exp(1.0)) < 1e-9);
}

TEST_CASE("dopri5 keeps a harmonic oscillator on its circle and lands on stops") {
  ode::State y(2);
  y << 1.0, 0.0;
  auto rhs = [](double, const ode::State& s, ode::State& d) {
    d.resize(2);
    d << s[1], -s[0];
  };
  const std::vector<double> stops{0.25, 0.5, 1.75};
  std::vector<double> seen;
  const auto res = ode::dopri5(
      rhs, 0.0, 3.0, y, ode::Options{}, stops, [](const ode::State&) { return true; },
      [&](double t, const ode::State&, const ode::State&) { seen.push_back(t); });
  REQUIRE(res.status == ode::Status::Ok);
  CHECK(std::abs(res.y[0] - std::cos(3.0)) < 1e-8);
  CHECK(std::abs(res.y[1] + std::sin(3.0)) < 1e-8);
  for (double s : stops) CHECK(std::find(seen.begin(), seen.end(), s) != seen.end());
}

TEST_CASE("dopri5 reports leaving the admissible region") {
  ode::State y(1);
  y << 0.0;
  auto rhs = [](double, const ode::State&, ode::State& d) {
    d.resize(1);
    d << 1.0;
  };
  const auto res = ode::dopri5(
      rhs, 0.0, 1.0, y, ode::Options{}, {}, [](const ode::State& s) { return s[0] < 0.5; },
      [](double, const ode::State&, const ode::State&) {});
  CHECK(res.status == ode::Status::DomainExit);
  CHECK(res.t <= 0.5);
}

TEST_CASE("gauss-legendre is exact up to degree 2n - 1") {
  for (int n : {1, 2, 5, 16, 32}) {
    const auto rule = gauss_legendre(n);
    REQUIRE(rule.nodes.size() == static_cast<std::size_t>(n));
    CHECK(std::is_sorted(rule.nodes.begin(), rule.nodes.end()));
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
      CHECK(std::abs(s - oracle::monomial_integral(k)) < 1e-13);
    }
  }
}

TEST_CASE("gauss-legendre maps to arbitrary intervals") {
  const auto rule = gauss_legendre(8, -1.0, 3.0);
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::exp(rule.nodes[i]);
  CHECK(std::abs(s - (std::exp(3.0) - std::exp(-1.0))) < 1e-10);
}

namespace {

// q(t) = sum c_k t^k and its first two derivatives.
struct Quintic {
  std::array<double, 6> c;
  double x(double t) const {
    double s = 0.0;
    for (int k = 5; k >= 0; --k) s = s * t + c[k];
    return s;
  }
  double v(double t) const {
    double s = 0.0;
    for (int k = 5; k >= 1; --k) s = s * t + k * c[k];
    return s;
  }
  double a(double t) const {
    double s = 0.0;
    for (int k = 5; k >= 2; --k) s = s * t + k * (k - 1) * c[k];
    return s;
  }
};

}  // namespace

TEST_CASE("hermite interpolation reproduces quintics exactly") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Quintic q;
    for (auto& c : q.c) c = rng.uniform(-2.0, 2.0);
    std::vector<CurveSample> samples;
    for (double t : {0.0, 0.3, 1.0}) {
      CurveSample s;
      s.t = t;
      s.x = Vec::Constant(1, q.x(t));
      s.v = Vec::Constant(1, q.v(t));
      s.a = Vec::Constant(1, q.a(t));
      samples.push_back(s);
    }
    const Curve curve = Curve::from_samples(samples);
    for (double t = 0.0; t <= 1.0; t += 0.0625) {
      CHECK(std::abs(curve.position(t).coords[0] - q.x(t)) < 1e-12);
      CHECK(std::abs(curve.velocity(t).components[0] - q.v(t)) < 1e-11);
    }
  }
}

TEST_CASE("polylines have one piece per segment and constant velocity inside") {
  std::vector<Vec> vertices(3, Vec(2));
  vertices[0] << 0, 0;
  vertices[1] << 1, 0;
  vertices[2] << 1, 2;
  const Curve c = Curve::polyline(vertices);
  CHECK(c.piece_count() == 2);
  CHECK(c.position(0.25).coords.isApprox(Vec((Vec(2) << 0.5, 0.0).finished())));
  CHECK(c.velocity(0.25).components.isApprox(Vec((Vec(2) << 2.0, 0.0).finished())));
  CHECK(c.velocity(0.75).components.isApprox(Vec((Vec(2) << 0.0, 4.0).finished())));
  CHECK(c.end().coords.isApprox(vertices[2]));
}

TEST_CASE("curve construction rejects malformed pieces") {
  CurveSample a;
  a.t = 0.0;
  a.x = a.v = a.a = Vec::Zero(1);
  CurveSample b = a;
  b.t = 0.5;
  CHECK_THROWS_AS(Curve::from_samples({a, b}), std::invalid_argument);
  b.t = 0.0;
  CHECK_THROWS_AS(Curve::from_samples({a, b}), std::invalid_argument);
}

TEST_CASE("rng forks are deterministic and distinct") {
  const Rng root(42);
  Rng a = root.fork(3);
  Rng b = root.fork(3);
  Rng c = root.fork(4);
  const double x = a.uniform();
  CHECK(x == b.uniform());
  CHECK(x != c.uniform());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform(-1.0, 2.0);
    CHECK(u >= -1.0);
    CHECK(u < 2.0);
  }
}
