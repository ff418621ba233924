#include "dualgeo/curve.hpp"

#include <algorithm>
#include <stdexcept>

namespace dualgeo {

Curve Curve::from_pieces(std::vector<std::vector<CurveSample>> pieces) {
  if (pieces.empty()) throw std::invalid_argument("curve needs at least one piece");
  double prev_end = 0.0;
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    const auto& s = pieces[p];
    if (s.size() < 2) throw std::invalid_argument("curve piece needs two samples");
    if (s.front().t != prev_end) throw std::invalid_argument("curve pieces must be contiguous from t = 0");
    for (std::size_t i = 1; i < s.size(); ++i)
      if (!(s[i].t > s[i - 1].t)) throw std::invalid_argument("curve times must increase strictly");
    prev_end = s.back().t;
  }
  if (prev_end != 1.0) throw std::invalid_argument("curve must end at t = 1");
  Curve c;
  c.pieces_ = std::move(pieces);
  return c;
}

Curve Curve::from_samples(std::vector<CurveSample> samples) {
  std::vector<std::vector<CurveSample>> pieces;
  pieces.push_back(std::move(samples));
  return from_pieces(std::move(pieces));
}

Curve Curve::polyline(std::span<const Vec> vertices) {
  if (vertices.size() < 2) throw std::invalid_argument("polyline needs two vertices");
  const auto segments = vertices.size() - 1;
  const double dt = 1.0 / static_cast<double>(segments);
  std::vector<std::vector<CurveSample>> pieces;
  for (std::size_t i = 0; i < segments; ++i) {
    const Vec vel = (vertices[i + 1] - vertices[i]) / dt;
    const Vec zero = Vec::Zero(vel.size());
    const double t0 = static_cast<double>(i) * dt;
    const double t1 = i + 1 == segments ? 1.0 : static_cast<double>(i + 1) * dt;
    pieces.push_back({{t0, vertices[i], vel, zero}, {t1, vertices[i + 1], vel, zero}});
  }
  return from_pieces(std::move(pieces));
}

std::size_t Curve::piece_of(double t) const {
  for (std::size_t p = 0; p + 1 < pieces_.size(); ++p)
    if (t < pieces_[p].back().t) return p;
  return pieces_.size() - 1;
}

void Curve::eval(std::size_t piece, double t, Vec* x, Vec* v) const {
  const auto& s = pieces_[piece];
  t = std::clamp(t, s.front().t, s.back().t);
  auto it = std::upper_bound(s.begin(), s.end(), t,
                             [](double value, const CurveSample& c) { return value < c.t; });
  std::size_t i = it == s.begin() ? 0 : static_cast<std::size_t>(it - s.begin()) - 1;
  if (i + 1 >= s.size()) i = s.size() - 2;
  const CurveSample& a = s[i];
  const CurveSample& b = s[i + 1];
  const double h = b.t - a.t;
  const double u = (t - a.t) / h;

  if (u == 0.0) {
    if (x) *x = a.x;
    if (v) *v = a.v;
    return;
  }
  if (u == 1.0) {
    if (x) *x = b.x;
    if (v) *v = b.v;
    return;
  }

  // Quintic Hermite basis on [0, 1].
  const double u2 = u * u, u3 = u2 * u, u4 = u3 * u, u5 = u4 * u;
  if (x) {
    const double h0 = 1 - 10 * u3 + 15 * u4 - 6 * u5;
    const double h1 = u - 6 * u3 + 8 * u4 - 3 * u5;
    const double h2 = 0.5 * u2 - 1.5 * u3 + 1.5 * u4 - 0.5 * u5;
    const double h3 = 10 * u3 - 15 * u4 + 6 * u5;
    const double h4 = -4 * u3 + 7 * u4 - 3 * u5;
    const double h5 = 0.5 * u3 - u4 + 0.5 * u5;
    *x = h0 * a.x + (h * h1) * a.v + (h * h * h2) * a.a + h3 * b.x + (h * h4) * b.v +
         (h * h * h5) * b.a;
  }
  if (v) {
    const double d0 = -30 * u2 + 60 * u3 - 30 * u4;
    const double d1 = 1 - 18 * u2 + 32 * u3 - 15 * u4;
    const double d2 = u - 4.5 * u2 + 6 * u3 - 2.5 * u4;
    const double d3 = 30 * u2 - 60 * u3 + 30 * u4;
    const double d4 = -12 * u2 + 28 * u3 - 15 * u4;
    const double d5 = 1.5 * u2 - 4 * u3 + 2.5 * u4;
    *v = (d0 / h) * a.x + d1 * a.v + (h * d2) * a.a + (d3 / h) * b.x + d4 * b.v + (h * d5) * b.a;
  }
}

Point Curve::position(double t) const {
  Vec x;
  eval(piece_of(t), t, &x, nullptr);
  return Point(std::move(x));
}

Tangent Curve::velocity(double t) const {
  Vec x;
  Vec v;
  eval(piece_of(t), t, &x, &v);
  return Tangent(Point(std::move(x)), std::move(v));
}

}  // namespace dualgeo
