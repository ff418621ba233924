#include "dualgeo/sampling.hpp"

#include "dualgeo/geodesic.hpp"

namespace dualgeo {

std::vector<Point> sample_points(const ManifoldModel& model, std::size_t count, Rng& rng) {
  std::vector<Point> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(model.family().sample(rng));
  return out;
}

std::vector<PointPair> sample_pairs(const ManifoldModel& model, std::size_t count, Rng& rng,
                                    const ToleranceConfig& cfg) {
  std::vector<PointPair> out;
  out.reserve(count);
  for (std::size_t attempt = 0; attempt < 20 * count && out.size() < count; ++attempt) {
    Point p(model.family().sample(rng));
    Point q(model.family().sample(rng));
    if (p == q) continue;
    try {
      detail::solve_log(model, ConnectionKind::Primal, p.coords, q.coords, cfg);
      detail::solve_log(model, ConnectionKind::Dual, p.coords, q.coords, cfg);
    } catch (const ShootingNoConvergence&) {
      continue;
    }
    out.push_back({std::move(p), std::move(q)});
  }
  return out;
}

Curve random_polyline(const ManifoldModel& model, const Point& p, const Point& q,
                      int interior_vertices, Rng& rng) {
  const double scale = (q.coords - p.coords).norm();
  std::vector<Vec> vertices{p.coords};
  for (int j = 1; j <= interior_vertices; ++j) {
    const Vec base = p.coords + (q.coords - p.coords) * (static_cast<double>(j) / (interior_vertices + 1));
    double jitter = 0.5 * scale;
    Vec v = base;
    for (int attempt = 0;; ++attempt) {
      v = base;
      for (int i = 0; i < model.dim(); ++i) v[i] += rng.uniform(-jitter, jitter);
      if (model.contains(v)) break;
      if (attempt % 10 == 9) jitter *= 0.5;
      if (attempt > 100) {
        v = base;
        break;
      }
    }
    vertices.push_back(v);
  }
  vertices.push_back(q.coords);
  return Curve::polyline(vertices);
}

}  // namespace dualgeo
