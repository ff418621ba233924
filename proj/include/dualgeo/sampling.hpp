#pragma once

#include "dualgeo/curve.hpp"
#include "dualgeo/manifold.hpp"
#include "dualgeo/random.hpp"
#include "dualgeo/tolerance.hpp"

#include <vector>

namespace dualgeo {

struct PointPair {
  Point p;
  Point q;
};

/// Uniform draws from the model's safe sampling box.
std::vector<Point> sample_points(const ManifoldModel& model, std::size_t count, Rng& rng);

/// Draws pairs from the safe box and keeps those whose primal and dual log
/// maps both converge. Gives up after `count * 20` draws and returns what it has.
std::vector<PointPair> sample_pairs(const ManifoldModel& model, std::size_t count, Rng& rng,
                                    const ToleranceConfig& cfg = {});

/// Polyline p -> v_1 -> ... -> v_k -> q whose interior vertices are jittered
/// points of the chord, redrawn until they lie in the domain.
Curve random_polyline(const ManifoldModel& model, const Point& p, const Point& q,
                      int interior_vertices, Rng& rng);

}  // namespace dualgeo
