#pragma once

#include "dualgeo/curve.hpp"
#include "dualgeo/manifold.hpp"
#include "dualgeo/ode.hpp"
#include "dualgeo/tolerance.hpp"

#include <optional>
#include <span>

namespace dualgeo {

/// Geodesic of the chosen connection with sigma(0) = p, sigma'(0) = v, over
/// t in [0, 1]. Throws DomainExit if it leaves the domain and
/// IntegrationFailure if the step size collapses.
Curve integrate_geodesic(const ManifoldModel& model, ConnectionKind kind, const Point& p,
                         const Tangent& v, const ToleranceConfig& cfg = {});

Point exp_map(const ManifoldModel& model, ConnectionKind kind, const Point& p, const Tangent& v,
              const ToleranceConfig& cfg = {});

/// Inverse exponential map by Newton shooting on v -> exp_p(v) - q, started
/// from the chart difference q - p. Convergence is only expected when the
/// chart segment from p to q stays inside the domain; outside that basin
/// ShootingNoConvergence is a legitimate outcome.
Tangent log_map(const ManifoldModel& model, ConnectionKind kind, const Point& p, const Point& q,
                const ToleranceConfig& cfg = {});

/// Transports `v` (attached to curve.start()) to the curve's end by solving
/// w' + Gamma(gamma', w) = 0 for the chosen connection.
Tangent parallel_transport(const ManifoldModel& model, ConnectionKind kind, const Curve& curve,
                           const Tangent& v, const ToleranceConfig& cfg = {});

namespace detail {

ode::Options ode_options(const ToleranceConfig& cfg);

/// End state of a geodesic, optionally carrying a second vector along it by
/// another (or the same) connection.
struct GeodesicEnd {
  Vec x;
  Vec v;
  Vec w;
};

struct TransportRequest {
  ConnectionKind kind;
  Vec w0;
};

/// Integrates the `kind` geodesic from (x0, v0) over [0, 1]. When `stops` is
/// non-empty the returned curve samples land on each stop exactly.
GeodesicEnd geodesic_end(const ManifoldModel& model, ConnectionKind kind, const Vec& x0,
                         const Vec& v0, const ToleranceConfig& cfg,
                         const std::optional<TransportRequest>& transport = std::nullopt);

Curve geodesic_curve(const ManifoldModel& model, ConnectionKind kind, const Vec& x0, const Vec& v0,
                     const ToleranceConfig& cfg, std::span<const double> stops,
                     double max_step);

/// Warm-start memory for repeated shooting from the same base point.
struct ShootingState {
  bool has_guess = false;
  Vec guess;
  bool has_jacobian = false;
  Mat jacobian;
  int integrations = 0;
};

/// Solves exp_p(v) = q for v. Uses and updates `state` when non-null.
Vec solve_log(const ManifoldModel& model, ConnectionKind kind, const Vec& p, const Vec& q,
              const ToleranceConfig& cfg, ShootingState* state = nullptr);

}  // namespace detail
}  // namespace dualgeo
