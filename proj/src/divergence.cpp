#include "dualgeo/divergence.hpp"

#include "dualgeo/quadrature.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <string>

namespace dualgeo {

std::string_view to_string(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::Ay: return "ay";
    case DivergenceKind::Canonical: return "canonical";
    case DivergenceKind::CanonicalDual: return "dual";
    case DivergenceKind::PseudoNorm: return "pseudonorm";
    case DivergenceKind::OracleKL: return "oracle";
  }
  return "canonical";
}

std::optional<DivergenceKind> parse_divergence_kind(std::string_view s) {
  if (s == "ay") return DivergenceKind::Ay;
  if (s == "canonical") return DivergenceKind::Canonical;
  if (s == "dual" || s == "canonical_dual") return DivergenceKind::CanonicalDual;
  if (s == "pseudonorm" || s == "pseudo_norm") return DivergenceKind::PseudoNorm;
  if (s == "oracle" || s == "oraclekl" || s == "kl") return DivergenceKind::OracleKL;
  return std::nullopt;
}

namespace {

bool near_diagonal(const Vec& p, const Vec& q) { return (q - p).norm() < kNearDiagonal; }

double quadratic_form(const ManifoldModel& model, const Vec& p, const Vec& q) {
  const Vec d = q - p;
  return d.dot(model.family().metric(p) * d);
}

// Shooting failures carry the path time at which they happened.
[[noreturn]] void rethrow_at(const ShootingNoConvergence& e, double t) {
  throw ShootingNoConvergence(std::string(e.what()) + " at t = " + std::to_string(t), t);
}

Vec transport_along_geodesic(const ManifoldModel& model, ConnectionKind geodesic,
                             ConnectionKind carry, const Vec& p, const Vec& velocity,
                             const Vec& w, const ToleranceConfig& cfg) {
  return detail::geodesic_end(model, geodesic, p, velocity, cfg,
                              detail::TransportRequest{carry, w})
      .w;
}

}  // namespace

namespace detail {

double canonical_impl(const ManifoldModel& model, ConnectionKind kind, const Vec& p,
                      const Vec& q, const ToleranceConfig& cfg, bool warm_start) {
  if (near_diagonal(p, q)) return 0.5 * quadratic_form(model, p, q);
  const ConnectionKind other = dual_of(kind);
  const Vec x_pq = solve_log(model, kind, p, q, cfg);
  const auto rule = gauss_legendre(cfg.quad_nodes);

  Curve sigma;
  try {
    sigma = geodesic_curve(model, kind, p, x_pq, cfg, rule.nodes,
                           std::numeric_limits<double>::infinity());
  } catch (const DomainExit& e) {
    throw QuadratureFailure(std::string("geodesic through the quadrature nodes: ") + e.what());
  }

  ShootingState warm;
  Vec prev_y;
  double total = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double t = rule.nodes[k];
    Vec x;
    Vec xdot;
    sigma.eval(0, t, &x, &xdot);
    ShootingState cold;
    ShootingState& st = warm_start ? warm : cold;
    Vec y;
    try {
      y = solve_log(model, other, p, x, cfg, &st);
      if (warm_start && k + 1 < rule.nodes.size()) {
        // Linear extrapolation of the log vector to the next node.
        const double next = rule.nodes[k + 1];
        st.guess = k == 0 ? Vec(y * (next / t))
                          : Vec(y + (y - prev_y) * ((next - t) / (t - rule.nodes[k - 1])));
      }
      prev_y = y;
    } catch (const ShootingNoConvergence& e) {
      rethrow_at(e, t);
    }
    Vec pi;
    try {
      pi = transport_along_geodesic(model, other, kind, p, y, t * x_pq, cfg);
    } catch (const DomainExit& e) {
      throw QuadratureFailure(std::string("quadrature node evaluation: ") + e.what());
    }
    total += rule.weights[k] * pi.dot(model.family().metric(x) * xdot);
  }
  return total;
}

double divergence_raw(const ManifoldModel& model, DivergenceKind which, const Vec& p,
                      const Vec& q, const ToleranceConfig& cfg) {
  switch (which) {
    case DivergenceKind::Canonical:
      return canonical_impl(model, ConnectionKind::Primal, p, q, cfg);
    case DivergenceKind::CanonicalDual:
      return canonical_impl(model, ConnectionKind::Dual, p, q, cfg);
    case DivergenceKind::Ay: {
      if (near_diagonal(p, q)) return 0.5 * quadratic_form(model, p, q);
      const Vec x_pq = solve_log(model, ConnectionKind::Primal, p, q, cfg);
      const auto rule = gauss_legendre(cfg.quad_nodes);
      Curve sigma;
      try {
        sigma = geodesic_curve(model, ConnectionKind::Primal, p, x_pq, cfg, rule.nodes,
                               std::numeric_limits<double>::infinity());
      } catch (const DomainExit& e) {
        throw QuadratureFailure(std::string("geodesic through the quadrature nodes: ") +
                                e.what());
      }
      double total = 0.0;
      for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        Vec x;
        Vec xdot;
        sigma.eval(0, rule.nodes[k], &x, &xdot);
        total += rule.weights[k] * rule.nodes[k] * xdot.dot(model.family().metric(x) * xdot);
      }
      return total;
    }
    case DivergenceKind::PseudoNorm: {
      if (near_diagonal(p, q)) return quadratic_form(model, p, q);
      const Vec x = solve_log(model, ConnectionKind::Primal, p, q, cfg);
      const Vec x_star = solve_log(model, ConnectionKind::Dual, p, q, cfg);
      return x.dot(model.family().metric(p) * x_star);
    }
    case DivergenceKind::OracleKL:
      return model.family().oracle(p, q);
  }
  return 0.0;
}

}  // namespace detail

namespace {

void check_pair(const ManifoldModel& model, const Point& p, const Point& q,
                const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  model.require(q);
}

}  // namespace

double ay_divergence(const ManifoldModel& model, const Point& p, const Point& q,
                     const ToleranceConfig& cfg) {
  check_pair(model, p, q, cfg);
  return detail::divergence_raw(model, DivergenceKind::Ay, p.coords, q.coords, cfg);
}

double canonical_divergence(const ManifoldModel& model, const Point& p, const Point& q,
                            const ToleranceConfig& cfg) {
  check_pair(model, p, q, cfg);
  return detail::canonical_impl(model, ConnectionKind::Primal, p.coords, q.coords, cfg);
}

double dual_canonical_divergence(const ManifoldModel& model, const Point& p, const Point& q,
                                 const ToleranceConfig& cfg) {
  check_pair(model, p, q, cfg);
  return detail::canonical_impl(model, ConnectionKind::Dual, p.coords, q.coords, cfg);
}

double pseudo_norm(const ManifoldModel& model, const Point& p, const Point& q,
                   const ToleranceConfig& cfg) {
  check_pair(model, p, q, cfg);
  return detail::divergence_raw(model, DivergenceKind::PseudoNorm, p.coords, q.coords, cfg);
}

double oracle_divergence(const ManifoldModel& model, const Point& p, const Point& q) {
  if (!model.has_oracle())
    throw OracleUnavailable("model " + model.spec() + " has no closed-form divergence");
  model.require(p);
  model.require(q);
  return model.family().oracle(p.coords, q.coords);
}

double divergence(const ManifoldModel& model, DivergenceKind which, const Point& p,
                  const Point& q, const ToleranceConfig& cfg) {
  if (which == DivergenceKind::OracleKL) return oracle_divergence(model, p, q);
  check_pair(model, p, q, cfg);
  return detail::divergence_raw(model, which, p.coords, q.coords, cfg);
}

PiPair pi_field(const ManifoldModel& model, const Point& p, const Curve& gamma, double t,
                const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  const Point x = gamma.position(t);
  model.require(x);
  const int n = model.dim();
  if (x == p) return {Tangent(x, Vec::Zero(n)), Tangent(x, Vec::Zero(n))};
  Vec log_primal;
  Vec log_dual;
  try {
    log_primal = detail::solve_log(model, ConnectionKind::Primal, p.coords, x.coords, cfg);
    log_dual = detail::solve_log(model, ConnectionKind::Dual, p.coords, x.coords, cfg);
  } catch (const ShootingNoConvergence& e) {
    rethrow_at(e, t);
  }
  const Vec pi = transport_along_geodesic(model, ConnectionKind::Dual, ConnectionKind::Primal,
                                          p.coords, log_dual, log_primal, cfg);
  const Vec pi_star = transport_along_geodesic(model, ConnectionKind::Primal, ConnectionKind::Dual,
                                               p.coords, log_primal, log_dual, cfg);
  return {Tangent(x, pi), Tangent(x, pi_star)};
}

PathFunctionalResult path_functional(const ManifoldModel& model, const Point& p,
                                     const Curve& gamma, const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  if (gamma.dim() != model.dim()) throw BaseMismatch("path dimension does not match the model");
  PathFunctionalResult out;
  detail::ShootingState warm_primal;
  detail::ShootingState warm_dual;
  for (std::size_t piece = 0; piece < gamma.piece_count(); ++piece) {
    const auto rule = gauss_legendre(cfg.quad_nodes, gamma.piece_begin(piece), gamma.piece_end(piece));
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double t = rule.nodes[k];
      Vec x;
      Vec xdot;
      gamma.eval(piece, t, &x, &xdot);
      if (!model.contains(x)) throw QuadratureFailure("path leaves the model domain");
      if (x == p.coords) continue;
      Vec log_primal;
      Vec log_dual;
      try {
        log_primal = detail::solve_log(model, ConnectionKind::Primal, p.coords, x, cfg, &warm_primal);
        log_dual = detail::solve_log(model, ConnectionKind::Dual, p.coords, x, cfg, &warm_dual);
      } catch (const ShootingNoConvergence& e) {
        rethrow_at(e, t);
      }
      Vec pi;
      Vec pi_star;
      try {
        pi = transport_along_geodesic(model, ConnectionKind::Dual, ConnectionKind::Primal,
                                      p.coords, log_dual, log_primal, cfg);
        pi_star = transport_along_geodesic(model, ConnectionKind::Primal, ConnectionKind::Dual,
                                           p.coords, log_primal, log_dual, cfg);
      } catch (const DomainExit& e) {
        throw QuadratureFailure(std::string("quadrature node evaluation: ") + e.what());
      }
      const Vec g_xdot = model.family().metric(x) * xdot;
      out.primal_integral += rule.weights[k] * pi.dot(g_xdot);
      out.dual_integral += rule.weights[k] * pi_star.dot(g_xdot);
    }
  }
  out.sum = out.primal_integral + out.dual_integral;
  return out;
}

Tangent divergence_gradient(const ManifoldModel& model, DivergenceKind which, const Point& p,
                            const Point& q, const ToleranceConfig& cfg) {
  check_pair(model, p, q, cfg);
  if (which == DivergenceKind::OracleKL && !model.has_oracle())
    throw OracleUnavailable("model " + model.spec() + " has no closed-form divergence");
  const int n = model.dim();
  const double h = cfg.fd_step;
  Vec partial(n);
  for (int i = 0; i < n; ++i) {
    Point qp = q;
    Point qm = q;
    qp.coords[i] += h;
    qm.coords[i] -= h;
    model.require(qp);
    model.require(qm);
    partial[i] = (detail::divergence_raw(model, which, p.coords, qp.coords, cfg) -
                  detail::divergence_raw(model, which, p.coords, qm.coords, cfg)) /
                 (2.0 * h);
  }
  const Eigen::LDLT<Mat> g(model.family().metric(q.coords));
  return Tangent(q, g.solve(partial));
}

}  // namespace dualgeo
