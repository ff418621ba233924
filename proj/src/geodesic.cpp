#include "dualgeo/geodesic.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <string>

namespace dualgeo {
namespace detail {
namespace {

using ode::State;

// y = [x, x', w]: geodesic of `geo`, with w carried by `carry` when present.
class GeodesicRhs {
 public:
  GeodesicRhs(const ModelFamily& family, int n, ConnectionKind geo,
              std::optional<ConnectionKind> carry)
      : family_(family), n_(n), geo_(geo), carry_(carry) {}

  void operator()(double, const State& y, State& dy) {
    const Vec x = y.head(n_);
    const Vec v = y.segment(n_, n_);
    const Eigen::LDLT<Mat> g(family_.metric(x));
    family_.christoffel(x, geo_, gamma_);
    dy.head(n_) = v;
    dy.segment(n_, n_) = -g.solve(gamma_.contract(v, v));
    if (carry_) {
      const Vec w = y.segment(2 * n_, n_);
      if (*carry_ == geo_) {
        dy.segment(2 * n_, n_) = -g.solve(gamma_.contract(v, w));
      } else {
        family_.christoffel(x, *carry_, carry_gamma_);
        dy.segment(2 * n_, n_) = -g.solve(carry_gamma_.contract(v, w));
      }
    }
  }

 private:
  const ModelFamily& family_;
  int n_;
  ConnectionKind geo_;
  std::optional<ConnectionKind> carry_;
  Christoffel gamma_;
  Christoffel carry_gamma_;
};

[[noreturn]] void throw_status(ode::Status status, std::string_view what) {
  if (status == ode::Status::DomainExit)
    throw DomainExit(std::string(what) + " left the model domain");
  throw IntegrationFailure(std::string(what) + ": step size collapsed");
}

State initial_state(const Vec& x0, const Vec& v0, const std::optional<TransportRequest>& carry) {
  const auto n = x0.size();
  State y(carry ? 3 * n : 2 * n);
  y.head(n) = x0;
  y.segment(n, n) = v0;
  if (carry) y.segment(2 * n, n) = carry->w0;
  return y;
}

}  // namespace

ode::Options ode_options(const ToleranceConfig& cfg) {
  ode::Options opt;
  opt.rel_tol = cfg.ode_rel_tol;
  opt.abs_tol = cfg.ode_abs_tol;
  return opt;
}

GeodesicEnd geodesic_end(const ManifoldModel& model, ConnectionKind kind, const Vec& x0,
                         const Vec& v0, const ToleranceConfig& cfg,
                         const std::optional<TransportRequest>& transport) {
  const int n = model.dim();
  const ModelFamily& family = model.family();
  GeodesicRhs rhs(family, n,
                  kind, transport ? std::optional<ConnectionKind>(transport->kind) : std::nullopt);
  const auto res = ode::dopri5(
      rhs, 0.0, 1.0, initial_state(x0, v0, transport), ode_options(cfg), {},
      [&](const State& y) { return family.contains(Vec(y.head(n))); },
      [](double, const State&, const State&) {});
  if (res.status != ode::Status::Ok) throw_status(res.status, "geodesic");
  GeodesicEnd end;
  end.x = res.y.head(n);
  end.v = res.y.segment(n, n);
  if (transport) end.w = res.y.segment(2 * n, n);
  return end;
}

Curve geodesic_curve(const ManifoldModel& model, ConnectionKind kind, const Vec& x0, const Vec& v0,
                     const ToleranceConfig& cfg, std::span<const double> stops, double max_step) {
  const int n = model.dim();
  const ModelFamily& family = model.family();
  GeodesicRhs rhs(family, n, kind, std::nullopt);
  auto opt = ode_options(cfg);
  opt.max_step = max_step;
  std::vector<CurveSample> samples;
  const auto res = ode::dopri5(
      rhs, 0.0, 1.0, initial_state(x0, v0, std::nullopt), opt, stops,
      [&](const State& y) { return family.contains(Vec(y.head(n))); },
      [&](double t, const State& y, const State& dy) {
        samples.push_back({t, y.head(n), y.segment(n, n), dy.segment(n, n)});
      });
  if (res.status != ode::Status::Ok) throw_status(res.status, "geodesic");
  return Curve::from_samples(std::move(samples));
}

Vec solve_log(const ManifoldModel& model, ConnectionKind kind, const Vec& p, const Vec& q,
              const ToleranceConfig& cfg, ShootingState* state) {
  const int n = model.dim();
  ShootingState local;
  ShootingState& st = state ? *state : local;
  if (p == q) {
    st.has_guess = true;
    st.guess = Vec::Zero(n);
    return st.guess;
  }

  auto residual = [&](const Vec& v, Vec& r) {
    ++st.integrations;
    try {
      r = geodesic_end(model, kind, p, v, cfg).x - q;
      return r.allFinite();
    } catch (const DomainExit&) {
      return false;
    } catch (const IntegrationFailure&) {
      return false;
    }
  };

  auto jacobian = [&](const Vec& v, const Vec& r0) {
    Mat jac(n, n);
    const double h = cfg.fd_step;
    for (int i = 0; i < n; ++i) {
      Vec vp = v;
      Vec vm = v;
      vp[i] += h;
      vm[i] -= h;
      Vec rp;
      Vec rm;
      const bool okp = residual(vp, rp);
      const bool okm = residual(vm, rm);
      if (okp && okm) {
        jac.col(i) = (rp - rm) / (2.0 * h);
      } else if (okp) {
        jac.col(i) = (rp - r0) / h;
      } else if (okm) {
        jac.col(i) = (r0 - rm) / h;
      } else {
        throw ShootingNoConvergence("shooting Jacobian stencil left the domain");
      }
    }
    return jac;
  };

  Vec v = st.has_guess && st.guess.size() == n ? st.guess : Vec(q - p);
  Vec r;
  {
    int shrink = 0;
    while (!residual(v, r)) {
      v *= 0.5;
      if (++shrink > 40) throw ShootingNoConvergence("no admissible initial velocity");
    }
  }
  // The differential of exp_p at 0 is the identity; start from it, refine it
  // with Broyden updates and fall back to finite differences once progress stalls.
  if (!st.has_jacobian || st.jacobian.rows() != n) {
    st.jacobian = Mat::Identity(n, n);
    st.has_jacobian = true;
  }
  bool fresh = false;
  double rn = r.lpNorm<Eigen::Infinity>();
  int polish = 0;
  bool converged = false;

  for (int iter = 0; iter < cfg.shoot_max_iter + 3; ++iter) {
    if (rn <= cfg.shoot_tol) {
      converged = true;
      // Up to two extra steps push the residual toward round-off so the
      // result is a smooth function of (p, q).
      if (polish >= 2 || rn <= 1e-3 * cfg.shoot_tol) break;
    } else if (iter >= cfg.shoot_max_iter) {
      break;
    }

    const Vec dv = -st.jacobian.partialPivLu().solve(r);
    double lambda = 1.0;
    bool accepted = false;
    Vec v_new;
    Vec r_new;
    double rn_new = 0.0;
    for (int ls = 0; ls < 12; ++ls) {
      v_new = v + lambda * dv;
      if (residual(v_new, r_new)) {
        rn_new = r_new.lpNorm<Eigen::Infinity>();
        if (rn_new < rn) {
          accepted = true;
          break;
        }
      }
      if (converged) break;
      lambda *= 0.5;
    }

    if (converged) {
      if (!accepted || rn_new > 0.5 * rn) break;
      ++polish;
    } else if (!accepted) {
      if (fresh) break;
      st.jacobian = jacobian(v, r);
      fresh = true;
      continue;
    }

    const bool slow = rn_new > 0.25 * rn;
    {
      const Vec step = v_new - v;
      const double s2 = step.squaredNorm();
      if (s2 > 0.0 && !converged) st.jacobian += ((r_new - r) - st.jacobian * step) * step.transpose() / s2;
    }
    v = v_new;
    r = r_new;
    rn = rn_new;
    fresh = false;
    if (slow && !converged && rn > cfg.shoot_tol) {
      st.jacobian = jacobian(v, r);
      fresh = true;
    }
  }

  if (!converged)
    throw ShootingNoConvergence("log map shooting did not converge (residual " +
                                std::to_string(rn) + ")");
  st.has_guess = true;
  st.guess = v;
  return v;
}

}  // namespace detail

Curve integrate_geodesic(const ManifoldModel& model, ConnectionKind kind, const Point& p,
                         const Tangent& v, const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  if (!(v.base == p)) throw BaseMismatch("initial velocity is not attached to p");
  // Step cap keeps the Hermite interpolant well below integrator error.
  return detail::geodesic_curve(model, kind, p.coords, v.components, cfg, {}, 1.0 / 16.0);
}

Point exp_map(const ManifoldModel& model, ConnectionKind kind, const Point& p, const Tangent& v,
              const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  if (!(v.base == p)) throw BaseMismatch("initial velocity is not attached to p");
  return Point(detail::geodesic_end(model, kind, p.coords, v.components, cfg).x);
}

Tangent log_map(const ManifoldModel& model, ConnectionKind kind, const Point& p, const Point& q,
                const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  model.require(q);
  return Tangent(p, detail::solve_log(model, kind, p.coords, q.coords, cfg));
}

Tangent parallel_transport(const ManifoldModel& model, ConnectionKind kind, const Curve& curve,
                           const Tangent& v, const ToleranceConfig& cfg) {
  cfg.validate();
  const int n = model.dim();
  if (curve.dim() != n) throw BaseMismatch("curve dimension does not match the model");
  const Point start = curve.start();
  if (!(v.base == start)) throw BaseMismatch("vector is not attached to the curve start");
  model.require(start);

  const ModelFamily& family = model.family();
  Vec w = v.components;
  Christoffel gamma;
  for (std::size_t piece = 0; piece < curve.piece_count(); ++piece) {
    auto rhs = [&](double t, const ode::State& y, ode::State& dy) {
      Vec x;
      Vec xdot;
      curve.eval(piece, t, &x, &xdot);
      const Eigen::LDLT<Mat> g(family.metric(x));
      family.christoffel(x, kind, gamma);
      dy = -g.solve(gamma.contract(xdot, Vec(y)));
    };
    ode::State y = w;
    const auto res = ode::dopri5(rhs, curve.piece_begin(piece), curve.piece_end(piece), y,
                                 detail::ode_options(cfg));
    if (res.status != ode::Status::Ok)
      throw IntegrationFailure("parallel transport integration failed");
    w = res.y;
  }
  return Tangent(curve.end(), w);
}

}  // namespace dualgeo
