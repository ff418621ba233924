#include "dualgeo/eguchi.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace dualgeo {

EguchiSteps eguchi_steps(double fd_step) {
  const double h = std::pow(fd_step, 2.0 / 3.0);
  return {fd_step, h, h};
}

namespace {

// Div(p + z_head, p + z_tail) for a displacement z in R^{2n}.
class DiagonalStencil {
 public:
  DiagonalStencil(const ManifoldModel& model, DivergenceKind which, const Vec& p,
                  const ToleranceConfig& cfg)
      : model_(model), which_(which), p_(p), cfg_(cfg), n_(model.dim()) {}

  double operator()(const Eigen::VectorXd& z) const {
    const Vec x = p_ + z.head(n_);
    const Vec y = p_ + z.tail(n_);
    if (!model_.family().contains(x) || !model_.family().contains(y))
      throw StencilOutOfDomain("finite-difference stencil around the diagonal leaves the domain");
    return detail::divergence_raw(model_, which_, x, y, cfg_);
  }

  Eigen::VectorXd unit(int u, double h) const {
    Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * n_);
    z[u] = h;
    return z;
  }

  double first(int u, double h) const { return ((*this)(unit(u, h)) - (*this)(unit(u, -h))) / (2 * h); }

  double second_plain(int u, int v, double h) const {
    if (u == v) {
      const double f0 = (*this)(Eigen::VectorXd::Zero(2 * n_));
      return ((*this)(unit(u, h)) - 2 * f0 + (*this)(unit(u, -h))) / (h * h);
    }
    const auto eu = unit(u, h);
    const auto ev = unit(v, h);
    return ((*this)(eu + ev) - (*this)(eu - ev) - (*this)(ev - eu) + (*this)(-eu - ev)) /
           (4 * h * h);
  }

  double second(int u, int v, double h) const {
    return (4 * second_plain(u, v, h / 2) - second_plain(u, v, h)) / 3;
  }

  // d_u d_v d_w with u, v in one argument block and w in the other.
  double third_plain(int u, int v, int w, double h) const {
    const auto ez = unit(w, h);
    if (u == v) {
      const auto ex = unit(u, h);
      return ((*this)(ex + ez) - 2 * (*this)(ez) + (*this)(ez - ex) - (*this)(ex - ez) +
              2 * (*this)(-ez) - (*this)(-ex - ez)) /
             (2 * h * h * h);
    }
    const auto ex = unit(u, h);
    const auto ey = unit(v, h);
    double sum = 0.0;
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
        for (int sz : {-1, 1}) sum += sx * sy * sz * (*this)(sx * ex + sy * ey + sz * ez);
    return sum / (8 * h * h * h);
  }

  double third(int u, int v, int w, double h) const {
    return (4 * third_plain(u, v, w, h / 2) - third_plain(u, v, w, h)) / 3;
  }

 private:
  const ManifoldModel& model_;
  DivergenceKind which_;
  Vec p_;
  const ToleranceConfig& cfg_;
  int n_;
};

// Gamma^l_jk at x, flattened as (l * n + j) * n + k.
std::vector<double> raised_christoffel(const ModelFamily& family, int n, const Vec& x,
                                       ConnectionKind kind) {
  const Mat ginv = family.metric(x).inverse();
  Christoffel gamma;
  family.christoffel(x, kind, gamma);
  std::vector<double> out(static_cast<std::size_t>(n * n * n), 0.0);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += ginv(l, m) * gamma(j, k, m);
        out[static_cast<std::size_t>((l * n + j) * n + k)] = s;
      }
  return out;
}

CurvatureTensor curvature_raw(const ManifoldModel& model, ConnectionKind kind, const Vec& x,
                              double h) {
  const int n = model.dim();
  const ModelFamily& family = model.family();
  auto at = [n](const std::vector<double>& g, int l, int j, int k) {
    return g[static_cast<std::size_t>((l * n + j) * n + k)];
  };
  const auto g0 = raised_christoffel(family, n, x, kind);
  std::vector<std::vector<double>> d(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec xp = x;
    Vec xm = x;
    xp[i] += h;
    xm[i] -= h;
    if (!family.contains(xp) || !family.contains(xm))
      throw StencilOutOfDomain("curvature stencil leaves the domain");
    Vec xp2 = x;
    Vec xm2 = x;
    xp2[i] += h / 2;
    xm2[i] -= h / 2;
    const auto gp = raised_christoffel(family, n, xp, kind);
    const auto gm = raised_christoffel(family, n, xm, kind);
    const auto gp2 = raised_christoffel(family, n, xp2, kind);
    const auto gm2 = raised_christoffel(family, n, xm2, kind);
    auto& di = d[static_cast<std::size_t>(i)];
    di.resize(gp.size());
    // Richardson extrapolation of the central differences with steps h and h/2.
    for (std::size_t e = 0; e < gp.size(); ++e)
      di[e] = (4 * (gp2[e] - gm2[e]) / h - (gp[e] - gm[e]) / (2 * h)) / 3;
  }
  // A^l_ijk = d_i Gamma^l_jk + Gamma^l_im Gamma^m_jk; R^l_ijk = A^l_ijk - A^l_jik.
  auto a = [&](int l, int i, int j, int k) {
    double s = at(d[static_cast<std::size_t>(i)], l, j, k);
    for (int m = 0; m < n; ++m) s += at(g0, l, i, m) * at(g0, m, j, k);
    return s;
  };
  CurvatureTensor r(n);
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const double v = a(l, i, j, k) - a(l, j, i, k);
          r(l, i, j, k) = v;
          r(l, j, i, k) = -v;
        }
  return r;
}

// max |(nabla_m R)^l_ijk| for the primal connection. The outer derivative of
// R is Richardson-extrapolated from steps H and H/2 with H well above the
// inner step.
double covariant_derivative_residual(const ManifoldModel& model, const Vec& x, double h) {
  const int n = model.dim();
  const double outer = 10 * h;
  const CurvatureTensor r0 = curvature_raw(model, ConnectionKind::Primal, x, h);
  const auto g0 = raised_christoffel(model.family(), n, x, ConnectionKind::Primal);
  auto gam = [&](int l, int j, int k) { return g0[static_cast<std::size_t>((l * n + j) * n + k)]; };
  auto derivative = [&](int m, double step) {
    Vec xp = x;
    Vec xm = x;
    xp[m] += step;
    xm[m] -= step;
    const CurvatureTensor rp = curvature_raw(model, ConnectionKind::Primal, xp, h);
    const CurvatureTensor rm = curvature_raw(model, ConnectionKind::Primal, xm, h);
    std::vector<double> d(rp.data().size());
    for (std::size_t e = 0; e < d.size(); ++e) d[e] = (rp.data()[e] - rm.data()[e]) / (2 * step);
    return d;
  };
  double worst = 0.0;
  for (int m = 0; m < n; ++m) {
    const auto coarse = derivative(m, outer);
    const auto fine = derivative(m, outer / 2);
    std::size_t e = 0;
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k, ++e) {
            double v = (4 * fine[e] - coarse[e]) / 3;
            for (int s = 0; s < n; ++s) {
              v += gam(l, m, s) * r0(s, i, j, k);
              v -= gam(s, m, i) * r0(l, s, j, k);
              v -= gam(s, m, j) * r0(l, i, s, k);
              v -= gam(s, m, k) * r0(l, i, j, s);
            }
            worst = std::max(worst, std::abs(v));
          }
  }
  return worst;
}

Vec unit_tangent(const Mat& g, Rng& rng, int n) {
  Vec v(n);
  do {
    for (int i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
  } while (v.norm() < 1e-3);
  return v / std::sqrt(v.dot(g * v));
}

}  // namespace

RecoveredStructure recover_structure(const ManifoldModel& model, DivergenceKind which,
                                     const Point& p, const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  if (which == DivergenceKind::OracleKL && !model.has_oracle())
    throw OracleUnavailable("model " + model.spec() + " has no closed-form divergence");
  const int n = model.dim();
  const EguchiSteps steps = eguchi_steps(cfg.fd_step);
  const DiagonalStencil f(model, which, p.coords, cfg);

  RecoveredStructure out;
  for (int u = 0; u < 2 * n; ++u)
    out.first_derivative_residual =
        std::max(out.first_derivative_residual, std::abs(f.first(u, steps.first)));

  Eigen::MatrixXd hess(2 * n, 2 * n);
  for (int u = 0; u < 2 * n; ++u)
    for (int v = u; v < 2 * n; ++v) hess(u, v) = hess(v, u) = f.second(u, v, steps.second);
  const Eigen::MatrixXd a = hess.topLeftCorner(n, n);
  const Eigen::MatrixXd b = hess.topRightCorner(n, n);
  const Eigen::MatrixXd c = hess.bottomRightCorner(n, n);
  out.metric = a;
  out.mixed_identity_residual =
      std::max((a + b).cwiseAbs().maxCoeff(), (a - c).cwiseAbs().maxCoeff());

  out.gamma.reset(n);
  out.gamma_star.reset(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double g = -f.third(i, j, n + k, steps.third);
        const double gs = -f.third(n + i, n + j, k, steps.third);
        out.gamma(i, j, k) = out.gamma(j, i, k) = g;
        out.gamma_star(i, j, k) = out.gamma_star(j, i, k) = gs;
      }
  return out;
}

double CurvatureTensor::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

CurvatureTensor curvature_tensor(const ManifoldModel& model, ConnectionKind kind, const Point& p,
                                 const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  return curvature_raw(model, kind, p.coords, cfg.fd_step);
}

double sectional_curvature(const ManifoldModel& model, ConnectionKind kind, const Point& p,
                           const ToleranceConfig& cfg) {
  if (model.dim() < 2) throw InvalidConfig("sectional curvature needs dimension >= 2");
  const CurvatureTensor r = curvature_tensor(model, kind, p, cfg);
  const Mat g = model.family().metric(p.coords);
  double num = 0.0;
  for (int l = 0; l < model.dim(); ++l) num += g(0, l) * r(l, 0, 1, 1);
  return num / (g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1));
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::SelfDual: return "SelfDual";
    case Verdict::DuallyFlat: return "DuallyFlat";
    case Verdict::Symmetric: return "Symmetric";
    case Verdict::General: return "General";
  }
  return "General";
}

ClassificationReport classify_manifold(const ManifoldModel& model,
                                       std::span<const Point> sample_points,
                                       const ToleranceConfig& cfg, std::uint64_t seed,
                                       double threshold) {
  cfg.validate();
  if (sample_points.empty()) throw InvalidConfig("classification needs at least one sample point");
  const int n = model.dim();
  const ModelFamily& family = model.family();
  ClassificationReport rep;
  rep.threshold = threshold;
  rep.points = sample_points.size();
  Rng rng(seed);
  Christoffel gamma;
  Christoffel gamma_star;
  for (const Point& p : sample_points) {
    model.require(p);
    family.christoffel(p.coords, ConnectionKind::Primal, gamma);
    family.christoffel(p.coords, ConnectionKind::Dual, gamma_star);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          rep.self_dual_residual =
              std::max(rep.self_dual_residual, std::abs(gamma(i, j, k) - gamma_star(i, j, k)));

    const CurvatureTensor r = curvature_raw(model, ConnectionKind::Primal, p.coords, cfg.fd_step);
    const CurvatureTensor rs = curvature_raw(model, ConnectionKind::Dual, p.coords, cfg.fd_step);
    rep.flatness_residual = std::max({rep.flatness_residual, r.max_abs(), rs.max_abs()});

    rep.symmetry_residuals.first = std::max(
        rep.symmetry_residuals.first, covariant_derivative_residual(model, p.coords, cfg.fd_step));

    const Mat g = family.metric(p.coords);
    for (int probe = 0; probe < kSymmetryProbesPerPoint; ++probe) {
      const Vec x = unit_tangent(g, rng, n);
      const Vec y = unit_tangent(g, rng, n);
      // g(R(Y, X) X, X)
      Vec rv = Vec::Zero(n);
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) rv[l] += r(l, i, j, k) * y[i] * x[j] * x[k];
      rep.symmetry_residuals.second =
          std::max(rep.symmetry_residuals.second, std::abs(x.dot(g * rv)));
    }
  }
  if (rep.self_dual_residual < threshold)
    rep.verdict = Verdict::SelfDual;
  else if (rep.flatness_residual < threshold)
    rep.verdict = Verdict::DuallyFlat;
  else if (rep.symmetry_residuals.first < threshold && rep.symmetry_residuals.second < threshold)
    rep.verdict = Verdict::Symmetric;
  else
    rep.verdict = Verdict::General;
  return rep;
}

double rank_agreement(std::span<const double> a, std::span<const double> b) {
  const std::size_t m = std::min(a.size(), b.size());
  if (m < 2) return 1.0;
  std::size_t agree = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j) {
      const double da = a[i] - a[j];
      const double db = b[i] - b[j];
      const bool tie_a = std::abs(da) <= 1e-9 * (1 + std::max(std::abs(a[i]), std::abs(a[j])));
      const bool tie_b = std::abs(db) <= 1e-9 * (1 + std::max(std::abs(b[i]), std::abs(b[j])));
      ++total;
      if (tie_a || tie_b) {
        if (tie_a && tie_b) ++agree;
      } else if ((da > 0) == (db > 0)) {
        ++agree;
      }
    }
  return static_cast<double>(agree) / static_cast<double>(total);
}

SymmetryRow symmetry_row(const ManifoldModel& model, const Point& p, const Point& q,
                         const ToleranceConfig& cfg) {
  SymmetryRow row;
  row.q = q;
  try {
    row.dual_forward = dual_canonical_divergence(model, p, q, cfg);
    row.primal_reverse = canonical_divergence(model, q, p, cfg);
    row.converged = true;
  } catch (const ShootingNoConvergence& e) {
    row.error = e.what();
  } catch (const QuadratureFailure& e) {
    row.error = e.what();
  }
  return row;
}

SymmetryProbeResult summarize_symmetry(const ManifoldModel& model, std::vector<SymmetryRow> rows) {
  SymmetryProbeResult res;
  res.rows = std::move(rows);
  std::vector<double> a;
  std::vector<double> b;
  double worst = 0.0;
  for (const auto& row : res.rows) {
    if (!row.converged) {
      ++res.skipped;
      continue;
    }
    a.push_back(row.dual_forward);
    b.push_back(row.primal_reverse);
    worst = std::max(worst,
                     std::abs(row.primal_reverse - row.dual_forward) / (1 + std::abs(row.dual_forward)));
  }
  res.rank_agreement = rank_agreement(a, b);
  const bool pointwise = model.declared_class() != StructureClass::General;
  if (pointwise) res.max_pointwise_error = worst;
  const bool skip_ok = static_cast<double>(res.skipped) <=
                       kMaxSkippedFraction * static_cast<double>(res.rows.size());
  res.passed = skip_ok && res.rank_agreement == 1.0 && (!pointwise || worst <= 1e-6);
  return res;
}

SymmetryProbeResult symmetry_probe(const ManifoldModel& model, const Point& p,
                                   std::span<const Point> sample_qs, const ToleranceConfig& cfg) {
  cfg.validate();
  model.require(p);
  std::vector<SymmetryRow> rows;
  rows.reserve(sample_qs.size());
  for (const Point& q : sample_qs) rows.push_back(symmetry_row(model, p, q, cfg));
  return summarize_symmetry(model, std::move(rows));
}

}  // namespace dualgeo
