#include "dualgeo/verify.hpp"

#include "dualgeo/eguchi.hpp"
#include "dualgeo/geodesic.hpp"
#include "dualgeo/parallel.hpp"
#include "dualgeo/sampling.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

namespace dualgeo {

std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::Eguchi: return "eguchi";
    case Suite::PathIndependence: return "pathindep";
    case Suite::Gradient: return "gradient";
    case Suite::Collapse: return "collapse";
    case Suite::Symmetry: return "symmetry";
    case Suite::Classification: return "classification";
    case Suite::All: return "all";
  }
  return "all";
}

std::optional<Suite> parse_suite(std::string_view s) {
  for (Suite v : {Suite::Eguchi, Suite::PathIndependence, Suite::Gradient, Suite::Collapse,
                  Suite::Symmetry, Suite::Classification, Suite::All})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

double gradient_identity_error(const ManifoldModel& model, const Point& p, const Point& q,
                               const ToleranceConfig& cfg) {
  const Vec ends[2] = {p.coords, q.coords};
  const Curve chord = Curve::polyline(ends);
  const PiPair pi = pi_field(model, p, chord, 1.0, cfg);
  const Tangent grad_r = divergence_gradient(model, DivergenceKind::PseudoNorm, p, q, cfg);
  const Vec d = pi.pi.components + pi.pi_star.components - grad_r.components;
  return std::sqrt(d.dot(model.family().metric(q.coords) * d));
}

DecompositionMeasure decomposition_measure(const ManifoldModel& model, ConnectionKind kind,
                                           const Point& p, const Point& q,
                                           const ToleranceConfig& cfg) {
  const Vec ends[2] = {p.coords, q.coords};
  const Curve chord = Curve::polyline(ends);
  const PiPair pis = pi_field(model, p, chord, 1.0, cfg);
  const Vec pi = kind == ConnectionKind::Primal ? pis.pi.components : pis.pi_star.components;
  const Vec x = detail::solve_log(model, kind, p.coords, q.coords, cfg);
  const Vec tangent = detail::geodesic_end(model, kind, p.coords, x, cfg).v;
  const DivergenceKind which =
      kind == ConnectionKind::Primal ? DivergenceKind::Canonical : DivergenceKind::CanonicalDual;
  const Vec grad = divergence_gradient(model, which, p, q, cfg).components;

  const Mat g = model.family().metric(q.coords);
  auto ip = [&](const Vec& a, const Vec& b) { return a.dot(g * b); };
  DecompositionMeasure m;
  const double scale = std::sqrt(ip(pi, pi) * ip(tangent, tangent));
  m.orthogonality = scale > 0 ? std::abs(ip(Vec(pi - grad), tangent)) / scale : 0.0;
  // atan2 of the perpendicular and parallel parts stays accurate near zero.
  const double tt = ip(tangent, tangent);
  const Vec perp = grad - tangent * (ip(grad, tangent) / tt);
  m.alignment_angle =
      std::atan2(std::sqrt(std::max(0.0, ip(perp, perp))), ip(grad, tangent) / std::sqrt(tt));
  return m;
}

PathIndependenceMeasure path_independence_from_sums(double pseudo_norm_value,
                                                    std::vector<double> sums) {
  PathIndependenceMeasure m;
  m.pseudo_norm = pseudo_norm_value;
  m.sums = std::move(sums);
  const double scale = 1.0 + std::abs(m.pseudo_norm);
  for (double sum : m.sums)
    m.pseudo_norm_error = std::max(m.pseudo_norm_error, std::abs(sum - m.pseudo_norm) / scale);
  if (!m.sums.empty()) {
    const auto [lo, hi] = std::minmax_element(m.sums.begin(), m.sums.end());
    m.spread = (*hi - *lo) / scale;
  }
  return m;
}

PathIndependenceMeasure path_independence_measure(const ManifoldModel& model, const Point& p,
                                                  const Point& q, std::span<const Curve> paths,
                                                  const ToleranceConfig& cfg) {
  std::vector<double> sums;
  for (const Curve& path : paths) sums.push_back(path_functional(model, p, path, cfg).sum);
  return path_independence_from_sums(pseudo_norm(model, p, q, cfg), std::move(sums));
}

namespace {

constexpr int kPathsPerPair = 5;
constexpr int kPathAttempts = 10;

struct SampleResult {
  std::vector<double> values;
  std::string error;
};

std::vector<SampleResult> run_samples(std::size_t count, unsigned threads,
                                      const std::function<std::vector<double>(std::size_t)>& fn) {
  std::vector<SampleResult> out(count);
  parallel_for(count, threads, [&](std::size_t i) {
    try {
      out[i].values = fn(i);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

// Folds column `column` of the sample results into one check.
CheckRecord fold(const std::string& id, const ManifoldModel& model, double tolerance,
                 const std::vector<SampleResult>& results, std::size_t column) {
  CheckRecord c;
  c.id = id;
  c.model = model.spec();
  c.tolerance = tolerance;
  for (const auto& r : results) {
    if (!r.error.empty()) {
      ++c.failures;
      if (c.note.empty()) c.note = r.error;
      continue;
    }
    if (column >= r.values.size()) continue;
    ++c.samples;
    const double v = r.values[column];
    if (std::isnan(v) || v > c.max_error) c.max_error = v;
  }
  c.passed = c.failures == 0 && c.samples > 0 && c.max_error <= tolerance;
  return c;
}

CheckRecord not_applicable(const std::string& id, const ManifoldModel& model, double tolerance,
                           const std::string& why) {
  CheckRecord c;
  c.id = id;
  c.model = model.spec();
  c.tolerance = tolerance;
  c.passed = true;
  c.note = "not applicable: " + why;
  return c;
}

double relative(double value, double reference) {
  return std::abs(value - reference) / (1.0 + std::abs(reference));
}

struct Context {
  const VerifyOptions& opt;
  const ManifoldModel& model;
  Rng rng;
};

void eguchi_suite(Context& ctx, std::vector<CheckRecord>& out) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.opt.cfg;
  const auto points = sample_points(model, ctx.opt.samples, ctx.rng);
  const int n = model.dim();
  const auto results = run_samples(points.size(), ctx.opt.threads, [&](std::size_t i) {
    const Point& p = points[i];
    const RecoveredStructure rs = recover_structure(model, DivergenceKind::Canonical, p, cfg);
    const Mat g = metric_at(model, p);
    const Christoffel gamma = christoffel_at(model, p, ConnectionKind::Primal);
    const Christoffel gamma_star = christoffel_at(model, p, ConnectionKind::Dual);
    double eg = 0.0;
    double egs = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          eg = std::max(eg, std::abs(rs.gamma(a, b, c) - gamma(a, b, c)));
          egs = std::max(egs, std::abs(rs.gamma_star(a, b, c) - gamma_star(a, b, c)));
        }
    const double metric_err = (rs.metric - g).cwiseAbs().maxCoeff() / g.cwiseAbs().maxCoeff();
    return std::vector<double>{metric_err,
                               eg,
                               egs,
                               rs.first_derivative_residual,
                               rs.mixed_identity_residual,
                               duality_residual(model, p)};
  });
  out.push_back(fold("eguchi.metric", model, 1e-4, results, 0));
  out.push_back(fold("eguchi.gamma", model, 1e-3, results, 1));
  out.push_back(fold("eguchi.gamma_star", model, 1e-3, results, 2));
  out.push_back(fold("eguchi.first_derivative", model, 1e-6, results, 3));
  out.push_back(fold("eguchi.mixed_identity", model, 1e-4, results, 4));
  out.push_back(fold("duality", model, 1e-6, results, 5));
}

void pathindep_suite(Context& ctx, std::vector<CheckRecord>& out) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.opt.cfg;
  const auto pairs = sample_pairs(model, ctx.opt.samples, ctx.rng, cfg);
  const Rng path_rng = ctx.rng.fork(0);
  const auto results = run_samples(pairs.size(), ctx.opt.threads, [&](std::size_t i) {
    const auto& [p, q] = pairs[i];
    Rng rng = path_rng.fork(i);
    std::vector<double> sums;
    for (int k = 0; k < kPathsPerPair; ++k) {
      // Redraw paths that leave the region where the log maps from p converge.
      for (int attempt = 1;; ++attempt) {
        const Curve path = random_polyline(model, p, q, 1 + k % 3, rng);
        try {
          sums.push_back(path_functional(model, p, path, cfg).sum);
          break;
        } catch (const ShootingNoConvergence&) {
          if (attempt == kPathAttempts) throw;
        } catch (const QuadratureFailure&) {
          if (attempt == kPathAttempts) throw;
        }
      }
    }
    const auto m = path_independence_from_sums(pseudo_norm(model, p, q, cfg), std::move(sums));
    return std::vector<double>{m.spread, m.pseudo_norm_error};
  });
  out.push_back(fold("pathindep.spread", model, 1e-5, results, 0));
  out.push_back(fold("pathindep.pseudo_norm", model, 1e-5, results, 1));
}

void gradient_suite(Context& ctx, std::vector<CheckRecord>& out) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.opt.cfg;
  const auto pairs = sample_pairs(model, ctx.opt.samples, ctx.rng, cfg);
  const auto results = run_samples(pairs.size(), ctx.opt.threads, [&](std::size_t i) {
    const auto& [p, q] = pairs[i];
    const auto primal = decomposition_measure(model, ConnectionKind::Primal, p, q, cfg);
    const auto dual = decomposition_measure(model, ConnectionKind::Dual, p, q, cfg);
    return std::vector<double>{gradient_identity_error(model, p, q, cfg), primal.orthogonality,
                               dual.orthogonality, primal.alignment_angle, dual.alignment_angle};
  });
  out.push_back(fold("gradient.identity", model, 1e-4, results, 0));
  out.push_back(fold("gradient.orthogonal", model, 1e-4, results, 1));
  out.push_back(fold("gradient.orthogonal_dual", model, 1e-4, results, 2));
  out.push_back(fold("gradient.alignment", model, 1e-3, results, 3));
  out.push_back(fold("gradient.alignment_dual", model, 1e-3, results, 4));
}

void collapse_suite(Context& ctx, std::vector<CheckRecord>& out) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.opt.cfg;
  const auto pairs = sample_pairs(model, ctx.opt.samples, ctx.rng, cfg);
  ToleranceConfig doubled = cfg;
  doubled.quad_nodes = 2 * cfg.quad_nodes;
  const bool self_dual = model.declared_class() == StructureClass::SelfDual;
  const bool oracle = model.has_oracle();
  const auto results = run_samples(pairs.size(), ctx.opt.threads, [&](std::size_t i) {
    const auto& [p, q] = pairs[i];
    const double d = canonical_divergence(model, p, q, cfg);
    const double d2 = canonical_divergence(model, p, q, doubled);
    const double ay = self_dual ? ay_divergence(model, p, q, cfg) : 0.0;
    const double kl = oracle ? oracle_divergence(model, p, q) : 0.0;
    return std::vector<double>{d > 0.0 ? 0.0 : 1.0, std::abs(d - d2), relative(d, ay),
                               relative(d, kl)};
  });
  {
    CheckRecord c = fold("collapse.positivity", model, 0.0, results, 0);
    c.note = c.note.empty() ? "max_error is 1 when some divergence was not positive" : c.note;
    out.push_back(c);
  }
  out.push_back(fold("collapse.quadrature_doubling", model, 1e-8, results, 1));
  if (self_dual)
    out.push_back(fold("collapse.ay", model, 1e-6, results, 2));
  else
    out.push_back(not_applicable("collapse.ay", model, 1e-6, "model is not self-dual"));
  if (oracle)
    out.push_back(fold("collapse.oracle", model, 1e-6, results, 3));
  else
    out.push_back(not_applicable("collapse.oracle", model, 1e-6, "no closed-form divergence"));
}

void symmetry_suite(Context& ctx, std::vector<CheckRecord>& out) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.opt.cfg;
  const Point p(model.family().sample(ctx.rng));
  const auto qs = sample_points(model, ctx.opt.samples, ctx.rng);
  std::vector<SymmetryRow> rows(qs.size());
  std::vector<double> asym(qs.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(qs.size(), ctx.opt.threads, [&](std::size_t i) {
    rows[i] = symmetry_row(model, p, qs[i], cfg);
    if (!rows[i].converged) return;
    try {
      const double r = pseudo_norm(model, p, qs[i], cfg);
      asym[i] = relative(pseudo_norm(model, qs[i], p, cfg), r);
    } catch (const Error&) {
    }
  });
  const SymmetryProbeResult res = summarize_symmetry(model, std::move(rows));
  const std::string label = model.spec();

  CheckRecord rank{"symmetry.rank_agreement", label, 1.0 - res.rank_agreement, 0.0,
                   res.rank_agreement == 1.0, qs.size() - res.skipped, res.skipped, ""};
  out.push_back(rank);

  const double skipped_fraction =
      qs.empty() ? 0.0 : static_cast<double>(res.skipped) / static_cast<double>(qs.size());
  out.push_back({"symmetry.skipped", label, skipped_fraction, kMaxSkippedFraction,
                 skipped_fraction <= kMaxSkippedFraction, qs.size(), 0, ""});

  if (res.max_pointwise_error) {
    out.push_back({"symmetry.pointwise", label, *res.max_pointwise_error, 1e-6,
                   *res.max_pointwise_error <= 1e-6, qs.size() - res.skipped, res.skipped, ""});
  } else {
    out.push_back(not_applicable("symmetry.pointwise", model, 1e-6,
                                 "pointwise symmetry is only expected on dually flat or self-dual models"));
  }

  CheckRecord r{"symmetry.pseudo_norm", label, 0.0, 1e-8, true, 0, 0, ""};
  for (double v : asym) {
    if (std::isnan(v)) {
      ++r.failures;
      continue;
    }
    ++r.samples;
    r.max_error = std::max(r.max_error, v);
  }
  r.passed = r.samples > 0 && r.max_error <= r.tolerance;
  out.push_back(r);
}

bool verdict_expected(const ManifoldModel& model, Verdict v) {
  switch (model.declared_class()) {
    case StructureClass::SelfDual: return v == Verdict::SelfDual;
    case StructureClass::DuallyFlat: return v == Verdict::DuallyFlat;
    case StructureClass::General: return v == Verdict::Symmetric || v == Verdict::General;
  }
  return false;
}

std::optional<double> expected_sectional_curvature(const ManifoldModel& model) {
  if (model.name() == "sphere") return 1.0 / (model.params()[1] * model.params()[1]);
  if (model.name() == "alpha_categorical" && model.dim() >= 2) {
    const double a = model.params()[1];
    return (1.0 - a * a) / 4.0;
  }
  if (model.name() == "euclidean" && model.dim() >= 2) return 0.0;
  return std::nullopt;
}

void classification_suite(Context& ctx, std::vector<CheckRecord>& out) {
  const auto& model = ctx.model;
  const auto& cfg = ctx.opt.cfg;
  const auto points = sample_points(model, ctx.opt.samples, ctx.rng);
  const std::string label = model.spec();
  CheckRecord verdict{"classification.verdict", label, 0.0, 0.0, false, points.size(), 0, ""};
  CheckRecord flat{"classification.flatness", label, 0.0, kClassificationThreshold, false,
                   points.size(), 0, ""};
  try {
    const auto rep = classify_manifold(model, points, cfg, ctx.rng.bits());
    verdict.passed = verdict_expected(model, rep.verdict);
    verdict.max_error = verdict.passed ? 0.0 : 1.0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "%s (self-dual %.3g, flatness %.3g, nabla R %.3g, R(Y,X,X,X) %.3g)",
                  std::string(to_string(rep.verdict)).c_str(), rep.self_dual_residual,
                  rep.flatness_residual, rep.symmetry_residuals.first,
                  rep.symmetry_residuals.second);
    verdict.note = buf;
    flat.max_error = rep.flatness_residual;
    flat.passed = rep.flatness_residual <= flat.tolerance;
  } catch (const Error& e) {
    verdict.failures = flat.failures = points.size();
    verdict.samples = flat.samples = 0;
    verdict.note = flat.note = e.what();
  }
  out.push_back(verdict);
  const bool flat_expected =
      model.declared_class() == StructureClass::DuallyFlat || model.name() == "euclidean";
  if (flat_expected)
    out.push_back(flat);
  else
    out.push_back(not_applicable("classification.flatness", model, kClassificationThreshold,
                                 "model is curved"));

  if (const auto k = expected_sectional_curvature(model)) {
    const auto results = run_samples(points.size(), ctx.opt.threads, [&](std::size_t i) {
      return std::vector<double>{
          std::abs(sectional_curvature(model, ConnectionKind::Primal, points[i], cfg) - *k),
          std::abs(sectional_curvature(model, ConnectionKind::Dual, points[i], cfg) - *k)};
    });
    CheckRecord c = fold("classification.sectional_curvature", model, 1e-5, results, 0);
    const CheckRecord d = fold("classification.sectional_curvature", model, 1e-5, results, 1);
    c.max_error = std::max(c.max_error, d.max_error);
    c.passed = c.passed && d.passed;
    out.push_back(c);
  } else {
    out.push_back(not_applicable("classification.sectional_curvature", model, 1e-5,
                                 "no closed-form sectional curvature"));
  }
}

using SuiteFn = void (*)(Context&, std::vector<CheckRecord>&);

}  // namespace

VerificationReport run_verification(const VerifyOptions& opt) {
  opt.cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  VerificationReport rep;
  rep.suite = std::string(to_string(opt.suite));
  rep.seed = opt.seed;
  rep.samples = opt.samples;

  std::vector<std::pair<Suite, SuiteFn>> suites{
      {Suite::Eguchi, eguchi_suite},       {Suite::PathIndependence, pathindep_suite},
      {Suite::Gradient, gradient_suite},   {Suite::Collapse, collapse_suite},
      {Suite::Symmetry, symmetry_suite},   {Suite::Classification, classification_suite}};
  const Rng root(opt.seed);
  for (std::size_t s = 0; s < suites.size(); ++s) {
    if (opt.suite != Suite::All && opt.suite != suites[s].first) continue;
    for (std::size_t m = 0; m < opt.models.size(); ++m) {
      Context ctx{opt, opt.models[m], root.fork(s * 1000 + m)};
      suites[s].second(ctx, rep.checks);
    }
  }
  rep.passed = !rep.checks.empty() &&
               std::all_of(rep.checks.begin(), rep.checks.end(),
                           [](const CheckRecord& c) { return c.passed; });
  rep.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

std::string report_to_json(const VerificationReport& report, bool include_duration) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["suite"] = report.suite;
  doc["seed"] = report.seed;
  doc["samples"] = report.samples;
  doc["passed"] = report.passed;
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) {
    ordered_json j;
    j["id"] = c.id;
    j["model"] = c.model;
    j["passed"] = c.passed;
    j["max_error"] = c.max_error;
    j["tolerance"] = c.tolerance;
    j["samples"] = c.samples;
    j["failures"] = c.failures;
    if (!c.note.empty()) j["note"] = c.note;
    checks.push_back(std::move(j));
  }
  doc["checks"] = std::move(checks);
  if (include_duration) doc["duration_seconds"] = report.duration_seconds;
  return doc.dump(2) + "\n";
}

}  // namespace dualgeo
