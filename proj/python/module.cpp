#include "dualgeo/divergence.hpp"
#include "dualgeo/eguchi.hpp"
#include "dualgeo/geodesic.hpp"
#include "dualgeo/manifold.hpp"
#include "dualgeo/sampling.hpp"
#include "dualgeo/verify.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

namespace py = pybind11;
using namespace dualgeo;

namespace {

Vec to_vec(const Eigen::VectorXd& x) {
  if (x.size() > kMaxDim) throw PointOutOfDomain("too many coordinates");
  return Vec(x);
}

Point to_point(const ManifoldModel& m, const Eigen::VectorXd& x) {
  Point p(to_vec(x));
  m.require(p);
  return p;
}

Eigen::VectorXd from_vec(const Vec& v) { return Eigen::VectorXd(v); }

ConnectionKind connection(const std::string& s) {
  if (s == "primal") return ConnectionKind::Primal;
  if (s == "dual") return ConnectionKind::Dual;
  throw InvalidConfig("connection must be 'primal' or 'dual'");
}

DivergenceKind divergence_kind(const std::string& s) {
  const auto k = parse_divergence_kind(s);
  if (!k) throw InvalidConfig("unknown divergence kind '" + s + "'");
  return *k;
}

py::array_t<double> symbols(const Christoffel& c) {
  const int n = c.dim();
  py::array_t<double> out({n, n, n});
  auto a = out.mutable_unchecked<3>();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) a(i, j, k) = c(i, j, k);
  return out;
}

Curve geodesic_from(const ManifoldModel& m, ConnectionKind kind, const Eigen::VectorXd& p,
                    const Eigen::VectorXd& v, const ToleranceConfig& cfg) {
  const Point base = to_point(m, p);
  return integrate_geodesic(m, kind, base, Tangent(base, to_vec(v)), cfg);
}

}  // namespace

PYBIND11_MODULE(_dualgeo, mod) {
  mod.doc() = "Dual connections, geodesics and canonical divergences on statistical manifolds.";

  auto error = py::register_exception<Error>(mod, "DualgeoError", PyExc_RuntimeError);
  py::register_exception<InvalidModelSpec>(mod, "InvalidModelSpec", error);
  py::register_exception<PointOutOfDomain>(mod, "PointOutOfDomain", error);
  py::register_exception<BaseMismatch>(mod, "BaseMismatch", error);
  py::register_exception<DomainExit>(mod, "DomainExit", error);
  py::register_exception<IntegrationFailure>(mod, "IntegrationFailure", error);
  py::register_exception<ShootingNoConvergence>(mod, "ShootingNoConvergence", error);
  py::register_exception<QuadratureFailure>(mod, "QuadratureFailure", error);
  py::register_exception<OracleUnavailable>(mod, "OracleUnavailable", error);
  py::register_exception<StencilOutOfDomain>(mod, "StencilOutOfDomain", error);
  py::register_exception<InvalidConfig>(mod, "InvalidConfig", error);

  py::class_<ToleranceConfig>(mod, "Tolerances")
      .def(py::init<>())
      .def_readwrite("ode_rel_tol", &ToleranceConfig::ode_rel_tol)
      .def_readwrite("ode_abs_tol", &ToleranceConfig::ode_abs_tol)
      .def_readwrite("shoot_tol", &ToleranceConfig::shoot_tol)
      .def_readwrite("shoot_max_iter", &ToleranceConfig::shoot_max_iter)
      .def_readwrite("quad_nodes", &ToleranceConfig::quad_nodes)
      .def_readwrite("fd_step", &ToleranceConfig::fd_step)
      .def("validate", &ToleranceConfig::validate);

  py::class_<ManifoldModel>(mod, "Model")
      .def(py::init([](const std::string& spec) { return make_model_from_spec(spec); }),
           py::arg("spec"))
      .def_property_readonly("dim", &ManifoldModel::dim)
      .def_property_readonly("name", &ManifoldModel::name)
      .def_property_readonly("params", &ManifoldModel::params)
      .def_property_readonly("spec", &ManifoldModel::spec)
      .def_property_readonly("structure",
                             [](const ManifoldModel& m) {
                               return std::string(to_string(m.declared_class()));
                             })
      .def_property_readonly("has_oracle", &ManifoldModel::has_oracle)
      .def("contains",
           [](const ManifoldModel& m, const Eigen::VectorXd& x) {
             return x.size() <= kMaxDim && m.contains(Vec(x));
           })
      .def("reference_point",
           [](const ManifoldModel& m) { return from_vec(m.family().reference_point()); })
      .def("from_mixture",
           [](const ManifoldModel& m, const std::vector<double>& probs) {
             return from_vec(m.family().from_mixture(probs));
           })
      .def(
          "sample",
          [](const ManifoldModel& m, std::size_t count, std::uint64_t seed) {
            Rng rng(seed);
            std::vector<Eigen::VectorXd> out;
            for (const Point& p : sample_points(m, count, rng)) out.push_back(from_vec(p.coords));
            return out;
          },
          py::arg("count"), py::arg("seed") = 0)
      .def("metric",
           [](const ManifoldModel& m, const Eigen::VectorXd& x) {
             return Eigen::MatrixXd(metric_at(m, to_point(m, x)));
           })
      .def(
          "christoffel",
          [](const ManifoldModel& m, const Eigen::VectorXd& x, const std::string& kind) {
            return symbols(christoffel_at(m, to_point(m, x), connection(kind)));
          },
          py::arg("x"), py::arg("kind") = "primal")
      .def(
          "duality_residual",
          [](const ManifoldModel& m, const Eigen::VectorXd& x, double step) {
            return duality_residual(m, to_point(m, x), step);
          },
          py::arg("x"), py::arg("step") = 1e-5)
      .def("__repr__", [](const ManifoldModel& m) { return "Model('" + m.spec() + "')"; });

  mod.def("catalog", [] {
    std::vector<py::dict> out;
    for (const auto& e : builtin_catalog()) {
      py::dict d;
      d["name"] = e.name;
      d["params"] = e.params;
      d["chart"] = e.chart;
      d["domain"] = e.domain;
      d["structure"] = e.structure;
      d["example"] = e.example;
      out.push_back(d);
    }
    return out;
  });

  mod.def(
      "exp_map",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const Eigen::VectorXd& v,
         const std::string& kind, const ToleranceConfig& cfg) {
        const Point base = to_point(m, p);
        return from_vec(exp_map(m, connection(kind), base, Tangent(base, to_vec(v)), cfg).coords);
      },
      py::arg("model"), py::arg("p"), py::arg("v"), py::arg("kind") = "primal",
      py::arg("tol") = ToleranceConfig{});

  mod.def(
      "log_map",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
         const std::string& kind, const ToleranceConfig& cfg) {
        return from_vec(
            log_map(m, connection(kind), to_point(m, p), to_point(m, q), cfg).components);
      },
      py::arg("model"), py::arg("p"), py::arg("q"), py::arg("kind") = "primal",
      py::arg("tol") = ToleranceConfig{});

  mod.def(
      "geodesic",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const Eigen::VectorXd& v,
         const std::vector<double>& ts, const std::string& kind, const ToleranceConfig& cfg) {
        const Curve c = geodesic_from(m, connection(kind), p, v, cfg);
        std::vector<Eigen::VectorXd> out;
        for (double t : ts) out.push_back(from_vec(c.position(t).coords));
        return out;
      },
      py::arg("model"), py::arg("p"), py::arg("v"), py::arg("ts"), py::arg("kind") = "primal",
      py::arg("tol") = ToleranceConfig{});

  mod.def(
      "transport",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const Eigen::VectorXd& v,
         const Eigen::VectorXd& w, const std::string& along, const std::string& kind,
         const ToleranceConfig& cfg) {
        const Curve c = geodesic_from(m, connection(along), p, v, cfg);
        const Tangent moved = parallel_transport(m, connection(kind), c, Tangent(c.start(), to_vec(w)), cfg);
        return py::make_tuple(from_vec(moved.base.coords), from_vec(moved.components));
      },
      py::arg("model"), py::arg("p"), py::arg("v"), py::arg("w"), py::arg("along") = "primal",
      py::arg("kind") = "primal", py::arg("tol") = ToleranceConfig{},
      "Transports w along the geodesic exp_p(t v), returning (end point, components).");

  mod.def(
      "divergence",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
         const std::string& kind, const ToleranceConfig& cfg) {
        return divergence(m, divergence_kind(kind), to_point(m, p), to_point(m, q), cfg);
      },
      py::arg("model"), py::arg("p"), py::arg("q"), py::arg("kind") = "canonical",
      py::arg("tol") = ToleranceConfig{});

  mod.def(
      "divergence_gradient",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const Eigen::VectorXd& q,
         const std::string& kind, const ToleranceConfig& cfg) {
        return from_vec(
            divergence_gradient(m, divergence_kind(kind), to_point(m, p), to_point(m, q), cfg)
                .components);
      },
      py::arg("model"), py::arg("p"), py::arg("q"), py::arg("kind") = "canonical",
      py::arg("tol") = ToleranceConfig{});

  mod.def(
      "path_functional",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const std::vector<Eigen::VectorXd>& vertices,
         const ToleranceConfig& cfg) {
        std::vector<Vec> pts;
        for (const auto& x : vertices) pts.push_back(to_point(m, x).coords);
        const auto r = path_functional(m, to_point(m, p), Curve::polyline(pts), cfg);
        return py::make_tuple(r.primal_integral, r.dual_integral, r.sum);
      },
      py::arg("model"), py::arg("p"), py::arg("vertices"), py::arg("tol") = ToleranceConfig{},
      "Integrals of Pi and Pi* along the polyline through `vertices`, and their sum.");

  mod.def(
      "recover_structure",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const std::string& kind,
         const ToleranceConfig& cfg) {
        const auto r = recover_structure(m, divergence_kind(kind), to_point(m, p), cfg);
        py::dict d;
        d["metric"] = Eigen::MatrixXd(r.metric);
        d["gamma"] = symbols(r.gamma);
        d["gamma_star"] = symbols(r.gamma_star);
        d["first_derivative_residual"] = r.first_derivative_residual;
        d["mixed_identity_residual"] = r.mixed_identity_residual;
        return d;
      },
      py::arg("model"), py::arg("p"), py::arg("kind") = "canonical",
      py::arg("tol") = ToleranceConfig{});

  mod.def(
      "sectional_curvature",
      [](const ManifoldModel& m, const Eigen::VectorXd& p, const std::string& kind,
         const ToleranceConfig& cfg) {
        return sectional_curvature(m, connection(kind), to_point(m, p), cfg);
      },
      py::arg("model"), py::arg("p"), py::arg("kind") = "primal",
      py::arg("tol") = ToleranceConfig{});

  mod.def(
      "classify",
      [](const ManifoldModel& m, const std::vector<Eigen::VectorXd>& points,
         const ToleranceConfig& cfg, std::uint64_t seed) {
        std::vector<Point> pts;
        for (const auto& x : points) pts.push_back(to_point(m, x));
        const auto r = classify_manifold(m, pts, cfg, seed);
        py::dict d;
        d["verdict"] = std::string(to_string(r.verdict));
        d["self_dual_residual"] = r.self_dual_residual;
        d["flatness_residual"] = r.flatness_residual;
        d["symmetry_residuals"] = r.symmetry_residuals;
        d["threshold"] = r.threshold;
        d["points"] = r.points;
        return d;
      },
      py::arg("model"), py::arg("points"), py::arg("tol") = ToleranceConfig{},
      py::arg("seed") = 0);

  mod.def(
      "_verify_json",
      [](const std::string& suite, const std::vector<std::string>& specs, std::size_t samples,
         std::uint64_t seed, unsigned threads, const ToleranceConfig& cfg) {
        VerifyOptions opt;
        const auto s = parse_suite(suite);
        if (!s) throw InvalidConfig("unknown suite '" + suite + "'");
        opt.suite = *s;
        for (const auto& spec : specs) opt.models.push_back(make_model_from_spec(spec));
        if (opt.models.empty()) opt.models = default_models();
        opt.samples = samples;
        opt.seed = seed;
        opt.threads = threads;
        opt.cfg = cfg;
        VerificationReport report;
        {
          py::gil_scoped_release release;
          report = run_verification(opt);
        }
        return report_to_json(report, false);
      },
      py::arg("suite"), py::arg("models"), py::arg("samples"), py::arg("seed"),
      py::arg("threads"), py::arg("tol"));
}
