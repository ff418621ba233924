#include "cli.hpp"

#include "format.hpp"

#include "dualgeo/divergence.hpp"
#include "dualgeo/eguchi.hpp"
#include "dualgeo/manifold.hpp"
#include "dualgeo/parallel.hpp"
#include "dualgeo/random.hpp"
#include "dualgeo/sampling.hpp"
#include "dualgeo/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

namespace dualgeo::cli {
namespace {

using nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMaxGridPoints = 1'000'000;

/// Raised for anything that should end the run with the config exit code.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Format { Csv, Json };

struct Options {
  std::vector<std::string> models;
  std::vector<std::string> kinds;
  std::vector<std::string> p;
  std::vector<std::string> q;
  std::string suite = "all";
  std::size_t samples = 10;
  std::uint64_t seed = 0;
  std::string grid;
  std::string coords = "natural";
  std::optional<double> tol_ode;
  std::optional<double> tol_shoot;
  std::optional<int> quad_nodes;
  std::optional<double> fd_step;
  std::string format = "csv";
  std::string output;
  unsigned threads = 0;
  bool timing = false;
};

void add_output_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--output", o.output, "Write to PATH instead of stdout");
}

void add_model_option(CLI::App* cmd, Options& o, bool required) {
  auto* opt = cmd->add_option("--model", o.models, "Model spec, e.g. categorical:2")
                  ->allow_extra_args(false);
  if (required) opt->required();
}

void add_numeric_options(CLI::App* cmd, Options& o) {
  cmd->add_option("--tol-ode", o.tol_ode, "ODE relative tolerance (absolute = 0.01 x relative)");
  cmd->add_option("--tol-shoot", o.tol_shoot, "Shooting endpoint tolerance");
  cmd->add_option("--quad-nodes", o.quad_nodes, "Gauss-Legendre nodes per path piece");
  cmd->add_option("--fd-step", o.fd_step, "Finite-difference step");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = available parallelism)")
      ->capture_default_str();
}

void add_coords_option(CLI::App* cmd, Options& o) {
  cmd->add_option("--coords", o.coords, "Coordinates of given points")
      ->check(CLI::IsMember({"natural", "mixture"}))
      ->capture_default_str();
}

Format format_of(const Options& o) { return o.format == "json" ? Format::Json : Format::Csv; }

ToleranceConfig tolerance_of(const Options& o) {
  ToleranceConfig cfg;
  if (o.tol_ode) {
    cfg.ode_rel_tol = *o.tol_ode;
    cfg.ode_abs_tol = *o.tol_ode * 1e-2;
  }
  if (o.tol_shoot) cfg.shoot_tol = *o.tol_shoot;
  if (o.quad_nodes) cfg.quad_nodes = *o.quad_nodes;
  if (o.fd_step) cfg.fd_step = *o.fd_step;
  cfg.validate();
  return cfg;
}

ManifoldModel single_model(const Options& o) {
  if (o.models.size() != 1) throw UsageError("exactly one --model is required");
  return make_model_from_spec(o.models.front());
}

std::vector<DivergenceKind> kinds_of(const Options& o, const ManifoldModel& model) {
  std::vector<DivergenceKind> kinds;
  if (o.kinds.empty()) kinds.push_back(DivergenceKind::Canonical);
  for (const auto& s : o.kinds) {
    const auto k = parse_divergence_kind(s);
    if (!k) throw UsageError("unknown divergence kind '" + s + "'");
    kinds.push_back(*k);
  }
  for (auto k : kinds)
    if (k == DivergenceKind::OracleKL && !model.has_oracle())
      throw UsageError("model " + model.spec() + " has no closed-form divergence");
  return kinds;
}

/// Chart coordinates of a user-supplied vector. Does not check the domain.
Vec chart_coords(const ManifoldModel& model, const std::vector<double>& xs, bool mixture) {
  if (mixture) return model.family().from_mixture(xs);
  if (static_cast<int>(xs.size()) != model.dim())
    throw UsageError("point has " + std::to_string(xs.size()) + " coordinates, model " +
                     model.spec() + " expects " + std::to_string(model.dim()));
  Vec v(model.dim());
  for (int i = 0; i < model.dim(); ++i) v[i] = xs[static_cast<std::size_t>(i)];
  return v;
}

Point checked_point(const ManifoldModel& model, const std::vector<double>& xs, bool mixture) {
  Point p(chart_coords(model, xs, mixture));
  model.require(p);
  return p;
}

std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

ordered_json json_real(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

struct Evaluation {
  double value = kNaN;
  bool converged = false;
  std::string error;
};

Evaluation evaluate(const ManifoldModel& model, DivergenceKind kind, const Point& p,
                    const Point& q, const ToleranceConfig& cfg) {
  Evaluation e;
  try {
    e.value = divergence(model, kind, p, q, cfg);
    e.converged = true;
  } catch (const ShootingNoConvergence& ex) {
    e.error = ex.what();
  } catch (const QuadratureFailure& ex) {
    e.error = ex.what();
  } catch (const IntegrationFailure& ex) {
    e.error = ex.what();
  } catch (const DomainExit& ex) {
    e.error = ex.what();
  } catch (const PointOutOfDomain& ex) {
    e.error = ex.what();
  }
  return e;
}

// ---------------------------------------------------------------- models

int cmd_models(const Options& o, std::ostream& out) {
  const auto& catalog = builtin_catalog();
  if (format_of(o) == Format::Json) {
    for (const auto& e : catalog) {
      ordered_json j;
      j["name"] = e.name;
      j["params"] = e.params;
      j["chart"] = e.chart;
      j["domain"] = e.domain;
      j["structure"] = e.structure;
      j["example"] = e.example;
      out << j.dump() << '\n';
    }
    return kOk;
  }
  out << csv_row({"name", "params", "chart", "domain", "structure", "example"});
  for (const auto& e : catalog)
    out << csv_row({e.name, e.params, e.chart, e.domain, e.structure, e.example});
  return kOk;
}

// ---------------------------------------------------------------- div

int cmd_div(const Options& o, std::ostream& out) {
  const ManifoldModel model = single_model(o);
  const ToleranceConfig cfg = tolerance_of(o);
  const auto kinds = kinds_of(o, model);
  const bool mixture = o.coords == "mixture";

  std::vector<Point> ps;
  std::vector<Point> qs;
  for (const auto& xs : parse_point_list(o.p)) ps.push_back(checked_point(model, xs, mixture));
  for (const auto& xs : parse_point_list(o.q)) qs.push_back(checked_point(model, xs, mixture));
  if (ps.empty() || qs.empty()) throw UsageError("div needs -p and -q");
  if (ps.size() == 1 && qs.size() > 1) ps.resize(qs.size(), ps.front());
  if (qs.size() == 1 && ps.size() > 1) qs.resize(ps.size(), qs.front());
  if (ps.size() != qs.size())
    throw UsageError("-p and -q lists must have equal length (or one of them a single point)");

  const std::size_t pairs = ps.size();
  std::vector<Evaluation> results(pairs * kinds.size());
  parallel_for(results.size(), o.threads, [&](std::size_t idx) {
    const std::size_t i = idx / kinds.size();
    results[idx] = evaluate(model, kinds[idx % kinds.size()], ps[i], qs[i], cfg);
  });

  const bool json = format_of(o) == Format::Json;
  if (!json) out << csv_row({"kind", "p", "q", "value", "quad_nodes", "converged", "error"});
  bool all_ok = true;
  for (std::size_t idx = 0; idx < results.size(); ++idx) {
    const std::size_t i = idx / kinds.size();
    const auto kind = kinds[idx % kinds.size()];
    const auto& r = results[idx];
    all_ok = all_ok && r.converged;
    const auto p = to_std(ps[i].coords);
    const auto q = to_std(qs[i].coords);
    if (json) {
      ordered_json j;
      j["kind"] = to_string(kind);
      j["p"] = p;
      j["q"] = q;
      j["value"] = json_real(r.value);
      j["quad_nodes"] = cfg.quad_nodes;
      j["converged"] = r.converged;
      if (!r.converged) j["error"] = r.error;
      out << j.dump() << '\n';
    } else {
      out << csv_row({std::string(to_string(kind)), join_reals(p), join_reals(q),
                      format_real(r.value), std::to_string(cfg.quad_nodes),
                      r.converged ? "true" : "false", r.error});
    }
  }
  return all_ok ? kOk : kPairFailed;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const Options& o, std::ostream& out) {
  VerifyOptions opt;
  const auto suite = parse_suite(o.suite);
  if (!suite) throw UsageError("unknown suite '" + o.suite + "'");
  opt.suite = *suite;
  if (o.models.empty()) {
    opt.models = default_models();
  } else {
    for (const auto& s : o.models) opt.models.push_back(make_model_from_spec(s));
  }
  if (o.samples < 1) throw UsageError("--samples must be at least 1");
  opt.samples = o.samples;
  opt.seed = o.seed;
  opt.cfg = tolerance_of(o);
  opt.threads = o.threads;
  const VerificationReport report = run_verification(opt);
  out << report_to_json(report, o.timing);
  return report.passed ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const Options& o, std::ostream& out) {
  const ManifoldModel model = single_model(o);
  const ToleranceConfig cfg = tolerance_of(o);
  const auto kinds = kinds_of(o, model);
  const bool mixture = o.coords == "mixture";
  if (o.grid.empty()) throw UsageError("sweep needs --grid lo:hi:n[,lo:hi:n...]");

  const auto plist = parse_point_list(o.p);
  if (plist.size() > 1) throw UsageError("sweep takes a single -p");
  const Point p = plist.empty() ? Point(model.family().reference_point())
                                : checked_point(model, plist.front(), mixture);

  const auto axes = parse_grid(o.grid);
  const std::size_t width = axes.size();
  if (!mixture && static_cast<int>(width) != model.dim())
    throw UsageError("grid has " + std::to_string(width) + " axes, model " + model.spec() +
                     " expects " + std::to_string(model.dim()));
  std::size_t total = 1;
  for (const auto& a : axes) {
    total *= static_cast<std::size_t>(a.count);
    if (total > kMaxGridPoints) throw UsageError("grid has too many points");
  }

  // Row-major with the last axis varying fastest.
  std::vector<std::vector<double>> grid(total, std::vector<double>(width));
  for (std::size_t r = 0; r < total; ++r) {
    std::size_t rem = r;
    for (std::size_t k = width; k-- > 0;) {
      const auto n = static_cast<std::size_t>(axes[k].count);
      grid[r][k] = axis_value(axes[k], static_cast<int>(rem % n));
      rem /= n;
    }
  }

  struct Row {
    std::vector<Evaluation> values;
    bool converged = true;
    std::string error;
  };
  std::vector<Row> rows(total);
  parallel_for(total, o.threads, [&](std::size_t r) {
    Row& row = rows[r];
    row.values.resize(kinds.size());
    std::optional<Point> q;
    try {
      q = checked_point(model, grid[r], mixture);
    } catch (const Error& e) {
      row.converged = false;
      row.error = e.what();
      return;
    }
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      row.values[k] = evaluate(model, kinds[k], p, *q, cfg);
      if (!row.values[k].converged && row.converged) {
        row.converged = false;
        row.error = std::string(to_string(kinds[k])) + ": " + row.values[k].error;
      }
    }
  });

  const bool json = format_of(o) == Format::Json;
  if (!json) {
    std::vector<std::string> header;
    for (std::size_t k = 0; k < width; ++k) header.push_back("q" + std::to_string(k));
    for (auto kind : kinds) header.emplace_back(to_string(kind));
    header.emplace_back("converged");
    header.emplace_back("error");
    out << csv_row(header);
  }
  for (std::size_t r = 0; r < total; ++r) {
    const Row& row = rows[r];
    if (json) {
      ordered_json j;
      j["q"] = grid[r];
      for (std::size_t k = 0; k < kinds.size(); ++k)
        j[std::string(to_string(kinds[k]))] = json_real(row.values[k].value);
      j["converged"] = row.converged;
      if (!row.converged) j["error"] = row.error;
      out << j.dump() << '\n';
    } else {
      std::vector<std::string> fields;
      for (double x : grid[r]) fields.push_back(format_real(x));
      for (const auto& v : row.values) fields.push_back(format_real(v.value));
      fields.emplace_back(row.converged ? "true" : "false");
      fields.push_back(row.error);
      out << csv_row(fields);
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- probe-f

int cmd_probe_f(const Options& o, std::ostream& out, std::ostream& err) {
  const ManifoldModel model = single_model(o);
  const ToleranceConfig cfg = tolerance_of(o);
  if (o.samples < 10) throw UsageError("probe-f needs --samples >= 10");
  const bool mixture = o.coords == "mixture";
  const auto plist = parse_point_list(o.p);
  if (plist.size() > 1) throw UsageError("probe-f takes a single -p");
  const Point p = plist.empty() ? Point(model.family().reference_point())
                                : checked_point(model, plist.front(), mixture);

  Rng rng(o.seed);
  const std::vector<Point> qs = sample_points(model, o.samples, rng);
  std::vector<SymmetryRow> rows(qs.size());
  parallel_for(qs.size(), o.threads,
               [&](std::size_t i) { rows[i] = symmetry_row(model, p, qs[i], cfg); });
  const SymmetryProbeResult res = summarize_symmetry(model, std::move(rows));

  const bool json = format_of(o) == Format::Json;
  const auto width = static_cast<std::size_t>(model.dim());
  if (!json) {
    std::vector<std::string> header;
    for (std::size_t k = 0; k < width; ++k) header.push_back("q" + std::to_string(k));
    for (const char* h : {"dual_forward", "primal_reverse", "converged", "error"})
      header.emplace_back(h);
    out << csv_row(header);
  }
  for (const auto& row : res.rows) {
    const auto q = to_std(row.q.coords);
    const double fwd = row.converged ? row.dual_forward : kNaN;
    const double rev = row.converged ? row.primal_reverse : kNaN;
    if (json) {
      ordered_json j;
      j["q"] = q;
      j["dual_forward"] = json_real(fwd);
      j["primal_reverse"] = json_real(rev);
      j["converged"] = row.converged;
      if (!row.converged) j["error"] = row.error;
      out << j.dump() << '\n';
    } else {
      std::vector<std::string> fields;
      for (double x : q) fields.push_back(format_real(x));
      fields.push_back(format_real(fwd));
      fields.push_back(format_real(rev));
      fields.emplace_back(row.converged ? "true" : "false");
      fields.push_back(row.error);
      out << csv_row(fields);
    }
  }

  if (json) {
    ordered_json s;
    s["summary"] = true;
    s["model"] = model.spec();
    s["samples"] = res.rows.size();
    s["skipped"] = res.skipped;
    s["rank_agreement"] = res.rank_agreement;
    s["max_pointwise_error"] =
        res.max_pointwise_error ? ordered_json(*res.max_pointwise_error) : ordered_json();
    s["passed"] = res.passed;
    out << s.dump() << '\n';
  } else {
    err << "rank_agreement=" << format_real(res.rank_agreement) << " skipped=" << res.skipped
        << "/" << res.rows.size();
    if (res.max_pointwise_error)
      err << " max_pointwise_error=" << format_real(*res.max_pointwise_error);
    err << " passed=" << (res.passed ? "true" : "false") << '\n';
  }
  return res.passed ? kOk : kCheckFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Divergences and dual geometry on statistical manifolds", "dualgeo"};
  app.require_subcommand(1, 1);
  Options o;

  auto* models = app.add_subcommand("models", "List the builtin models");
  add_output_options(models, o);

  auto* div = app.add_subcommand("div", "Evaluate a divergence for one or more point pairs");
  add_model_option(div, o, true);
  div->add_option("--kind", o.kinds, "ay, canonical, dual, pseudonorm or oracle")
      ->delimiter(',')
      ->allow_extra_args(false);
  div->add_option("-p", o.p, "First point(s), comma-separated; ';' separates points")
      ->allow_extra_args(false)
      ->required();
  div->add_option("-q", o.q, "Second point(s)")->allow_extra_args(false)->required();
  add_coords_option(div, o);
  add_numeric_options(div, o);
  add_output_options(div, o);

  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  add_model_option(verify, o, false);
  verify->add_option("--suite", o.suite,
                     "eguchi, pathindep, gradient, collapse, symmetry, classification or all")
      ->capture_default_str();
  verify->add_option("--samples", o.samples, "Samples per model")->capture_default_str();
  verify->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  verify->add_flag("--timing", o.timing, "Include wall-clock duration in the report");
  add_numeric_options(verify, o);
  add_output_options(verify, o);

  auto* sweep = app.add_subcommand("sweep", "Evaluate divergences from p over a grid of q");
  add_model_option(sweep, o, true);
  sweep->add_option("--kind", o.kinds, "Divergence kinds")->delimiter(',')->allow_extra_args(false);
  sweep->add_option("-p", o.p, "Base point (default: model reference point)")
      ->allow_extra_args(false);
  sweep->add_option("--grid", o.grid, "lo:hi:n per coordinate, comma-separated")->required();
  add_coords_option(sweep, o);
  add_numeric_options(sweep, o);
  add_output_options(sweep, o);

  auto* probe = app.add_subcommand("probe-f", "Compare D*(p, q) with D(q, p) on sampled q");
  add_model_option(probe, o, true);
  probe->add_option("-p", o.p, "Base point (default: model reference point)")
      ->allow_extra_args(false);
  probe->add_option("--samples", o.samples, "Number of sampled q (>= 10)")->capture_default_str();
  probe->add_option("--seed", o.seed, "Sampling seed")->capture_default_str();
  add_coords_option(probe, o);
  add_numeric_options(probe, o);
  add_output_options(probe, o);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  std::ostringstream buffer;
  int code = kOk;
  try {
    if (models->parsed()) {
      code = cmd_models(o, buffer);
    } else if (div->parsed()) {
      code = cmd_div(o, buffer);
    } else if (verify->parsed()) {
      code = cmd_verify(o, buffer);
    } else if (sweep->parsed()) {
      code = cmd_sweep(o, buffer);
    } else {
      code = cmd_probe_f(o, buffer, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }

  if (o.output.empty()) {
    out << buffer.str();
  } else {
    std::ofstream file(o.output, std::ios::binary);
    file << buffer.str();
    if (!file) {
      err << "error: cannot write " << o.output << '\n';
      return kConfigError;
    }
  }
  return code;
}

}  // namespace dualgeo::cli
