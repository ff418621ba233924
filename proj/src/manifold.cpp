#include "dualgeo/manifold.hpp"

#include "builtin_models.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace dualgeo {

std::string_view to_string(StructureClass c) {
  switch (c) {
    case StructureClass::SelfDual: return "SelfDual";
    case StructureClass::DuallyFlat: return "DuallyFlat";
    case StructureClass::General: return "General";
  }
  return "General";
}

namespace {

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Shortest form that still round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
    if (std::strtod(shorter, nullptr) == v) return shorter;
  }
  return buf;
}

double parse_param(std::string_view token) {
  double v = 0.0;
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw InvalidModelSpec("invalid model parameter '" + std::string(token) + "'");
  return v;
}

}  // namespace

std::string ManifoldModel::spec() const {
  std::string s = name_;
  for (double p : params_) s += ":" + format_param(p);
  return s;
}

bool ManifoldModel::contains(const Point& p) const { return contains(p.coords); }

void ManifoldModel::require(const Point& p) const {
  if (p.dim() != dim_)
    throw PointOutOfDomain("point has dimension " + std::to_string(p.dim()) + ", model " +
                           spec() + " expects " + std::to_string(dim_));
  if (!family_->contains(p.coords)) throw PointOutOfDomain("point outside the domain of " + spec());
}

ManifoldModel make_builtin(std::string_view name, std::span<const double> params) {
  return detail::build_model(name, params);
}

ManifoldModel make_model_from_spec(std::string_view spec) {
  std::size_t first = spec.find_first_not_of(" \t\n");
  if (first != std::string_view::npos && spec[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(spec);
    } catch (const nlohmann::json::exception& e) {
      throw InvalidModelSpec(std::string("malformed JSON model spec: ") + e.what());
    }
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
      throw InvalidModelSpec("JSON model spec needs a string 'name'");
    std::vector<double> params;
    if (j.contains("params")) {
      if (!j["params"].is_array()) throw InvalidModelSpec("'params' must be an array");
      for (const auto& v : j["params"]) {
        if (!v.is_number()) throw InvalidModelSpec("'params' must hold numbers");
        params.push_back(v.get<double>());
      }
    }
    return make_builtin(j["name"].get<std::string>(), params);
  }

  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = spec.find(':', pos);
    tokens.push_back(spec.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  if (tokens.empty() || tokens[0].empty()) throw InvalidModelSpec("empty model spec");
  std::vector<double> params;
  for (std::size_t i = 1; i < tokens.size(); ++i) params.push_back(parse_param(tokens[i]));
  return make_builtin(tokens[0], params);
}

const std::vector<CatalogEntry>& builtin_catalog() { return detail::catalog_entries(); }

std::vector<ManifoldModel> default_models() {
  std::vector<ManifoldModel> out;
  for (const auto& e : builtin_catalog()) out.push_back(make_model_from_spec(e.example));
  return out;
}

Mat metric_at(const ManifoldModel& model, const Point& p) {
  model.require(p);
  return model.family().metric(p.coords);
}

Christoffel christoffel_at(const ManifoldModel& model, const Point& p, ConnectionKind kind) {
  model.require(p);
  Christoffel out;
  model.family().christoffel(p.coords, kind, out);
  return out;
}

double inner_product(const ManifoldModel& model, const Point& p, const Tangent& u,
                     const Tangent& v) {
  if (!(u.base == p) || !(v.base == p)) throw BaseMismatch("tangents are not attached to p");
  model.require(p);
  if (u.dim() != model.dim() || v.dim() != model.dim())
    throw BaseMismatch("tangent dimension does not match the model");
  return u.components.dot(model.family().metric(p.coords) * v.components);
}

double norm(const ManifoldModel& model, const Tangent& v) {
  return std::sqrt(inner_product(model, v.base, v, v));
}

double duality_residual(const ManifoldModel& model, const Point& p, double step) {
  model.require(p);
  const int n = model.dim();
  const ModelFamily& family = model.family();
  Christoffel gamma;
  Christoffel gamma_star;
  family.christoffel(p.coords, ConnectionKind::Primal, gamma);
  family.christoffel(p.coords, ConnectionKind::Dual, gamma_star);
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    Vec xp = p.coords;
    Vec xm = p.coords;
    xp[k] += step;
    xm[k] -= step;
    if (!family.contains(xp) || !family.contains(xm))
      throw PointOutOfDomain("duality stencil leaves the domain");
    const Mat dg = (family.metric(xp) - family.metric(xm)) / (2.0 * step);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        worst = std::max(worst, std::abs(dg(i, j) - gamma(k, i, j) - gamma_star(k, j, i)));
  }
  return worst;
}

}  // namespace dualgeo
