#pragma once

#include "dualgeo/errors.hpp"
#include "dualgeo/random.hpp"
#include "dualgeo/types.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dualgeo {

/// Which row of the classification table a builtin belongs to by construction.
enum class StructureClass { SelfDual, DuallyFlat, General };

std::string_view to_string(StructureClass c);

/// Chart-level description of a statistical manifold (M, g, nabla, nabla*).
/// Implementations work on raw coordinate vectors and perform no domain checks;
/// ManifoldModel adds the checked surface.
class ModelFamily {
 public:
  virtual ~ModelFamily() = default;

  virtual bool contains(const Vec& x) const = 0;
  virtual Mat metric(const Vec& x) const = 0;
  virtual void christoffel(const Vec& x, ConnectionKind kind, Christoffel& out) const = 0;

  virtual bool has_oracle() const { return false; }
  virtual double oracle(const Vec& /*p*/, const Vec& /*q*/) const {
    throw OracleUnavailable("model has no closed-form divergence");
  }

  /// Uniform draw from the documented safe sub-box of the domain.
  virtual Vec sample(Rng& rng) const = 0;
  virtual Vec reference_point() const = 0;

  /// Converts a probability vector (n or n+1 entries) to chart coordinates.
  virtual Vec from_mixture(std::span<const double> /*probs*/) const {
    throw InvalidModelSpec("mixture coordinates are only defined for categorical models");
  }
};

/// Immutable handle to a model. Cheap to copy; safe to share across threads.
class ManifoldModel {
 public:
  ManifoldModel(std::string name, std::vector<double> params, int dim, StructureClass cls,
                std::shared_ptr<const ModelFamily> family)
      : name_(std::move(name)),
        params_(std::move(params)),
        dim_(dim),
        class_(cls),
        family_(std::move(family)) {}

  int dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }
  StructureClass declared_class() const { return class_; }
  const ModelFamily& family() const { return *family_; }

  /// Canonical "name:param:..." form that make_model_from_spec round-trips.
  std::string spec() const;

  bool contains(const Point& p) const;
  bool contains(const Vec& x) const { return x.size() == dim_ && family_->contains(x); }

  /// Throws PointOutOfDomain unless `p` has the right size and lies in the domain.
  void require(const Point& p) const;

  bool has_oracle() const { return family_->has_oracle(); }

 private:
  std::string name_;
  std::vector<double> params_;
  int dim_;
  StructureClass class_;
  std::shared_ptr<const ModelFamily> family_;
};

/// Builds a catalog model. Names: euclidean, sphere, categorical, gaussian1d,
/// alpha_categorical. `params` are the colon-separated values after the name.
ManifoldModel make_builtin(std::string_view name, std::span<const double> params);

/// Parses "name:dim[:param...]" or a JSON object {"name": ..., "params": [...]}.
ManifoldModel make_model_from_spec(std::string_view spec);

struct CatalogEntry {
  std::string name;
  std::string params;
  std::string chart;
  std::string domain;
  std::string structure;
  std::string example;
};

const std::vector<CatalogEntry>& builtin_catalog();

/// The default instance of every builtin, in catalog order.
std::vector<ManifoldModel> default_models();

Mat metric_at(const ManifoldModel& model, const Point& p);
Christoffel christoffel_at(const ManifoldModel& model, const Point& p, ConnectionKind kind);

/// Metric inner product at `p`. Both tangents must be attached to `p`.
double inner_product(const ManifoldModel& model, const Point& p, const Tangent& u,
                     const Tangent& v);

double norm(const ManifoldModel& model, const Tangent& v);

/// max_ijk |d_k g_ij - Gamma_kij - Gamma*_kji| at `p`, with the metric
/// derivative taken by central differences of size `step`.
double duality_residual(const ManifoldModel& model, const Point& p, double step = 1e-5);

}  // namespace dualgeo
