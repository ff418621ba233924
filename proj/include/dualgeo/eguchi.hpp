#pragma once

#include "dualgeo/divergence.hpp"
#include "dualgeo/manifold.hpp"
#include "dualgeo/tolerance.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dualgeo {

/// Geometry read off a divergence at the diagonal (p, p).
struct RecoveredStructure {
  Mat metric;
  Christoffel gamma;
  Christoffel gamma_star;
  /// max |d_i Div| over both arguments at the diagonal.
  double first_derivative_residual = 0.0;
  /// max over i, j of |A_ij + B_ij| and |A_ij - C_ij|, where A, B, C are the
  /// second derivatives in (first, first), (first, second), (second, second).
  double mixed_identity_residual = 0.0;
};

/// Finite-difference step sizes used by recover_structure for a given fd_step.
struct EguchiSteps {
  double first;
  double second;
  double third;  // both higher orders extrapolate from h and h/2
};
EguchiSteps eguchi_steps(double fd_step);

/// g_ij = d_i d_j Div, Gamma_ijk = -d_i d_j d'_k Div and
/// Gamma*_ijk = -d'_i d'_j d_k Div, all at (p, p), where d acts on the first
/// argument and d' on the second. Throws StencilOutOfDomain when a stencil
/// point leaves the domain.
RecoveredStructure recover_structure(const ManifoldModel& model, DivergenceKind which,
                                     const Point& p, const ToleranceConfig& cfg = {});

/// R^l_ijk stored so that r(l, i, j, k) is the l-th component of
/// R(d_i, d_j) d_k; antisymmetric in (i, j).
class CurvatureTensor {
 public:
  CurvatureTensor() = default;
  explicit CurvatureTensor(int n) : n_(n), data_(static_cast<std::size_t>(n * n * n * n), 0.0) {}

  int dim() const { return n_; }
  double& operator()(int l, int i, int j, int k) { return data_[index(l, i, j, k)]; }
  double operator()(int l, int i, int j, int k) const { return data_[index(l, i, j, k)]; }
  double max_abs() const;
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t index(int l, int i, int j, int k) const {
    return static_cast<std::size_t>(((l * n_ + i) * n_ + j) * n_ + k);
  }
  int n_ = 0;
  std::vector<double> data_;
};

/// Curvature of the chosen connection from the coordinate formula, with the
/// derivatives of the raised Christoffel symbols taken by Richardson-extrapolated
/// central differences of size cfg.fd_step and cfg.fd_step / 2.
CurvatureTensor curvature_tensor(const ManifoldModel& model, ConnectionKind kind, const Point& p,
                                 const ToleranceConfig& cfg = {});

/// g(R(d_0, d_1) d_1, d_0) / (g_00 g_11 - g_01^2): sectional curvature of the
/// first coordinate plane.
double sectional_curvature(const ManifoldModel& model, ConnectionKind kind, const Point& p,
                           const ToleranceConfig& cfg = {});

enum class Verdict { SelfDual, DuallyFlat, Symmetric, General };
std::string_view to_string(Verdict v);

inline constexpr double kClassificationThreshold = 1e-5;
inline constexpr int kSymmetryProbesPerPoint = 20;

struct ClassificationReport {
  double self_dual_residual = 0.0;
  double flatness_residual = 0.0;
  /// (max |nabla R| component, max |R(Y, X, X, X)| over unit probes).
  std::pair<double, double> symmetry_residuals{0.0, 0.0};
  Verdict verdict = Verdict::General;
  double threshold = kClassificationThreshold;
  std::size_t points = 0;
};

/// Residuals are maxima over all sample points; conditions are checked in the
/// order SelfDual, DuallyFlat, Symmetric. Probe directions come from `seed`.
ClassificationReport classify_manifold(const ManifoldModel& model,
                                       std::span<const Point> sample_points,
                                       const ToleranceConfig& cfg = {}, std::uint64_t seed = 0,
                                       double threshold = kClassificationThreshold);

struct SymmetryRow {
  Point q;
  double dual_forward = 0.0;    // D*(p, q)
  double primal_reverse = 0.0;  // D(q, p)
  bool converged = false;
  std::string error;
};

struct SymmetryProbeResult {
  std::vector<SymmetryRow> rows;
  std::size_t skipped = 0;
  /// Fraction of row pairs ordered the same way by both columns.
  double rank_agreement = 1.0;
  /// Pointwise comparison, only on dually flat models.
  std::optional<double> max_pointwise_error;
  bool passed = false;
};

inline constexpr double kMaxSkippedFraction = 0.2;

/// Kendall-style concordance of two columns: ties within a relative 1e-9
/// count as agreeing only when both columns tie.
double rank_agreement(std::span<const double> a, std::span<const double> b);

SymmetryProbeResult symmetry_probe(const ManifoldModel& model, const Point& p,
                                   std::span<const Point> sample_qs,
                                   const ToleranceConfig& cfg = {});

/// Assembles the report from rows that were already evaluated (possibly in parallel).
SymmetryProbeResult summarize_symmetry(const ManifoldModel& model, std::vector<SymmetryRow> rows);

/// Evaluates one row of the probe, recording shooting failures instead of throwing.
SymmetryRow symmetry_row(const ManifoldModel& model, const Point& p, const Point& q,
                         const ToleranceConfig& cfg);

}  // namespace dualgeo
