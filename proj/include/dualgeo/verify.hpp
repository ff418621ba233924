#pragma once

#include "dualgeo/curve.hpp"
#include "dualgeo/divergence.hpp"
#include "dualgeo/manifold.hpp"
#include "dualgeo/tolerance.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dualgeo {

enum class Suite { Eguchi, PathIndependence, Gradient, Collapse, Symmetry, Classification, All };

std::string_view to_string(Suite s);
/// CLI spellings: eguchi, pathindep, gradient, collapse, symmetry, classification, all.
std::optional<Suite> parse_suite(std::string_view s);

struct CheckRecord {
  std::string id;
  std::string model;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::size_t samples = 0;
  /// Samples whose evaluation raised instead of producing a value.
  std::size_t failures = 0;
  std::string note;
};

struct VerificationReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::vector<CheckRecord> checks;
  bool passed = false;
  double duration_seconds = 0.0;
};

struct VerifyOptions {
  Suite suite = Suite::All;
  std::vector<ManifoldModel> models;
  std::size_t samples = 10;
  std::uint64_t seed = 0;
  ToleranceConfig cfg;
  unsigned threads = 0;
};

VerificationReport run_verification(const VerifyOptions& opt);

/// Single JSON document. The wall-clock duration is only written when asked
/// for, so that reports of identical runs are byte-identical.
std::string report_to_json(const VerificationReport& report, bool include_duration);

// Per-sample measurements shared by the suites and the acceptance tests.

/// |Pi_q(p) + Pi*_q(p) - grad_q r_p| in the metric at q.
double gradient_identity_error(const ManifoldModel& model, const Point& p, const Point& q,
                               const ToleranceConfig& cfg = {});

struct DecompositionMeasure {
  /// |<Pi - grad Div_p, sigma'(1)>| / (|Pi| |sigma'(1)|) at q.
  double orthogonality = 0.0;
  /// Angle in radians between grad Div_p and sigma'(1) at q.
  double alignment_angle = 0.0;
};

/// For `kind` Primal: Pi, the canonical divergence and the primal geodesic;
/// for Dual: Pi*, the dual canonical divergence and the dual geodesic.
DecompositionMeasure decomposition_measure(const ManifoldModel& model, ConnectionKind kind,
                                           const Point& p, const Point& q,
                                           const ToleranceConfig& cfg = {});

struct PathIndependenceMeasure {
  double pseudo_norm = 0.0;
  std::vector<double> sums;
  /// (max - min of sums) / (1 + |r|).
  double spread = 0.0;
  /// max |sum - r| / (1 + |r|).
  double pseudo_norm_error = 0.0;
};

/// Spread and pseudo-norm error of already evaluated path sums.
PathIndependenceMeasure path_independence_from_sums(double pseudo_norm_value,
                                                    std::vector<double> sums);

PathIndependenceMeasure path_independence_measure(const ManifoldModel& model, const Point& p,
                                                  const Point& q, std::span<const Curve> paths,
                                                  const ToleranceConfig& cfg = {});

}  // namespace dualgeo
