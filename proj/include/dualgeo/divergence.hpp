#pragma once

#include "dualgeo/curve.hpp"
#include "dualgeo/geodesic.hpp"
#include "dualgeo/manifold.hpp"
#include "dualgeo/tolerance.hpp"

#include <optional>
#include <string_view>

namespace dualgeo {

enum class DivergenceKind { Ay, Canonical, CanonicalDual, PseudoNorm, OracleKL };

std::string_view to_string(DivergenceKind kind);
/// Accepts the CLI spellings: ay, canonical, dual, pseudonorm, oracle.
std::optional<DivergenceKind> parse_divergence_kind(std::string_view s);

struct PathFunctionalResult {
  double primal_integral = 0.0;
  double dual_integral = 0.0;
  double sum = 0.0;
};

/// Pi_t(p) and Pi*_t(p), both attached to gamma(t).
struct PiPair {
  Tangent pi;
  Tangent pi_star;
};

/// Chart distance below which every divergence returns its second-order
/// limit instead of shooting.
inline constexpr double kNearDiagonal = 1e-6;

/// D(p, q) = int_0^1 t |sigma'(t)|^2 dt along the primal geodesic p -> q.
double ay_divergence(const ManifoldModel& model, const Point& p, const Point& q,
                     const ToleranceConfig& cfg = {});

/// Pi_t(p): primal transport of exp_p^{-1}(gamma(t)) along the dual geodesic
/// p -> gamma(t); Pi*_t(p): dual transport of the dual log along the primal
/// geodesic.
PiPair pi_field(const ManifoldModel& model, const Point& p, const Curve& gamma, double t,
                const ToleranceConfig& cfg = {});

/// Canonical divergence: line integral of Pi_t(p) along the primal geodesic p -> q.
double canonical_divergence(const ManifoldModel& model, const Point& p, const Point& q,
                            const ToleranceConfig& cfg = {});

/// Dual canonical divergence: line integral of Pi*_t(p) along the dual geodesic.
double dual_canonical_divergence(const ManifoldModel& model, const Point& p, const Point& q,
                                 const ToleranceConfig& cfg = {});

/// r(p, q) = <exp_p^{-1} q, exp*_p^{-1} q>_p.
double pseudo_norm(const ManifoldModel& model, const Point& p, const Point& q,
                   const ToleranceConfig& cfg = {});

/// Both line integrals of Pi and Pi* along an arbitrary path starting at p.
/// Quadrature runs separately over every smooth piece of the path.
PathFunctionalResult path_functional(const ManifoldModel& model, const Point& p,
                                     const Curve& gamma, const ToleranceConfig& cfg = {});

/// Riemannian gradient at q of x -> Div(p, x), from central differences.
Tangent divergence_gradient(const ManifoldModel& model, DivergenceKind which, const Point& p,
                            const Point& q, const ToleranceConfig& cfg = {});

/// Closed-form divergence of the dually flat builtins, oriented like
/// canonical_divergence: on the exponential families it is KL(P_q || P_p).
double oracle_divergence(const ManifoldModel& model, const Point& p, const Point& q);

double divergence(const ManifoldModel& model, DivergenceKind which, const Point& p,
                  const Point& q, const ToleranceConfig& cfg = {});

namespace detail {

/// Canonical divergence of `kind` (Primal gives D, Dual gives D*). With
/// `warm_start` false every node solves its shooting problem from scratch.
double canonical_impl(const ManifoldModel& model, ConnectionKind kind, const Vec& p,
                      const Vec& q, const ToleranceConfig& cfg, bool warm_start = true);

double divergence_raw(const ManifoldModel& model, DivergenceKind which, const Vec& p,
                      const Vec& q, const ToleranceConfig& cfg);

}  // namespace detail
}  // namespace dualgeo
