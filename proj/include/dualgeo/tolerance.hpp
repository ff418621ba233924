#pragma once

#include "dualgeo/errors.hpp"

namespace dualgeo {

/// Numerical knobs shared by every operation.
struct ToleranceConfig {
  double ode_rel_tol = 1e-10;
  double ode_abs_tol = 1e-12;
  /// Newton stops once the endpoint misses the target by at most this much
  /// (max-norm, chart coordinates).
  double shoot_tol = 1e-9;
  int shoot_max_iter = 50;
  /// Gauss-Legendre nodes per smooth piece of an integration path.
  int quad_nodes = 32;
  double fd_step = 1e-4;

  void validate() const {
    if (!(ode_rel_tol > 0) || !(ode_abs_tol > 0) || !(shoot_tol > 0) || !(fd_step > 0))
      throw InvalidConfig("tolerances must be positive");
    if (shoot_max_iter < 1) throw InvalidConfig("shoot_max_iter must be >= 1");
    if (quad_nodes < 1) throw InvalidConfig("quad_nodes must be >= 1");
  }
};

}  // namespace dualgeo
