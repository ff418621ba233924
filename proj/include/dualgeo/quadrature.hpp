#pragma once

#include <vector>

namespace dualgeo {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule mapped to [a, b], nodes ascending.
QuadratureRule gauss_legendre(int n, double a = 0.0, double b = 1.0);

}  // namespace dualgeo
