#pragma once

// Closed forms written directly from their textbook definitions, without
// going through the library, so tests compare two independent computations.

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

/// Outcome probabilities of a categorical distribution from theta_i = ln(p_i / p_0).
inline std::vector<double> categorical_probs(const std::vector<double>& theta) {
  double z = 1.0;
  for (double t : theta) z += std::exp(t);
  std::vector<double> p{1.0 / z};
  for (double t : theta) p.push_back(std::exp(t) / z);
  return p;
}

inline std::vector<double> categorical_theta(const std::vector<double>& probs) {
  std::vector<double> theta;
  for (std::size_t i = 1; i < probs.size(); ++i) theta.push_back(std::log(probs[i] / probs[0]));
  return theta;
}

/// KL(a || b) = sum a_i ln(a_i / b_i).
inline double kl(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::log(a[i] / b[i]);
  return s;
}

/// KL(N(m1, v1) || N(m2, v2)) for variances v1, v2.
inline double gaussian_kl(double m1, double v1, double m2, double v2) {
  return 0.5 * (std::log(v2 / v1) + (v1 + (m1 - m2) * (m1 - m2)) / v2 - 1.0);
}

/// Natural parameters (mu / s^2, -1 / (2 s^2)).
inline std::array<double, 2> gaussian_theta(double mu, double var) {
  return {mu / var, -0.5 / var};
}

/// Unit vector of spherical angles (polar theta, azimuth phi).
inline std::array<double, 3> sphere_point(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

inline double dot3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

/// Great-circle angle between two points of the unit sphere.
inline double great_circle_angle(double t1, double p1, double t2, double p2) {
  const auto a = sphere_point(t1, p1);
  const auto b = sphere_point(t2, p2);
  const std::array<double, 3> c{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
                                a[0] * b[1] - a[1] * b[0]};
  return std::atan2(std::sqrt(dot3(c, c)), dot3(a, b));
}

/// Gauss-Legendre check: integral of x^k over [0, 1].
inline double monomial_integral(int k) { return 1.0 / (k + 1); }

}  // namespace oracle
